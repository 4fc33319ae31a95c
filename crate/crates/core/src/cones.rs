//! Cone geometry: the normalized-volume constant of the non-symmetric cone
//! difference, cone-mass ratios of measures, scale-fraction scans, and the
//! pairwise rectifiability criterion.
//!
//! The cone X(x,r,V,alpha) is the set of y in the open ball B(x,r) with
//! dist(y-x, V) < alpha |y-x|; H(x,theta,alpha) is the closed half-cone
//! {y : (y-x).theta >= alpha |y-x|}. All scans work with the difference
//! X \ H.

use crate::constructions::check_orthonormal;
use crate::error::{MeasureError, Result};
use crate::geom::{dot, norm, Point, ORIGIN};
use crate::interval::MassInterval;
use crate::measure::{ConeRegion, Measure};
use crate::scenery::default_extra_levels;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One cone configuration: the plane V (as an orthonormal basis of its
/// (d-k)-dimensional carrier), the excluded direction theta, and the
/// opening parameter alpha.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    pub dim: usize,
    pub k: usize,
    pub v_basis: Vec<Point>,
    pub theta: Point,
    pub alpha: f64,
}

impl ConeSpec {
    pub fn new(dim: usize, k: usize, v_basis: Vec<Point>, theta: Point, alpha: f64) -> Result<Self> {
        if k == 0 || k >= dim {
            return Err(MeasureError::InvalidParams(format!(
                "need 1 <= k < d, got k={k}, d={dim}"
            )));
        }
        if v_basis.len() != dim - k {
            return Err(MeasureError::InvalidParams(format!(
                "plane basis must have {} vectors, got {}",
                dim - k,
                v_basis.len()
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(MeasureError::InvalidParams(format!(
                "cone opening must lie in (0,1], got {alpha}"
            )));
        }
        check_orthonormal(&v_basis, dim)?;
        if (norm(theta, dim) - 1.0).abs() > 1e-12 {
            return Err(MeasureError::InvalidParams(
                "theta must be a unit vector".into(),
            ));
        }
        Ok(ConeSpec {
            dim,
            k,
            v_basis,
            theta,
            alpha,
        })
    }

    /// The region X(x,r,V,alpha) \ H(x,theta,alpha) as a cell classifier.
    pub fn region(&self, center: Point, r: f64) -> ConeRegion {
        let mut proj = [[0.0_f64; 3]; 3];
        for (i, row) in proj.iter_mut().enumerate().take(self.dim) {
            row[i] = 1.0;
            for b in &self.v_basis {
                for (j, cell) in row.iter_mut().enumerate().take(self.dim) {
                    *cell -= b[i] * b[j];
                }
            }
        }
        ConeRegion {
            center,
            r,
            proj_perp: proj,
            theta: self.theta,
            alpha: self.alpha,
            dim: self.dim,
        }
    }
}

/// One (V, theta) pair of a direction net; alpha is supplied per query.
#[derive(Debug, Clone)]
pub struct DirectionPair {
    pub v_basis: Vec<Point>,
    pub theta: Point,
}

/// A finite net over G(d, d-k) x S^{d-1} approximating the infimum in the
/// cone-mass definition.
#[derive(Debug, Clone)]
pub struct DirectionNet {
    pub dim: usize,
    pub k: usize,
    pub eta: f64,
    pub pairs: Vec<DirectionPair>,
}

impl DirectionNet {
    /// Product net of two angles for d=2, k=1: `n_v` lines through the
    /// origin and `n_theta` unit directions.
    pub fn planar(n_v: usize, n_theta: usize) -> Result<Self> {
        if n_v == 0 || n_theta == 0 {
            return Err(MeasureError::InvalidParams("empty direction net".into()));
        }
        let mut pairs = Vec::with_capacity(n_v * n_theta);
        for i in 0..n_v {
            let phi = std::f64::consts::PI * i as f64 / n_v as f64;
            let v = [phi.cos(), phi.sin(), 0.0];
            for j in 0..n_theta {
                let psi = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                pairs.push(DirectionPair {
                    v_basis: vec![v],
                    theta: [psi.cos(), psi.sin(), 0.0],
                });
            }
        }
        Ok(DirectionNet {
            dim: 2,
            k: 1,
            eta: std::f64::consts::PI / n_v.min(n_theta) as f64,
            pairs,
        })
    }

    /// Planar net restricted to theta in V (both orientations per line).
    pub fn planar_theta_in_v(n_v: usize) -> Result<Self> {
        if n_v == 0 {
            return Err(MeasureError::InvalidParams("empty direction net".into()));
        }
        let mut pairs = Vec::with_capacity(2 * n_v);
        for i in 0..n_v {
            let phi = std::f64::consts::PI * i as f64 / n_v as f64;
            let v = [phi.cos(), phi.sin(), 0.0];
            for sign in [1.0, -1.0] {
                pairs.push(DirectionPair {
                    v_basis: vec![v],
                    theta: [sign * v[0], sign * v[1], 0.0],
                });
            }
        }
        Ok(DirectionNet {
            dim: 2,
            k: 1,
            eta: std::f64::consts::PI / n_v as f64,
            pairs,
        })
    }

    /// Net for d=3 built from spiral points on the sphere; for k=1 the
    /// planes are normal to the spiral directions with theta running over a
    /// ring in each plane, for k=2 the lines are the spiral directions with
    /// theta along them.
    pub fn spatial(k: usize, n_v: usize, n_theta: usize) -> Result<Self> {
        if n_v == 0 || n_theta == 0 {
            return Err(MeasureError::InvalidParams("empty direction net".into()));
        }
        if k != 1 && k != 2 {
            return Err(MeasureError::InvalidParams(format!(
                "d=3 net needs k in {{1,2}}, got {k}"
            )));
        }
        let dirs = fibonacci_half_sphere(n_v);
        let mut pairs = Vec::new();
        for u in &dirs {
            let (a, b) = orthonormal_complement(u);
            match k {
                1 => {
                    // V = plane normal to u, spanned by (a, b)
                    for j in 0..n_theta {
                        let psi = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
                        let mut theta = ORIGIN;
                        for i in 0..3 {
                            theta[i] = psi.cos() * a[i] + psi.sin() * b[i];
                        }
                        pairs.push(DirectionPair {
                            v_basis: vec![a, b],
                            theta,
                        });
                    }
                }
                _ => {
                    // V = line along u
                    for sign in [1.0, -1.0] {
                        pairs.push(DirectionPair {
                            v_basis: vec![*u],
                            theta: [sign * u[0], sign * u[1], sign * u[2]],
                        });
                    }
                }
            }
        }
        Ok(DirectionNet {
            dim: 3,
            k,
            eta: (4.0 / n_v as f64).sqrt(),
            pairs,
        })
    }

    pub fn cone(&self, pair: &DirectionPair, alpha: f64) -> Result<ConeSpec> {
        ConeSpec::new(
            self.dim,
            self.k,
            pair.v_basis.clone(),
            pair.theta,
            alpha,
        )
    }
}

fn fibonacci_half_sphere(n: usize) -> Vec<Point> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            // upper half-sphere is enough: planes and lines are unoriented
            let z = (i as f64 + 0.5) / n as f64; // in (0,1)
            let rho = (1.0 - z * z).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

fn orthonormal_complement(u: &Point) -> (Point, Point) {
    let pick = if u[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let d = dot(*u, pick, 3);
    let mut a = [pick[0] - d * u[0], pick[1] - d * u[1], pick[2] - d * u[2]];
    let na = norm(a, 3);
    for c in &mut a {
        *c /= na;
    }
    let b = [
        u[1] * a[2] - u[2] * a[1],
        u[2] * a[0] - u[0] * a[2],
        u[0] * a[1] - u[1] * a[0],
    ];
    (a, b)
}

/// Monte Carlo estimate of the normalized volume of X(0,1,V,alpha) minus
/// H(0,theta,alpha) at the minimizing configuration theta in V. Returns
/// (estimate, standard error). Deterministic given the seed.
pub fn cone_constant(d: usize, k: usize, alpha: f64, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    cone_constant_rotated(d, k, alpha, n_samples, seed, None)
}

/// As `cone_constant` with the whole configuration rotated by an
/// orthogonal matrix (rows), for invariance checks.
pub fn cone_constant_rotated(
    d: usize,
    k: usize,
    alpha: f64,
    n_samples: usize,
    seed: u64,
    rotation: Option<&[Vec<f64>]>,
) -> Result<(f64, f64)> {
    if d < 2 || k == 0 || k >= d {
        return Err(MeasureError::InvalidParams(format!(
            "need d >= 2 and 1 <= k < d, got d={d}, k={k}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MeasureError::InvalidParams(format!(
            "cone opening must lie in (0,1], got {alpha}"
        )));
    }
    if n_samples == 0 {
        return Err(MeasureError::InvalidParams("need samples".into()));
    }
    if let Some(rot) = rotation {
        if rot.len() != d || rot.iter().any(|row| row.len() != d) {
            return Err(MeasureError::InvalidParams(
                "rotation matrix shape mismatch".into(),
            ));
        }
    }
    const CHUNK: usize = 1 << 14;
    let chunks = n_samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15) ^ c as u64);
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n_samples);
            let mut y = vec![0.0_f64; d];
            let mut w = vec![0.0_f64; d];
            let mut count = 0u64;
            for _ in lo..hi {
                sample_unit_ball(&mut rng, &mut y);
                let z: &[f64] = if let Some(rot) = rotation {
                    // rotate back: test the sample against rotated axes
                    for (i, row) in rot.iter().enumerate() {
                        w[i] = row.iter().zip(&y).map(|(a, b)| a * b).sum();
                    }
                    &w
                } else {
                    &y
                };
                // V = span of the last d-k axes, theta = last axis (in V)
                let n2: f64 = z.iter().map(|v| v * v).sum();
                let n = n2.sqrt();
                let perp2: f64 = z[..k].iter().map(|v| v * v).sum();
                if perp2.sqrt() < alpha * n && z[d - 1] < alpha * n {
                    count += 1;
                }
            }
            count
        })
        .sum();
    let p = hits as f64 / n_samples as f64;
    let se = (p * (1.0 - p) / n_samples as f64).sqrt();
    Ok((p, se))
}

fn sample_unit_ball(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let d = out.len();
    loop {
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            // Box-Muller pair would be faster; clarity wins here
            let u1: f64 = rng.gen_range(1e-300..1.0);
            let u2: f64 = rng.gen::<f64>();
            *v = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            n2 += *v * *v;
        }
        if n2 > 0.0 {
            let scale = rng.gen::<f64>().powf(1.0 / d as f64) / n2.sqrt();
            for v in out.iter_mut() {
                *v *= scale;
            }
            return;
        }
    }
}

/// A uniformly random rotation matrix (rows) from Gram-Schmidt on a
/// Gaussian sample; deterministic given the seed.
pub fn random_rotation(d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    while rows.len() < d {
        let mut v: Vec<f64> = (0..d)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-300..1.0);
                let u2: f64 = rng.gen::<f64>();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        for prev in &rows {
            let d0: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= d0 * p;
            }
        }
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            for x in &mut v {
                *x /= n;
            }
            rows.push(v);
        }
    }
    rows
}

/// Enclosure of mu(X(x,r,V,a) \ H(x,theta,a)) / mu(B(x,r)).
pub fn cone_mass_ratio(
    mu: &Measure,
    x: Point,
    r: f64,
    cone: &ConeSpec,
    depth: u32,
) -> Result<MassInterval> {
    let den = mu.ball_mass(x, r, depth)?;
    if den.high <= 0.0 {
        return Err(MeasureError::ZeroMass);
    }
    let num = mu.region_mass(&cone.region(x, r), depth);
    Ok(num.ratio(&den))
}

/// Minimum of `cone_mass_ratio` over a net, with the index of the
/// minimizing pair. Low side is the minimum of interval lows.
pub fn min_cone_mass_ratio(
    mu: &Measure,
    x: Point,
    r: f64,
    alpha: f64,
    net: &DirectionNet,
    depth: u32,
) -> Result<(MassInterval, usize)> {
    let den = mu.ball_mass(x, r, depth)?;
    if den.high <= 0.0 {
        return Err(MeasureError::ZeroMass);
    }
    let ratios: Vec<MassInterval> = net
        .pairs
        .par_iter()
        .map(|pair| {
            let cone = net.cone(pair, alpha)?;
            Ok(mu.region_mass(&cone.region(x, r), depth).ratio(&den))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    let (mut low, mut high) = (f64::INFINITY, f64::INFINITY);
    for (i, v) in ratios.iter().enumerate() {
        if v.low < low {
            low = v.low;
            best = i;
        }
        high = high.min(v.high);
    }
    Ok((MassInterval::new(low, low.max(high.min(ratios[best].high)), depth), best))
}

/// Fraction of grid times t in [0,T] at which every net cone holds more
/// than an eps-share of the ball mass at scale e^{-t} (lower bounds the
/// conical-density scale fraction).
#[allow(clippy::too_many_arguments)]
pub fn cone_scale_fraction(
    mu: &Measure,
    x: Point,
    t_total: f64,
    alpha: f64,
    eps: f64,
    net: &DirectionNet,
    dt: f64,
    extra_levels: Option<u32>,
) -> Result<f64> {
    if net.dim != mu.ambient_dim() {
        return Err(MeasureError::InvalidParams(format!(
            "net dimension {} does not match the measure ({})",
            net.dim,
            mu.ambient_dim()
        )));
    }
    let extra = extra_levels.unwrap_or_else(|| default_extra_levels(mu.ambient_dim()));
    let scan = crate::scenery::scenery_statistics(
        mu,
        x,
        t_total,
        dt,
        &crate::scenery::ScanOptions {
            width_tol: f64::INFINITY,
            extra_levels: Some(extra),
        },
        |_| Ok(MassInterval::exact(0.0, 0)),
        |view| {
            let depth = view.depth_for(1.0);
            // every pair must clear eps; stop at the first that cannot
            for pair in &net.pairs {
                let cone = net.cone(pair, alpha)?;
                let num = view.base.region_mass(&cone.region(view.x, view.r), depth);
                if num.low / view.norm.high <= eps {
                    return Ok(false);
                }
            }
            Ok(true)
        },
    )?;
    Ok(scan.hit_fraction)
}

/// Pairwise cone-emptiness check behind the rectifiability lemma: true iff
/// no point of `points` sees another inside X(x,r,V,a) \ H(x,theta,a).
/// On failure returns the first witness pair (by index order).
pub fn rectifiability_criterion(
    points: &[Point],
    cone: &ConeSpec,
    r: f64,
) -> Result<(bool, Option<(usize, usize)>)> {
    if points.len() > 100_000 {
        return Err(MeasureError::InvalidParams(format!(
            "pairwise check capped at 1e5 points, got {}",
            points.len()
        )));
    }
    let hit = (0..points.len())
        .into_par_iter()
        .filter_map(|i| {
            let region = cone.region(points[i], r);
            points
                .iter()
                .enumerate()
                .position(|(j, y)| j != i && region.contains_point(y))
                .map(|j| (i, j))
        })
        .min();
    Ok((hit.is_none(), hit))
}

/// Maximum over the given scales of mu(B(x,2r)) / mu(B(x,r)) midpoints.
pub fn doubling_scan(mu: &Measure, x: Point, scales: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &r in scales {
        let outer = mu.ball_mass(x, 2.0 * r, mu.depth_for_scale(r, default_extra_levels(mu.ambient_dim())))?;
        let inner = mu.ball_mass(x, r, mu.depth_for_scale(r, default_extra_levels(mu.ambient_dim())))?;
        if inner.high <= 0.0 || inner.mid() <= 0.0 {
            return Err(MeasureError::ZeroMass);
        }
        worst = worst.max(outer.mid() / inner.mid());
    }
    Ok(worst)
}
