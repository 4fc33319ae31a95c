//! Pore detection: classical porosity (empty-ish holes inside a ball),
//! mean porosity (fraction of scales carrying a pore), and annular
//! porosity (holes centered in an annulus, no containment requirement).
//!
//! A hole "fires" only when the enclosure's upper mass bound is at most
//! eps times the lower bound of the surrounding ball mass, so every
//! reported pore is sound.

use crate::error::{MeasureError, Result};
use crate::geom::{norm, Point};
use crate::interval::MassInterval;
use crate::measure::Measure;
use crate::scenery::{default_extra_levels, scenery_statistics, ScanOptions};

/// Binary-search resolution on the relative pore radius.
pub const ALPHA_TOL: f64 = 1.0 / 1024.0;

const REFINE_ROUNDS: u32 = 4;

/// The best pore found at one (x, r): hole center, relative radius, the
/// threshold and scale used, and the hole-mass enclosure.
#[derive(Debug, Clone)]
pub struct PoreWitness {
    pub y: Point,
    pub alpha_hat: f64,
    pub eps: f64,
    pub r: f64,
    pub hole_mass: MassInterval,
}

/// Annular porosity parameters: holes live in A(x, c r, r), c = 1/(1+rho),
/// with radius alpha * rho * |x - y|.
#[derive(Debug, Clone, Copy)]
pub struct AnnularSpec {
    pub rho: f64,
}

impl AnnularSpec {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(MeasureError::InvalidParams(format!(
                "annulus parameter must lie in (0,1], got {rho}"
            )));
        }
        Ok(AnnularSpec { rho })
    }

    /// Inner annulus radius as a fraction of r.
    pub fn c(&self) -> f64 {
        1.0 / (1.0 + self.rho)
    }
}

enum Mode {
    Classical,
    Annular(AnnularSpec),
}

struct Search<'a> {
    mu: &'a Measure,
    x: Point,
    r: f64,
    threshold: f64,
    depth: u32,
    extra: u32,
    mode: Mode,
}

impl Search<'_> {
    fn dim(&self) -> usize {
        self.mu.ambient_dim()
    }

    /// Largest admissible relative radius at center distance `dist`.
    fn alpha_cap(&self, dist: f64) -> f64 {
        match &self.mode {
            Mode::Classical => (1.0 - dist / self.r).clamp(0.0, 0.5),
            Mode::Annular(spec) => {
                let c = spec.c() * self.r;
                if dist + 1e-12 < c || dist > self.r + 1e-12 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn hole_radius(&self, alpha: f64, dist: f64) -> f64 {
        match &self.mode {
            Mode::Classical => alpha * self.r,
            Mode::Annular(spec) => alpha * spec.rho * dist,
        }
    }

    fn hole_mass(&self, y: Point, hole_r: f64) -> MassInterval {
        if hole_r <= 0.0 {
            return MassInterval::exact(0.0, self.depth);
        }
        let depth = self
            .depth
            .max(self.mu.depth_for_scale(hole_r, self.extra));
        self.mu.ball_mass_unchecked(y, hole_r, depth)
    }

    fn fires(&self, y: Point, hole_r: f64) -> Option<MassInterval> {
        let m = self.hole_mass(y, hole_r);
        (m.high <= self.threshold).then_some(m)
    }

    /// Try one candidate center; update the incumbent if it can be beaten.
    fn consider(&self, y: Point, best: &mut PoreWitness) {
        let mut d = y;
        for (i, v) in d.iter_mut().enumerate().take(self.dim()) {
            *v -= self.x[i];
        }
        let dist = norm(d, self.dim());
        let cap = self.alpha_cap(dist);
        let mut lo = best.alpha_hat + ALPHA_TOL;
        if cap <= lo {
            return;
        }
        let Some(mut mass) = self.fires(y, self.hole_radius(lo, dist)) else {
            return;
        };
        if let Some(m) = self.fires(y, self.hole_radius(cap, dist)) {
            *best = PoreWitness {
                y,
                alpha_hat: cap,
                eps: best.eps,
                r: self.r,
                hole_mass: m,
            };
            return;
        }
        let mut hi = cap;
        while hi - lo > ALPHA_TOL {
            let mid = 0.5 * (lo + hi);
            match self.fires(y, self.hole_radius(mid, dist)) {
                Some(m) => {
                    lo = mid;
                    mass = m;
                }
                None => hi = mid,
            }
        }
        *best = PoreWitness {
            y,
            alpha_hat: lo,
            eps: best.eps,
            r: self.r,
            hole_mass: mass,
        };
    }

    /// Scan a cube grid of centers around `center` with spacing `h`,
    /// `steps` cells out per axis and direction.
    fn scan_grid(
        &self,
        center: Point,
        h: f64,
        steps: i64,
        best: &mut PoreWitness,
        stop_at: Option<f64>,
    ) {
        let dim = self.dim();
        let mut idx = [-steps; 3];
        'outer: loop {
            let mut y = center;
            for i in 0..dim {
                y[i] += idx[i] as f64 * h;
            }
            self.consider(y, best);
            if let Some(t) = stop_at {
                if best.alpha_hat >= t {
                    return;
                }
            }
            for v in idx.iter_mut().take(dim) {
                *v += 1;
                if *v <= steps {
                    continue 'outer;
                }
                *v = -steps;
            }
            return;
        }
    }

    fn run(&self, grid_res: u32, stop_at: Option<f64>) -> PoreWitness {
        let mut best = PoreWitness {
            y: self.x,
            alpha_hat: 0.0,
            eps: 0.0,
            r: self.r,
            hole_mass: MassInterval::exact(0.0, self.depth),
        };
        let h = self.r / grid_res as f64;
        self.scan_grid(self.x, h, grid_res as i64, &mut best, stop_at);
        if let Some(t) = stop_at {
            if best.alpha_hat >= t {
                return best;
            }
        }
        // pore centers of dyadic constructions sit between grid points;
        // halve the spacing around the incumbent a few times
        for round in 1..=REFINE_ROUNDS {
            if best.alpha_hat <= 0.0 {
                break;
            }
            let hh = h / 2.0_f64.powi(round as i32);
            self.scan_grid(best.y, hh, 2, &mut best, stop_at);
            if let Some(t) = stop_at {
                if best.alpha_hat >= t {
                    return best;
                }
            }
        }
        best
    }
}

/// Largest relative hole radius alpha such that some ball B(y, alpha r)
/// inside B(x, r) has mass enclosure high <= eps * (ball-mass low).
/// Centers are searched on a grid of spacing r/grid_res with local
/// refinement; alpha by binary search to `ALPHA_TOL`.
pub fn pore_search(
    mu: &Measure,
    x: Point,
    r: f64,
    eps: f64,
    grid_res: u32,
    depth: u32,
) -> Result<PoreWitness> {
    search_impl(mu, x, r, eps, grid_res, depth, Mode::Classical, None)
}

/// As `pore_search` with hole centers confined to the annulus
/// A(x, c r, r) and hole radius alpha * rho * |x-y|; alpha ranges in [0,1]
/// and holes need not stay inside B(x, r).
pub fn annular_pore_search(
    mu: &Measure,
    x: Point,
    r: f64,
    spec: AnnularSpec,
    eps: f64,
    grid_res: u32,
    depth: u32,
) -> Result<PoreWitness> {
    search_impl(mu, x, r, eps, grid_res, depth, Mode::Annular(spec), None)
}

#[allow(clippy::too_many_arguments)]
fn search_impl(
    mu: &Measure,
    x: Point,
    r: f64,
    eps: f64,
    grid_res: u32,
    depth: u32,
    mode: Mode,
    stop_at: Option<f64>,
) -> Result<PoreWitness> {
    if eps < 0.0 {
        return Err(MeasureError::InvalidParams(format!(
            "pore threshold must be nonnegative, got {eps}"
        )));
    }
    if grid_res < 8 {
        return Err(MeasureError::InvalidParams(format!(
            "grid resolution must be at least 8, got {grid_res}"
        )));
    }
    let ball = mu.ball_mass(x, r, depth)?;
    if ball.high <= 0.0 {
        return Err(MeasureError::ZeroMass);
    }
    let search = Search {
        mu,
        x,
        r,
        threshold: eps * ball.low,
        depth,
        extra: default_extra_levels(mu.ambient_dim()),
        mode,
    };
    let mut w = search.run(grid_res, stop_at);
    w.eps = eps;
    Ok(w)
}

/// Fraction of grid times t_j = j dt in [0,T] at which the measure has a
/// pore of relative radius at least `alpha` at scale e^{-t_j}.
#[allow(clippy::too_many_arguments)]
pub fn porosity_scale_fraction(
    mu: &Measure,
    x: Point,
    t_total: f64,
    alpha: f64,
    eps: f64,
    dt: f64,
    grid_res: u32,
    depth_extra: Option<u32>,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(MeasureError::InvalidParams(format!(
            "mean-porosity radius must lie in (0, 1/2], got {alpha}"
        )));
    }
    let extra = depth_extra.unwrap_or_else(|| default_extra_levels(mu.ambient_dim()));
    let scan = scenery_statistics(
        mu,
        x,
        t_total,
        dt,
        &ScanOptions {
            width_tol: f64::INFINITY,
            extra_levels: Some(extra),
        },
        |_| Ok(MassInterval::exact(0.0, 0)),
        |view| {
            let depth = view.depth_for(1.0);
            let w = search_impl(
                view.base,
                view.x,
                view.r,
                eps,
                grid_res,
                depth,
                Mode::Classical,
                Some(alpha),
            )?;
            Ok(w.alpha_hat >= alpha)
        },
    )?;
    Ok(scan.hit_fraction)
}
