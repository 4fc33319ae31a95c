//! Low-level geometric primitives shared by the mass-tree engine and the
//! analysis modules: point/box arithmetic, ball volumes and intersections,
//! and deterministic summation helpers.

use std::f64::consts::PI;

/// Points live in at most three ambient dimensions; unused coordinates are 0.
pub const MAX_DIM: usize = 3;

pub type Point = [f64; MAX_DIM];

pub const ORIGIN: Point = [0.0; MAX_DIM];

pub fn point_from(coords: &[f64]) -> Point {
    let mut p = ORIGIN;
    for (i, &c) in coords.iter().take(MAX_DIM).enumerate() {
        p[i] = c;
    }
    p
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point, b: Point, dim: usize) -> f64 {
    (0..dim).map(|i| a[i] * b[i]).sum()
}

pub fn norm(a: Point, dim: usize) -> f64 {
    dot(a, a, dim).sqrt()
}

/// Squared distance from `p` to the closest point of the box `[lo, hi]`.
pub fn box_min_dist_sq(lo: &Point, hi: &Point, p: &Point, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        let d = if p[i] < lo[i] {
            lo[i] - p[i]
        } else if p[i] > hi[i] {
            p[i] - hi[i]
        } else {
            0.0
        };
        s += d * d;
    }
    s
}

/// Squared distance from `p` to the farthest point of the box `[lo, hi]`.
pub fn box_max_dist_sq(lo: &Point, hi: &Point, p: &Point, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        let d = (p[i] - lo[i]).abs().max((hi[i] - p[i]).abs());
        s += d * d;
    }
    s
}

/// Volume of the unit ball in `d` dimensions, d in {1,2,3}.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unit_ball_volume: unsupported dimension {d}"),
    }
}

/// Volume of the intersection of two balls of radii `r1`, `r2` whose centers
/// are `dist` apart, in dimension `d` in {1,2,3}. Closed forms throughout.
pub fn ball_overlap_volume(d: usize, dist: f64, r1: f64, r2: f64) -> f64 {
    if dist >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    if dist <= (r1 - r2).abs() {
        return unit_ball_volume(d) * rmin.powi(d as i32);
    }
    match d {
        1 => {
            let lo = (-r1).max(dist - r2);
            let hi = r1.min(dist + r2);
            (hi - lo).max(0.0)
        }
        2 => {
            let d2 = dist * dist;
            let a1 = ((d2 + r1 * r1 - r2 * r2) / (2.0 * dist * r1)).clamp(-1.0, 1.0);
            let a2 = ((d2 + r2 * r2 - r1 * r1) / (2.0 * dist * r2)).clamp(-1.0, 1.0);
            let tri = 0.5
                * ((-dist + r1 + r2)
                    * (dist + r1 - r2)
                    * (dist - r1 + r2)
                    * (dist + r1 + r2))
                    .max(0.0)
                    .sqrt();
            r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - tri
        }
        3 => {
            let s = r1 + r2 - dist;
            PI * s * s * (dist * dist + 2.0 * dist * (r1 + r2) - 3.0 * (r1 - r2) * (r1 - r2))
                / (12.0 * dist)
        }
        _ => panic!("ball_overlap_volume: unsupported dimension {d}"),
    }
}

/// Antiderivative of sqrt(R^2 - x^2), valid for |x| <= R.
fn circ_prim(x: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
}

/// Area of the disk of radius `r` centered at the origin intersected with the
/// lower-left quadrant {X <= x, Y <= y}. Exact (piecewise closed form).
fn disk_corner_area(x: f64, y: f64, r: f64) -> f64 {
    if x <= -r || y <= -r {
        return 0.0;
    }
    let x = x.min(r);
    if y >= r {
        // full chords up to x
        return 2.0 * (circ_prim(x, r) - circ_prim(-r, r));
    }
    // Integrate L(X) = max(0, min(y, s) + s) with s = sqrt(r^2 - X^2).
    // Breakpoints where s = |y|: X = ±sqrt(r^2 - y^2).
    let xb = (r * r - y * y).max(0.0).sqrt();
    let mut area = 0.0;
    if y >= 0.0 {
        // |X| <= xb: s >= y, L = y + s ; xb <= |X| <= r: s <= y, L = 2 s.
        let lo = (-r).max(-xb).min(x);
        // region X in [-r, -xb): L = 2 s
        let hi1 = x.min(-xb);
        if hi1 > -r {
            area += 2.0 * (circ_prim(hi1, r) - circ_prim(-r, r));
        }
        // region X in [-xb, min(x, xb)]: L = y + s
        let hi2 = x.min(xb);
        if hi2 > lo {
            area += y * (hi2 - lo) + (circ_prim(hi2, r) - circ_prim(lo, r));
        }
        // region X in (xb, x]: L = 2 s
        if x > xb {
            area += 2.0 * (circ_prim(x, r) - circ_prim(xb, r));
        }
    } else {
        // y < 0: L = 0 outside |X| <= xb, else y + s.
        let lo = -xb;
        let hi = x.min(xb);
        if hi > lo {
            area += y * (hi - lo) + (circ_prim(hi, r) - circ_prim(lo, r));
        }
    }
    area
}

/// Exact area of the disk of radius `r` (center origin) intersected with the
/// axis-aligned rectangle [x0,x1] x [y0,y1].
pub fn disk_rect_area(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if x0 >= x1 || y0 >= y1 {
        return 0.0;
    }
    let a = disk_corner_area(x1, y1, r) - disk_corner_area(x0, y1, r) - disk_corner_area(x1, y0, r)
        + disk_corner_area(x0, y0, r);
    a.max(0.0)
}

/// Volume of the ball of radius `r` (center origin) intersected with the box
/// [lo, hi] in three dimensions. Adaptive Simpson along z over exact slice
/// areas; tolerance ~1e-10 absolute.
pub fn sphere_box_volume(r: f64, lo: &Point, hi: &Point) -> f64 {
    let z0 = lo[2].max(-r);
    let z1 = hi[2].min(r);
    if z0 >= z1 {
        return 0.0;
    }
    let slice = |z: f64| {
        let rr = (r * r - z * z).max(0.0).sqrt();
        disk_rect_area(rr, lo[0], hi[0], lo[1], hi[1])
    };
    adaptive_simpson(&slice, z0, z1, 1e-11, 24)
}

fn simpson(f0: f64, fm: f64, f1: f64, h: f64) -> f64 {
    h / 6.0 * (f0 + 4.0 * fm + f1)
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Sum with the addends sorted by magnitude, smallest first. Deterministic
/// regardless of the order contributions were collected in.
pub fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let mut acc = 0.0;
    for v in values.iter() {
        acc += v;
    }
    acc
}

/// Order-independent pairwise summation of an indexed slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Least-squares slope of y against x; returns (slope, intercept, rms residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (slope * x + intercept);
        ss += e * e;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Empirical quantile by linear interpolation on the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn ball_overlap_matches_monte_carlo_2d() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for &(dist, r1, r2) in &[(0.5, 1.0, 0.7), (1.2, 1.0, 0.5), (0.1, 0.3, 1.0)] {
            let exact = ball_overlap_volume(2, dist, r1, r2);
            let n = 400_000;
            let mut hits = 0u64;
            for _ in 0..n {
                let x = rng.gen_range(-r1..r1);
                let y = rng.gen_range(-r1..r1);
                if x * x + y * y <= r1 * r1
                    && (x - dist) * (x - dist) + y * y <= r2 * r2
                {
                    hits += 1;
                }
            }
            let mc = hits as f64 / n as f64 * 4.0 * r1 * r1;
            assert!((exact - mc).abs() < 0.02, "dist={dist}: {exact} vs {mc}");
        }
    }

    #[test]
    fn disk_rect_area_basic() {
        // full disk
        let a = disk_rect_area(1.0, -2.0, 2.0, -2.0, 2.0);
        assert!((a - PI).abs() < 1e-12);
        // half disk
        let a = disk_rect_area(1.0, 0.0, 2.0, -2.0, 2.0);
        assert!((a - PI / 2.0).abs() < 1e-12);
        // quarter disk
        let a = disk_rect_area(1.0, 0.0, 2.0, 0.0, 2.0);
        assert!((a - PI / 4.0).abs() < 1e-12);
        // disjoint
        assert_eq!(disk_rect_area(1.0, 1.5, 2.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn disk_rect_area_matches_monte_carlo() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for &(x0, x1, y0, y1) in &[
            (-0.8, 0.3, -0.2, 0.9),
            (0.1, 0.7, -0.9, -0.1),
            (-1.5, -0.2, -0.4, 0.4),
        ] {
            let exact = disk_rect_area(1.0, x0, x1, y0, y1);
            let n = 400_000;
            let mut hits = 0u64;
            for _ in 0..n {
                let x = rng.gen_range(x0..x1);
                let y = rng.gen_range(y0..y1);
                if x * x + y * y <= 1.0 {
                    hits += 1;
                }
            }
            let mc = hits as f64 / n as f64 * (x1 - x0) * (y1 - y0);
            assert!((exact - mc).abs() < 0.01, "{exact} vs {mc}");
        }
    }

    #[test]
    fn sphere_box_volume_octant() {
        let v = sphere_box_volume(1.0, &[0.0, 0.0, 0.0], &[2.0, 2.0, 2.0]);
        assert!((v - 4.0 * PI / 3.0 / 8.0).abs() < 1e-8);
        let v = sphere_box_volume(1.0, &[-2.0, -2.0, -2.0], &[2.0, 2.0, 2.0]);
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn fit_recovers_slope() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (s, b, r) = linear_fit(&xs, &ys);
        assert!((s - 3.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && r < 1e-12);
    }
}
