//! Dimension estimators: local dimensions by log-log regression, sampled
//! Hausdorff/packing spectra, the scenery-average dimension, the scale
//! integral F, Ahlfors-regularity density scans, and box counting.

use crate::error::{MeasureError, Result};
use crate::geom::{linear_fit, quantile, Point, ORIGIN};
use crate::interval::MassInterval;
use crate::measure::Measure;
use crate::scenery::{default_extra_levels, scenery_statistics, ScanOptions};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Regression,
    Quantile,
    SceneryAverage,
    ClosedForm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Regression => "regression",
            Method::Quantile => "quantile",
            Method::SceneryAverage => "scenery_average",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DimensionEstimate {
    pub value: f64,
    pub residual: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub method: Method,
}

/// Central slope plus windowed lower/upper surrogates at one point.
#[derive(Debug, Clone)]
pub struct LocalDimension {
    pub central: DimensionEstimate,
    pub lower: DimensionEstimate,
    pub upper: DimensionEstimate,
}

/// Default regression scale range and resolution.
pub const DEFAULT_R_MIN: f64 = 3.725290298461914e-9; // 2^-28
pub const DEFAULT_R_MAX: f64 = 0.0625;
pub const DEFAULT_N_SCALES: usize = 24;

/// Least-squares slope of log mu(B(x,r)) against log r over log-equispaced
/// scales; windowed slopes give lower/upper local dimension surrogates.
pub fn local_dimension(
    mu: &Measure,
    x: Point,
    r_min: f64,
    r_max: f64,
    n_scales: usize,
) -> Result<LocalDimension> {
    if n_scales < 8 {
        return Err(MeasureError::InvalidParams(format!(
            "need at least 8 scales, got {n_scales}"
        )));
    }
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(MeasureError::InvalidParams(format!(
            "bad scale range [{r_min}, {r_max}]"
        )));
    }
    let extra = default_extra_levels(mu.ambient_dim());
    let log_lo = r_min.ln();
    let log_hi = r_max.ln();
    let mut xs = Vec::with_capacity(n_scales);
    let mut ys = Vec::with_capacity(n_scales);
    let mut wide = 0usize;
    for i in 0..n_scales {
        let lr = log_lo + (log_hi - log_lo) * i as f64 / (n_scales - 1) as f64;
        let r = lr.exp();
        let m = mu.ball_mass(x, r, mu.depth_for_scale(r, extra))?;
        let mid = m.mid();
        if mid <= 0.0 {
            return Err(MeasureError::ZeroMass);
        }
        if m.width() > 0.5 * mid {
            wide += 1;
        }
        xs.push(lr);
        ys.push(mid.ln());
    }
    if 2 * wide > n_scales {
        return Err(MeasureError::PrecisionLoss {
            width: wide as f64 / n_scales as f64,
            tol: 0.5,
        });
    }
    let (slope, _, residual) = linear_fit(&xs, &ys);
    let window = (2 * n_scales / 3).max(8).min(n_scales);
    let mut wmin = f64::INFINITY;
    let mut wmax = f64::NEG_INFINITY;
    for start in 0..=(n_scales - window) {
        let (s, _, _) = linear_fit(&xs[start..start + window], &ys[start..start + window]);
        wmin = wmin.min(s);
        wmax = wmax.max(s);
    }
    let mk = |value: f64, method| DimensionEstimate {
        value,
        residual,
        r_min,
        r_max,
        method,
    };
    Ok(LocalDimension {
        central: mk(slope, Method::Regression),
        lower: mk(wmin, Method::Regression),
        upper: mk(wmax, Method::Regression),
    })
}

/// The four sampled dimension surrogates: essential inf/sup of the lower
/// and upper local dimensions, realized as 1% / 99% quantiles over
/// mu-sampled points.
#[derive(Debug, Clone)]
pub struct DimensionSpectrum {
    pub hausdorff_lower: DimensionEstimate,
    pub hausdorff_upper: DimensionEstimate,
    pub packing_lower: DimensionEstimate,
    pub packing_upper: DimensionEstimate,
}

pub fn dimension_spectrum(
    mu: &Measure,
    n_points: usize,
    seed: u64,
    r_min: f64,
    r_max: f64,
    n_scales: usize,
) -> Result<DimensionSpectrum> {
    if n_points < 100 {
        return Err(MeasureError::InvalidParams(format!(
            "need at least 100 sample points, got {n_points}"
        )));
    }
    let points = mu.support_sample(n_points, seed);
    let locals: Vec<LocalDimension> = points
        .par_iter()
        .map(|x| local_dimension(mu, *x, r_min, r_max, n_scales))
        .collect::<Result<_>>()?;
    let mut lowers: Vec<f64> = locals.iter().map(|l| l.lower.value).collect();
    let mut uppers: Vec<f64> = locals.iter().map(|l| l.upper.value).collect();
    lowers.sort_by(f64::total_cmp);
    uppers.sort_by(f64::total_cmp);
    let residual = locals.iter().map(|l| l.central.residual).sum::<f64>() / locals.len() as f64;
    let mk = |value: f64| DimensionEstimate {
        value,
        residual,
        r_min,
        r_max,
        method: Method::Quantile,
    };
    Ok(DimensionSpectrum {
        hausdorff_lower: mk(quantile(&lowers, 0.01)),
        hausdorff_upper: mk(quantile(&lowers, 0.99)),
        packing_lower: mk(quantile(&uppers, 0.01)),
        packing_upper: mk(quantile(&uppers, 0.99)),
    })
}

/// Cesaro average along the scenery orbit of log nu(B(0,r)) / log r; the
/// empirical dimension of the distribution the orbit generates.
pub fn fd_dimension(
    mu: &Measure,
    x: Point,
    t_total: f64,
    r: f64,
    dt: f64,
) -> Result<DimensionEstimate> {
    if !(r > 0.0 && r < 1.0) {
        return Err(MeasureError::InvalidParams(format!(
            "reference radius must lie in (0,1), got {r}"
        )));
    }
    let log_r = r.ln();
    let scan = scenery_statistics(
        mu,
        x,
        t_total,
        dt,
        &ScanOptions {
            width_tol: f64::INFINITY,
            extra_levels: None,
        },
        |view| {
            let mass = view.ball(ORIGIN, r).mid();
            if mass <= 0.0 {
                return Err(MeasureError::ZeroMass);
            }
            Ok(MassInterval::exact(mass.ln() / log_r, 0))
        },
        |_| Ok(true),
    )?;
    let mean = scan.cesaro_mean;
    let var = scan
        .rows
        .iter()
        .map(|row| (row.value.mid() - mean).powi(2))
        .sum::<f64>()
        / scan.rows.len() as f64;
    Ok(DimensionEstimate {
        value: mean,
        residual: var.sqrt(),
        r_min: (-t_total).exp(),
        r_max: 1.0,
        method: Method::SceneryAverage,
    })
}

/// Midpoint quadrature of r -> log nu(B(0,r)) / log r over (0,1); the
/// returned pair is (value, error estimate from a half-resolution pass).
pub fn dim_functional_f(nu: &Measure, n_quad: usize) -> Result<(f64, f64)> {
    if n_quad < 8 {
        return Err(MeasureError::InvalidParams(format!(
            "need at least 8 quadrature nodes, got {n_quad}"
        )));
    }
    if !nu.origin_in_support() {
        return Err(MeasureError::OriginNotInSupport);
    }
    let fine = f_quadrature(nu, n_quad)?;
    let coarse = f_quadrature(nu, n_quad / 2)?;
    Ok((fine, (fine - coarse).abs()))
}

fn f_quadrature(nu: &Measure, n: usize) -> Result<f64> {
    let d = nu.ambient_dim() as f64;
    let extra = default_extra_levels(nu.ambient_dim());
    let parts: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = (i as f64 + 0.5) / n as f64;
            let m = nu
                .ball_mass_unchecked(ORIGIN, r, nu.depth_for_scale(r, extra))
                .mid();
            if m <= 0.0 {
                return Err(MeasureError::ZeroMass);
            }
            // the integrand is a dimension-like ratio; clamp stray
            // rounding at the r -> 1 endpoint where log r -> 0
            Ok((m.ln() / r.ln()).clamp(0.0, d))
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<f64>() / n as f64)
}

/// Min and max over scales of mu(B(x,r)) / r^k. A positive, finite pair
/// over many scales is the empirical Ahlfors-regularity certificate.
pub fn density_scan(mu: &Measure, x: Point, k: u32, scales: &[f64]) -> Result<(f64, f64)> {
    if scales.is_empty() {
        return Err(MeasureError::InvalidParams("no scales given".into()));
    }
    let extra = default_extra_levels(mu.ambient_dim());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &r in scales {
        let m = mu.ball_mass(x, r, mu.depth_for_scale(r, extra))?;
        if m.high <= 0.0 {
            return Err(MeasureError::ZeroMass);
        }
        let ratio = m.mid() / r.powi(k as i32);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

/// Box-counting estimate: slope of log(#positive-mass cells) against
/// log(1/cell size) over a depth range of the measure's own tree.
pub fn box_dimension(mu: &Measure, depth_min: u32, depth_max: u32) -> Result<DimensionEstimate> {
    if depth_min >= depth_max || depth_max > mu.max_depth() {
        return Err(MeasureError::InvalidParams(format!(
            "bad depth range [{depth_min}, {depth_max}] (max {})",
            mu.max_depth()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sizes = (f64::INFINITY, 0.0_f64);
    for depth in depth_min..=depth_max {
        let (n, mean_size) = mu.covering_count(depth);
        if n == 0 {
            return Err(MeasureError::ZeroMass);
        }
        sizes = (sizes.0.min(mean_size), sizes.1.max(mean_size));
        xs.push((1.0 / mean_size).ln());
        ys.push((n as f64).ln());
    }
    let (slope, _, residual) = linear_fit(&xs, &ys);
    Ok(DimensionEstimate {
        value: slope,
        residual,
        r_min: sizes.0,
        r_max: sizes.1,
        method: Method::Regression,
    })
}
