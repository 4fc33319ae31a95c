//! Command-line reports for the scenery-flow measure laboratory: builds
//! measures from JSON specs, runs the cone / porosity / dimension scans,
//! and writes deterministic JSON summaries plus plot-ready CSV data.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use scenery_core::cones::{
    cone_constant, cone_scale_fraction, DirectionNet,
};
use scenery_core::constructions::{
    cantor_salli, salli_dimension, splice_cone_extremal, splice_porosity_extremal,
};
use scenery_core::dimension::{
    box_dimension, dim_functional_f, dimension_spectrum, fd_dimension, local_dimension,
    DEFAULT_N_SCALES, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use scenery_core::geom::{point_from, Point};
use scenery_core::porosity::{annular_pore_search, porosity_scale_fraction, AnnularSpec};
use scenery_core::scenery::{default_extra_levels, DEFAULT_DT};
use scenery_core::spec::MeasureSpec;
use scenery_core::{Measure, MeasureError};

#[derive(Parser)]
#[command(name = "scenery-lab", version, about)]
struct Cli {
    /// Output directory for the report JSON and CSV data files.
    #[arg(long, global = true, default_value = "report")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a measure from a JSON spec and write its normalized form.
    BuildMeasure {
        /// Path to the measure spec JSON document.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Monte Carlo estimate of the minimal normalized cone volume.
    ConeConstant {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Fraction of magnification scales with mass in every net cone.
    ScanCones {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 24.953)]
        t_total: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 8)]
        n_v: usize,
        #[arg(long, default_value_t = 8)]
        n_theta: usize,
    },
    /// Fraction of magnification scales with a relative alpha-hole.
    ScanPorosity {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 24.953)]
        t_total: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 16)]
        grid_res: u32,
    },
    /// Largest annular hole radius at sampled points, one fixed scale.
    ScanAnnular {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.25)]
        r: f64,
        #[arg(long, default_value_t = 16)]
        grid_res: u32,
    },
    /// Log-log regression of ball mass at a point or sampled points.
    DimLocal {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated coordinates; samples from the measure if absent.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_R_MIN)]
        r_min: f64,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: f64,
        #[arg(long, default_value_t = DEFAULT_N_SCALES)]
        n_scales: usize,
    },
    /// Scenery-average dimension and the F functional at the origin.
    DimFd {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 24.953)]
        t_total: f64,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 256)]
        quad: usize,
    },
    /// Quantile spectrum of lower/upper local dimensions over samples.
    DimSpectrum {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_R_MIN)]
        r_min: f64,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: f64,
        #[arg(long, default_value_t = DEFAULT_N_SCALES)]
        n_scales: usize,
    },
    /// Range of mu(B(x,r)) / r^k across log-spaced scales.
    DensityScan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_R_MIN)]
        r_min: f64,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: f64,
        #[arg(long, default_value_t = DEFAULT_N_SCALES)]
        n_scales: usize,
    },
    /// Pairwise empty-cone test over sampled points and a direction net.
    CheckRectifiability {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 500)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 90)]
        n_v: usize,
        #[arg(long, default_value_t = 4)]
        n_theta: usize,
    },
    /// Spliced grid measure extremal for the cone or porosity bounds.
    BuildExtremal {
        #[arg(long, value_enum)]
        mode: ExtremalMode,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Target dimension (cone mode); exactly one of s / q.
        #[arg(long)]
        s: Option<f64>,
        /// Plane-level frequency (cone mode); exactly one of s / q.
        #[arg(long)]
        q: Option<f64>,
        /// Hole parameter (porosity mode).
        #[arg(long)]
        alpha: Option<f64>,
        /// Cantor-level frequency (porosity mode).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 40)]
        depth: u32,
    },
    /// Extremal two-map Cantor measure for a hole parameter alpha.
    Salli {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 12)]
        depth: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtremalMode {
    Cone,
    Porosity,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum ValueKind {
    Empirical,
    ClosedForm,
}

#[derive(Serialize)]
struct ReportValue {
    name: String,
    kind: ValueKind,
    value: f64,
    /// Error or tolerance; present on every empirical value.
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
}

impl ReportValue {
    fn empirical(name: &str, value: f64, error: f64) -> Self {
        ReportValue {
            name: name.into(),
            kind: ValueKind::Empirical,
            value,
            error: Some(error),
        }
    }
    fn closed_form(name: &str, value: f64) -> Self {
        ReportValue {
            name: name.into(),
            kind: ValueKind::ClosedForm,
            value,
            error: None,
        }
    }
}

#[derive(Serialize)]
struct Provenance {
    config_hash: String,
    seed: Option<u64>,
    depth: Option<u32>,
    tool_version: String,
}

#[derive(Serialize)]
struct Report {
    command: String,
    config: serde_json::Value,
    provenance: Provenance,
    values: Vec<ReportValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<serde_json::Value>,
    data_files: Vec<String>,
}

#[derive(Serialize)]
struct ErrorReport {
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    exit_code: i32,
    message: String,
}

/// Everything a command produces before anything touches the filesystem.
struct Outcome {
    values: Vec<ReportValue>,
    witness: Option<serde_json::Value>,
    seed: Option<u64>,
    depth: Option<u32>,
    data: Vec<(String, String)>,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SCENERY_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let body = ErrorReport {
                error: ErrorBody {
                    exit_code: code,
                    message: e.to_string(),
                },
            };
            eprintln!("{}", serde_json::to_string(&body).unwrap());
            ExitCode::from(code as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<(), MeasureError> {
    let config = config_value(&cli.command)?;
    let outcome = execute(&cli.command)?;
    write_report(&cli.out, command_name(&cli.command), config, outcome)
        .map_err(|e| MeasureError::InvalidParams(format!("cannot write report: {e}")))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::BuildMeasure { .. } => "build-measure",
        Command::ConeConstant { .. } => "cone-constant",
        Command::ScanCones { .. } => "scan-cones",
        Command::ScanPorosity { .. } => "scan-porosity",
        Command::ScanAnnular { .. } => "scan-annular",
        Command::DimLocal { .. } => "dim-local",
        Command::DimFd { .. } => "dim-fd",
        Command::DimSpectrum { .. } => "dim-spectrum",
        Command::DensityScan { .. } => "density-scan",
        Command::CheckRectifiability { .. } => "check-rectifiability",
        Command::BuildExtremal { .. } => "build-extremal",
        Command::Salli { .. } => "salli",
    }
}

fn load_spec(path: &Path) -> Result<(MeasureSpec, Measure), MeasureError> {
    let text = fs::read_to_string(path)
        .map_err(|e| MeasureError::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
    let spec: MeasureSpec = serde_json::from_str(&text)
        .map_err(|e| MeasureError::InvalidParams(format!("malformed measure spec: {e}")))?;
    let mu = spec.build()?;
    Ok((spec, mu))
}

fn parse_point(text: &str, dim: usize) -> Result<Point, MeasureError> {
    let coords: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| MeasureError::InvalidParams(format!("bad point {text:?}: {e}")))?;
    if coords.len() != dim {
        return Err(MeasureError::InvalidParams(format!(
            "point {text:?} has {} coordinates in dimension {dim}",
            coords.len()
        )));
    }
    Ok(point_from(&coords))
}

/// Resolved configuration, embedded in the report and hashed for the
/// provenance block; rebuilding from this value alone must reproduce the
/// run (measure specs are inlined, not referenced by path).
fn config_value(c: &Command) -> Result<serde_json::Value, MeasureError> {
    use serde_json::json;
    let v = match c {
        Command::BuildMeasure { spec } => {
            let (s, _) = load_spec(spec)?;
            json!({ "measure": s })
        }
        Command::ConeConstant {
            dim,
            k,
            alpha,
            samples,
            seed,
        } => json!({
            "dim": dim, "k": k, "alpha": alpha, "samples": samples, "seed": seed
        }),
        Command::ScanCones {
            spec,
            k,
            points,
            seed,
            t_total,
            alpha,
            eps,
            dt,
            n_v,
            n_theta,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "k": k, "points": points, "seed": seed,
                "t_total": t_total, "alpha": alpha, "eps": eps, "dt": dt,
                "n_v": n_v, "n_theta": n_theta
            })
        }
        Command::ScanPorosity {
            spec,
            points,
            seed,
            t_total,
            alpha,
            eps,
            dt,
            grid_res,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "points": points, "seed": seed, "t_total": t_total,
                "alpha": alpha, "eps": eps, "dt": dt, "grid_res": grid_res
            })
        }
        Command::ScanAnnular {
            spec,
            points,
            seed,
            rho,
            eps,
            r,
            grid_res,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "points": points, "seed": seed, "rho": rho,
                "eps": eps, "r": r, "grid_res": grid_res
            })
        }
        Command::DimLocal {
            spec,
            point,
            points,
            seed,
            r_min,
            r_max,
            n_scales,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "point": point, "points": points, "seed": seed,
                "r_min": r_min, "r_max": r_max, "n_scales": n_scales
            })
        }
        Command::DimFd {
            spec,
            point,
            t_total,
            r,
            dt,
            quad,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "point": point, "t_total": t_total,
                "r": r, "dt": dt, "quad": quad
            })
        }
        Command::DimSpectrum {
            spec,
            points,
            seed,
            r_min,
            r_max,
            n_scales,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "points": points, "seed": seed,
                "r_min": r_min, "r_max": r_max, "n_scales": n_scales
            })
        }
        Command::DensityScan {
            spec,
            point,
            k,
            r_min,
            r_max,
            n_scales,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "point": point, "k": k,
                "r_min": r_min, "r_max": r_max, "n_scales": n_scales
            })
        }
        Command::CheckRectifiability {
            spec,
            k,
            points,
            seed,
            alpha,
            r,
            n_v,
            n_theta,
        } => {
            let (s, _) = load_spec(spec)?;
            json!({
                "measure": s, "k": k, "points": points, "seed": seed,
                "alpha": alpha, "r": r, "n_v": n_v, "n_theta": n_theta
            })
        }
        Command::BuildExtremal {
            mode,
            dim,
            k,
            s,
            q,
            alpha,
            p,
            depth,
        } => json!({
            "mode": match mode { ExtremalMode::Cone => "cone", ExtremalMode::Porosity => "porosity" },
            "dim": dim, "k": k, "s": s, "q": q, "alpha": alpha, "p": p, "depth": depth
        }),
        Command::Salli { alpha, depth } => json!({ "alpha": alpha, "depth": depth }),
    };
    Ok(v)
}

fn direction_net(dim: usize, k: usize, n_v: usize, n_theta: usize) -> Result<DirectionNet, MeasureError> {
    if dim == 2 {
        if k != 1 {
            return Err(MeasureError::InvalidParams(format!(
                "planar cones need k = 1, got {k}"
            )));
        }
        DirectionNet::planar(n_v, n_theta)
    } else if dim == 3 {
        DirectionNet::spatial(k, n_v, n_theta)
    } else {
        Err(MeasureError::InvalidParams(format!(
            "cone scans need ambient dimension 2 or 3, got {dim}"
        )))
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}

fn point_csv_header(extra: &str) -> String {
    format!("point_id,x0,x1,x2,{extra}\n")
}

const ALPHA_SEARCH_TOL: f64 = 1.0 / 1024.0;

fn execute(c: &Command) -> Result<Outcome, MeasureError> {
    match c {
        Command::BuildMeasure { spec } => {
            let (_, mu) = load_spec(spec)?;
            let normalized = MeasureSpec::from_measure(&mu)
                .map(|s| serde_json::to_string_pretty(&s).unwrap());
            let mut data = Vec::new();
            if let Ok(text) = normalized {
                data.push(("normalized_spec.json".to_string(), text + "\n"));
            }
            Ok(Outcome {
                values: vec![
                    ReportValue::closed_form("ambient_dim", mu.ambient_dim() as f64),
                    ReportValue::closed_form("max_depth", mu.max_depth() as f64),
                ],
                witness: None,
                seed: None,
                depth: Some(mu.max_depth()),
                data,
            })
        }
        Command::ConeConstant {
            dim,
            k,
            alpha,
            samples,
            seed,
        } => {
            let (value, stderr) = cone_constant(*dim, *k, *alpha, *samples, *seed)?;
            let mut values = vec![ReportValue::empirical("epsilon", value, stderr)];
            if *dim == 2 && *k == 1 {
                values.push(ReportValue::closed_form("epsilon", alpha.asin() / PI));
            }
            Ok(Outcome {
                values,
                witness: None,
                seed: Some(*seed),
                depth: None,
                data: Vec::new(),
            })
        }
        Command::ScanCones {
            spec,
            k,
            points,
            seed,
            t_total,
            alpha,
            eps,
            dt,
            n_v,
            n_theta,
        } => {
            let (_, mu) = load_spec(spec)?;
            let net = direction_net(mu.ambient_dim(), *k, *n_v, *n_theta)?;
            let pts = mu.support_sample(*points, *seed);
            let mut csv = point_csv_header("fraction");
            let mut fractions = Vec::with_capacity(pts.len());
            for (i, x) in pts.iter().enumerate() {
                let f = cone_scale_fraction(&mu, *x, *t_total, *alpha, *eps, &net, *dt, None)?;
                csv.push_str(&format!(
                    "{i},{},{},{},{f}\n",
                    x[0], x[1], x[2]
                ));
                fractions.push(f);
            }
            let (mean, se) = mean_and_stderr(&fractions);
            Ok(Outcome {
                values: vec![ReportValue::empirical("mean_scale_fraction", mean, se)],
                witness: None,
                seed: Some(*seed),
                depth: None,
                data: vec![("cone_fractions.csv".to_string(), csv)],
            })
        }
        Command::ScanPorosity {
            spec,
            points,
            seed,
            t_total,
            alpha,
            eps,
            dt,
            grid_res,
        } => {
            let (_, mu) = load_spec(spec)?;
            let pts = mu.support_sample(*points, *seed);
            let mut csv = point_csv_header("fraction");
            let mut fractions = Vec::with_capacity(pts.len());
            for (i, x) in pts.iter().enumerate() {
                let f =
                    porosity_scale_fraction(&mu, *x, *t_total, *alpha, *eps, *dt, *grid_res, None)?;
                csv.push_str(&format!("{i},{},{},{},{f}\n", x[0], x[1], x[2]));
                fractions.push(f);
            }
            let (mean, se) = mean_and_stderr(&fractions);
            Ok(Outcome {
                values: vec![ReportValue::empirical("mean_scale_fraction", mean, se)],
                witness: None,
                seed: Some(*seed),
                depth: None,
                data: vec![("porosity_fractions.csv".to_string(), csv)],
            })
        }
        Command::ScanAnnular {
            spec,
            points,
            seed,
            rho,
            eps,
            r,
            grid_res,
        } => {
            let (_, mu) = load_spec(spec)?;
            let annular = AnnularSpec::new(*rho)?;
            let depth = mu.depth_for_scale(*r, default_extra_levels(mu.ambient_dim()));
            let pts = mu.support_sample(*points, *seed);
            let mut csv = point_csv_header("alpha_hat,y0,y1,y2,hole_mass_high");
            let mut alphas = Vec::with_capacity(pts.len());
            for (i, x) in pts.iter().enumerate() {
                let w = annular_pore_search(&mu, *x, *r, annular, *eps, *grid_res, depth)?;
                csv.push_str(&format!(
                    "{i},{},{},{},{},{},{},{},{}\n",
                    x[0], x[1], x[2], w.alpha_hat, w.y[0], w.y[1], w.y[2], w.hole_mass.high
                ));
                alphas.push(w.alpha_hat);
            }
            let (mean, _) = mean_and_stderr(&alphas);
            let min = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(Outcome {
                values: vec![
                    ReportValue::empirical("mean_alpha_hat", mean, ALPHA_SEARCH_TOL),
                    ReportValue::empirical("min_alpha_hat", min, ALPHA_SEARCH_TOL),
                ],
                witness: None,
                seed: Some(*seed),
                depth: Some(depth),
                data: vec![("annular_pores.csv".to_string(), csv)],
            })
        }
        Command::DimLocal {
            spec,
            point,
            points,
            seed,
            r_min,
            r_max,
            n_scales,
        } => {
            let (_, mu) = load_spec(spec)?;
            let pts = match point {
                Some(text) => vec![parse_point(text, mu.ambient_dim())?],
                None => mu.support_sample(*points, *seed),
            };
            let mut csv = point_csv_header("central,lower,upper,residual");
            let mut centrals = Vec::with_capacity(pts.len());
            let mut residuals = Vec::with_capacity(pts.len());
            for (i, x) in pts.iter().enumerate() {
                let l = local_dimension(&mu, *x, *r_min, *r_max, *n_scales)?;
                csv.push_str(&format!(
                    "{i},{},{},{},{},{},{},{}\n",
                    x[0], x[1], x[2], l.central.value, l.lower.value, l.upper.value,
                    l.central.residual
                ));
                centrals.push(l.central.value);
                residuals.push(l.central.residual);
            }
            let (mean, _) = mean_and_stderr(&centrals);
            let (mean_residual, _) = mean_and_stderr(&residuals);
            Ok(Outcome {
                values: vec![ReportValue::empirical(
                    "mean_local_dimension",
                    mean,
                    mean_residual,
                )],
                witness: None,
                seed: Some(*seed),
                depth: None,
                data: vec![("local_dimensions.csv".to_string(), csv)],
            })
        }
        Command::DimFd {
            spec,
            point,
            t_total,
            r,
            dt,
            quad,
        } => {
            let (_, mu) = load_spec(spec)?;
            let x = match point {
                Some(text) => parse_point(text, mu.ambient_dim())?,
                None => scenery_core::geom::ORIGIN,
            };
            let est = fd_dimension(&mu, x, *t_total, *r, *dt)?;
            let nu = scenery_core::scenery::scenery_at(&mu, x, 0.0)?;
            let (f_value, f_err) = dim_functional_f(&nu, *quad)?;
            Ok(Outcome {
                values: vec![
                    ReportValue::empirical("fd_dimension", est.value, est.residual),
                    ReportValue::empirical("dim_functional_f", f_value, f_err),
                ],
                witness: None,
                seed: None,
                depth: None,
                data: Vec::new(),
            })
        }
        Command::DimSpectrum {
            spec,
            points,
            seed,
            r_min,
            r_max,
            n_scales,
        } => {
            let (_, mu) = load_spec(spec)?;
            let s = dimension_spectrum(&mu, *points, *seed, *r_min, *r_max, *n_scales)?;
            let values = [
                ("hausdorff_lower", &s.hausdorff_lower),
                ("hausdorff_upper", &s.hausdorff_upper),
                ("packing_lower", &s.packing_lower),
                ("packing_upper", &s.packing_upper),
            ]
            .iter()
            .map(|(name, e)| ReportValue::empirical(name, e.value, e.residual))
            .collect();
            Ok(Outcome {
                values,
                witness: None,
                seed: Some(*seed),
                depth: None,
                data: Vec::new(),
            })
        }
        Command::DensityScan {
            spec,
            point,
            k,
            r_min,
            r_max,
            n_scales,
        } => {
            let (_, mu) = load_spec(spec)?;
            let x = match point {
                Some(text) => parse_point(text, mu.ambient_dim())?,
                None => scenery_core::geom::ORIGIN,
            };
            if !(*r_min > 0.0 && r_min < r_max) || *n_scales < 2 {
                return Err(MeasureError::InvalidParams(
                    "need 0 < r_min < r_max and at least 2 scales".into(),
                ));
            }
            let extra = default_extra_levels(mu.ambient_dim());
            let mut csv = String::from("r,density_low,density_mid,density_high\n");
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut max_width = 0.0_f64;
            let step = (r_max / r_min).ln() / (*n_scales as f64 - 1.0);
            for i in 0..*n_scales {
                let r = r_min * (step * i as f64).exp();
                let m = mu.ball_mass(x, r, mu.depth_for_scale(r, extra))?;
                let denom = r.powi(*k as i32);
                csv.push_str(&format!(
                    "{r},{},{},{}\n",
                    m.low / denom,
                    m.mid() / denom,
                    m.high / denom
                ));
                lo = lo.min(m.mid() / denom);
                hi = hi.max(m.mid() / denom);
                max_width = max_width.max(m.width() / denom);
            }
            Ok(Outcome {
                values: vec![
                    ReportValue::empirical("min_density", lo, 0.5 * max_width),
                    ReportValue::empirical("max_density", hi, 0.5 * max_width),
                ],
                witness: None,
                seed: None,
                depth: None,
                data: vec![("densities.csv".to_string(), csv)],
            })
        }
        Command::CheckRectifiability {
            spec,
            k,
            points,
            seed,
            alpha,
            r,
            n_v,
            n_theta,
        } => {
            let (_, mu) = load_spec(spec)?;
            let net = direction_net(mu.ambient_dim(), *k, *n_v, *n_theta)?;
            let pts = mu.support_sample(*points, *seed);
            let mut passed_any = false;
            let mut witness = None;
            let mut csv = String::from("pair_id,passed,witness_i,witness_j\n");
            for (pid, pair) in net.pairs.iter().enumerate() {
                let cone = net.cone(pair, *alpha)?;
                let (ok, w) =
                    scenery_core::cones::rectifiability_criterion(&pts, &cone, *r)?;
                match w {
                    Some((i, j)) => csv.push_str(&format!("{pid},{ok},{i},{j}\n")),
                    None => csv.push_str(&format!("{pid},{ok},,\n")),
                }
                if ok {
                    passed_any = true;
                    break;
                }
                if witness.is_none() {
                    witness = w;
                }
            }
            let witness_json = witness.map(|(i, j)| {
                serde_json::json!({
                    "pair": [i, j],
                    "points": [pts[i][..mu.ambient_dim()], pts[j][..mu.ambient_dim()]],
                })
            });
            Ok(Outcome {
                values: vec![ReportValue::empirical(
                    "passed",
                    if passed_any { 1.0 } else { 0.0 },
                    0.0,
                )],
                witness: witness_json,
                seed: Some(*seed),
                depth: None,
                data: vec![("rectifiability_pairs.csv".to_string(), csv)],
            })
        }
        Command::BuildExtremal {
            mode,
            dim,
            k,
            s,
            q,
            alpha,
            p,
            depth,
        } => {
            let (mu, target) = match mode {
                ExtremalMode::Cone => {
                    let s_value = match (s, q) {
                        (Some(v), None) => *v,
                        (None, Some(qv)) => *dim as f64 - qv * (*dim - *k) as f64,
                        _ => {
                            return Err(MeasureError::InvalidParams(
                                "cone mode takes exactly one of --s / --q".into(),
                            ))
                        }
                    };
                    (splice_cone_extremal(*dim, *k, s_value, *depth)?, s_value)
                }
                ExtremalMode::Porosity => {
                    let (Some(a), Some(pv)) = (alpha, p) else {
                        return Err(MeasureError::InvalidParams(
                            "porosity mode needs --alpha and --p".into(),
                        ));
                    };
                    let mu = splice_porosity_extremal(*dim, *a, *pv, *depth)?;
                    let cantor_dim =
                        *dim as f64 * salli_dimension(*a)?;
                    (mu, pv * cantor_dim + (1.0 - pv) * *dim as f64)
                }
            };
            let text = serde_json::to_string_pretty(&MeasureSpec::from_measure(&mu)?).unwrap();
            Ok(Outcome {
                values: vec![ReportValue::closed_form("target_dimension", target)],
                witness: None,
                seed: None,
                depth: Some(*depth),
                data: vec![("extremal_spec.json".to_string(), text + "\n")],
            })
        }
        Command::Salli { alpha, depth } => {
            let mu = cantor_salli(*alpha)?;
            let est = box_dimension(&mu, 2, *depth)?;
            Ok(Outcome {
                values: vec![
                    ReportValue::closed_form("dimension", salli_dimension(*alpha)?),
                    ReportValue::empirical("box_dimension", est.value, est.residual),
                ],
                witness: None,
                seed: None,
                depth: Some(*depth),
                data: Vec::new(),
            })
        }
    }
}

/// Write a file atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)
}

fn write_report(
    out: &Path,
    command: &str,
    config: serde_json::Value,
    outcome: Outcome,
) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    let config_text = serde_json::to_string(&config).unwrap();
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    hasher.update(b"\n");
    hasher.update(config_text.as_bytes());
    let config_hash = format!("{:x}", hasher.finalize());

    let mut data_files = Vec::new();
    for (name, content) in &outcome.data {
        write_atomic(&out.join(name), content)?;
        data_files.push(name.clone());
    }
    let report = Report {
        command: command.to_string(),
        config,
        provenance: Provenance {
            config_hash,
            seed: outcome.seed,
            depth: outcome.depth,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        values: outcome.values,
        witness: outcome.witness,
        data_files,
    };
    let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
    write_atomic(&out.join(format!("{command}.json")), &text)?;
    println!("{text}");
    Ok(())
}
