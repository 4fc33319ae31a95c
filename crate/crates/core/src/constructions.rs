//! Constructors for the standard and extremal measures: Lebesgue on the
//! unit ball, point mass, coordinate-plane Hausdorff measures, homothetic
//! IFS measures, products, and scale-spliced grid measures.

use crate::error::{MeasureError, Result};
use crate::geom::{Point, ORIGIN};
use crate::measure::{IfsMap, IfsSpec, Kind, Measure, Rule, RuleKind, DEFAULT_MAX_DEPTH};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(MeasureError::InvalidParams(format!(
            "ambient dimension must be 1..=3, got {d}"
        )))
    }
}

/// Normalized Lebesgue measure on the unit ball of R^d.
pub fn lebesgue_ball(d: usize) -> Result<Measure> {
    check_dim(d)?;
    Ok(Measure::new(d, DEFAULT_MAX_DEPTH, Kind::LebesgueBall))
}

/// Unit point mass at the origin of R^d.
pub fn point_mass(d: usize) -> Result<Measure> {
    check_dim(d)?;
    Ok(Measure::new(d, DEFAULT_MAX_DEPTH, Kind::PointMass))
}

/// Normalized k-dimensional Hausdorff measure on the coordinate plane
/// spanned by `axes`, intersected with the unit ball.
pub fn plane(d: usize, axes: &[usize]) -> Result<Measure> {
    check_dim(d)?;
    let k = axes.len();
    if k == 0 || k >= d || axes.iter().any(|&a| a >= d) {
        return Err(MeasureError::InvalidParams(format!(
            "plane axes {axes:?} invalid for ambient dimension {d}"
        )));
    }
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k {
        return Err(MeasureError::InvalidParams("duplicate plane axes".into()));
    }
    Ok(Measure::new(d, DEFAULT_MAX_DEPTH, Kind::Plane { axes: sorted }))
}

/// Self-similar measure for a homothetic IFS with strong separation.
pub fn ifs_measure(spec: IfsSpec) -> Result<Measure> {
    ifs_measure_depth(spec, DEFAULT_MAX_DEPTH)
}

pub fn ifs_measure_depth(spec: IfsSpec, max_depth: u32) -> Result<Measure> {
    check_dim(spec.dim)?;
    if spec.maps.is_empty() || spec.maps.len() != spec.weights.len() {
        return Err(MeasureError::InvalidParams(
            "ifs needs matching nonempty maps and weights".into(),
        ));
    }
    let wsum: f64 = spec.weights.iter().sum();
    if (wsum - 1.0).abs() > 1e-9 || spec.weights.iter().any(|&w| w < 0.0) {
        return Err(MeasureError::InvalidParams(format!(
            "ifs weights must be nonnegative and sum to 1 (sum = {wsum})"
        )));
    }
    for m in &spec.maps {
        if !(m.ratio > 0.0 && m.ratio < 1.0) {
            return Err(MeasureError::InvalidParams(format!(
                "ifs ratio must lie in (0,1), got {}",
                m.ratio
            )));
        }
        for i in 0..spec.dim {
            if m.offset[i] < -1e-12 || m.offset[i] + m.ratio > 1.0 + 1e-12 {
                return Err(MeasureError::InvalidParams(
                    "ifs map image leaves the unit cell".into(),
                ));
            }
        }
    }
    // Strong separation: pairwise margin of the first-level images.
    for i in 0..spec.maps.len() {
        for j in (i + 1)..spec.maps.len() {
            let (a, b) = (&spec.maps[i], &spec.maps[j]);
            let mut margin = f64::NEG_INFINITY;
            for axis in 0..spec.dim {
                let gap = (b.offset[axis] - (a.offset[axis] + a.ratio))
                    .max(a.offset[axis] - (b.offset[axis] + b.ratio));
                margin = margin.max(gap);
            }
            if margin < -1e-12 {
                return Err(MeasureError::InvalidParams(format!(
                    "ifs maps {i} and {j} overlap (margin {margin:.3e})"
                )));
            }
        }
    }
    let dim = spec.dim;
    Ok(Measure::new(dim, max_depth, Kind::Ifs(spec)))
}

/// The extremal Cantor measure for porosity alpha: two maps of ratio
/// (1 - 2 alpha) / (2 - 2 alpha) at the ends of [0,1], equal weights.
pub fn cantor_salli(alpha: f64) -> Result<Measure> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(MeasureError::InvalidParams(format!(
            "porosity parameter must lie in (0, 1/2), got {alpha}"
        )));
    }
    let ratio = (1.0 - 2.0 * alpha) / (2.0 - 2.0 * alpha);
    let mut off2 = ORIGIN;
    off2[0] = 1.0 - ratio;
    ifs_measure(IfsSpec {
        dim: 1,
        maps: vec![
            IfsMap {
                ratio,
                offset: ORIGIN,
            },
            IfsMap {
                ratio,
                offset: off2,
            },
        ],
        weights: vec![0.5, 0.5],
    })
}

/// Hausdorff dimension of the extremal alpha-porous Cantor set:
/// log 2 / (log(2 - 2 alpha) - log(1 - 2 alpha)).
pub fn salli_dimension(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(MeasureError::InvalidParams(format!(
            "porosity parameter must lie in (0, 1/2), got {alpha}"
        )));
    }
    Ok(2.0_f64.ln() / ((2.0 - 2.0 * alpha).ln() - (1.0 - 2.0 * alpha).ln()))
}

/// The 1/4-Cantor measure: two maps of ratio 1/4 at the ends of [0,1].
/// Its attractor has dimension 1/2; the planar product has dimension 1.
pub fn cantor_quarter() -> Measure {
    let mut off2 = ORIGIN;
    off2[0] = 0.75;
    ifs_measure(IfsSpec {
        dim: 1,
        maps: vec![
            IfsMap {
                ratio: 0.25,
                offset: ORIGIN,
            },
            IfsMap {
                ratio: 0.25,
                offset: off2,
            },
        ],
        weights: vec![0.5, 0.5],
    })
    .expect("static spec is valid")
}

/// Product measure on R^{d1 + d2}; factors must carry cylinder structure.
pub fn product_measure(a: Measure, b: Measure) -> Result<Measure> {
    for m in [&a, &b] {
        if !matches!(m.kind, Kind::Ifs(_) | Kind::Grid { .. } | Kind::Product { .. }) {
            return Err(MeasureError::UnsupportedKind(format!(
                "product factor of kind {}",
                m.kind_name()
            )));
        }
    }
    let dim = a.ambient_dim() + b.ambient_dim();
    if dim > 3 {
        return Err(MeasureError::InvalidParams(format!(
            "product ambient dimension {dim} exceeds 3"
        )));
    }
    let depth = a.max_depth().min(b.max_depth());
    Ok(Measure::new(
        dim,
        depth,
        Kind::Product {
            a: Arc::new(a),
            b: Arc::new(b),
        },
    ))
}

/// Mixture of measures with pairwise disjoint root boxes.
pub fn mixture(parts: Vec<(f64, Measure)>) -> Result<Measure> {
    if parts.is_empty() {
        return Err(MeasureError::InvalidParams("empty mixture".into()));
    }
    let dim = parts[0].1.ambient_dim();
    let wsum: f64 = parts.iter().map(|(w, _)| w).sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(MeasureError::InvalidParams(format!(
            "mixture weights must sum to 1, got {wsum}"
        )));
    }
    for (_, m) in &parts {
        if m.ambient_dim() != dim {
            return Err(MeasureError::InvalidParams(
                "mixture components must share ambient dimension".into(),
            ));
        }
        if matches!(m.kind, Kind::Mixture { .. } | Kind::Restricted(_)) {
            return Err(MeasureError::UnsupportedKind(
                "nested mixtures or restricted components".into(),
            ));
        }
    }
    // disjoint root boxes
    let boxes: Vec<_> = parts
        .iter()
        .map(|(_, m)| {
            let r = m.roots();
            (r[0].lo, r[0].hi)
        })
        .collect();
    for i in 0..boxes.len() {
        for j in (i + 1)..boxes.len() {
            let disjoint = (0..dim).any(|ax| {
                boxes[i].1[ax] <= boxes[j].0[ax] || boxes[j].1[ax] <= boxes[i].0[ax]
            });
            if !disjoint {
                return Err(MeasureError::InvalidParams(
                    "mixture component boxes overlap".into(),
                ));
            }
        }
    }
    let depth = parts.iter().map(|(_, m)| m.max_depth()).min().unwrap();
    let parts = parts
        .into_iter()
        .map(|(w, m)| (w, Arc::new(m)))
        .collect();
    Ok(Measure::new(dim, depth, Kind::Mixture { parts }))
}

/// Uniform subdivision: every child gets equal mass.
pub fn uniform_rule(arity: u32) -> Rule {
    Rule {
        arity,
        kind: RuleKind::Uniform,
    }
}

/// Mass only to children meeting the coordinate k-plane spanned by `axes`.
pub fn plane_rule(axes: Vec<usize>, arity: u32) -> Rule {
    Rule {
        arity,
        kind: RuleKind::Plane { axes },
    }
}

/// Cantor subdivision with porosity `alpha`: the contraction ratio
/// (1-2a)/(2-2a) must be 1/m for an integer arity m.
pub fn cantor_rule(alpha: f64) -> Result<Rule> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(MeasureError::InvalidParams(format!(
            "porosity parameter must lie in (0, 1/2), got {alpha}"
        )));
    }
    let m = (2.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha);
    let arity = m.round();
    if (m - arity).abs() > 1e-9 || arity < 3.0 {
        return Err(MeasureError::InvalidParams(format!(
            "cantor rule needs integer 1/ratio; alpha {alpha} gives {m}"
        )));
    }
    Ok(Rule {
        arity: arity as u32,
        kind: RuleKind::Cantor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockGrowth {
    Linear,
    Constant(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpliceLabel {
    A,
    B,
}

/// A scale-labeling sequence with prescribed Cesaro frequency of B-levels.
///
/// Blocks of (linearly growing or constant) length are labeled greedily so
/// the running B-frequency tracks the target.
#[derive(Debug, Clone)]
pub struct SpliceSchedule {
    pub target_frequency: f64,
    pub block_growth: BlockGrowth,
    pub depth: u32,
    pub labels: Vec<SpliceLabel>,
}

impl SpliceSchedule {
    pub fn new(q: f64, block_growth: BlockGrowth, depth: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(MeasureError::InvalidParams(format!(
                "target frequency must lie in [0,1], got {q}"
            )));
        }
        if let BlockGrowth::Constant(0) = block_growth {
            return Err(MeasureError::InvalidParams(
                "constant block length must be positive".into(),
            ));
        }
        Ok(SpliceSchedule {
            target_frequency: q,
            block_growth,
            depth,
            labels: generate_labels(q, block_growth, depth as usize),
        })
    }

    /// Largest block length intersecting the first `n` levels.
    pub fn block_length_at(&self, n: usize) -> usize {
        match self.block_growth {
            BlockGrowth::Constant(l) => l as usize,
            BlockGrowth::Linear => {
                let mut len = 1usize;
                let mut covered = 0usize;
                while covered + len < n {
                    covered += len;
                    len += 1;
                }
                len
            }
        }
    }

    pub fn b_count(&self, n: usize) -> usize {
        self.labels[..n.min(self.labels.len())]
            .iter()
            .filter(|l| **l == SpliceLabel::B)
            .count()
    }
}

fn generate_labels(q: f64, growth: BlockGrowth, len: usize) -> Vec<SpliceLabel> {
    let mut labels = Vec::with_capacity(len);
    let mut b_total = 0usize;
    let mut block = 0usize;
    while labels.len() < len {
        block += 1;
        let block_len = match growth {
            BlockGrowth::Linear => block,
            BlockGrowth::Constant(l) => l as usize,
        };
        let n_after = labels.len() + block_len;
        let freq_if_b = (b_total + block_len) as f64 / n_after as f64;
        let freq_if_a = b_total as f64 / n_after as f64;
        let label = if (freq_if_b - q).abs() <= (freq_if_a - q).abs() {
            SpliceLabel::B
        } else {
            SpliceLabel::A
        };
        for _ in 0..block_len {
            if labels.len() == len {
                break;
            }
            labels.push(label);
            if label == SpliceLabel::B {
                b_total += 1;
            }
        }
    }
    labels
}

/// Grid measure whose level-n subdivision uses `rule_a` on A-levels and
/// `rule_b` on B-levels of the schedule. The schedule is continued past its
/// nominal depth up to the measure's max depth.
pub fn splice(rule_a: Rule, rule_b: Rule, schedule: &SpliceSchedule, dim: usize) -> Result<Measure> {
    check_dim(dim)?;
    if rule_a.arity != rule_b.arity {
        return Err(MeasureError::InvalidParams(format!(
            "spliced rules must share arity ({} vs {})",
            rule_a.arity, rule_b.arity
        )));
    }
    let max_depth = DEFAULT_MAX_DEPTH.max(schedule.depth);
    if schedule.depth > DEFAULT_MAX_DEPTH {
        return Err(MeasureError::InvalidParams(format!(
            "schedule depth {} exceeds max depth {DEFAULT_MAX_DEPTH}",
            schedule.depth
        )));
    }
    let labels = generate_labels(
        schedule.target_frequency,
        schedule.block_growth,
        max_depth as usize,
    );
    let levels: Vec<Rule> = labels
        .iter()
        .map(|l| match l {
            SpliceLabel::A => rule_a.clone(),
            SpliceLabel::B => rule_b.clone(),
        })
        .collect();
    Ok(Measure::new(
        dim,
        max_depth,
        Kind::Grid {
            levels: Arc::new(levels),
        },
    ))
}

/// Grid measure applying one rule at every level (q = 0 splice).
pub fn grid_measure(rule: Rule, dim: usize) -> Result<Measure> {
    let schedule = SpliceSchedule::new(0.0, BlockGrowth::Constant(1), DEFAULT_MAX_DEPTH)?;
    splice(rule.clone(), rule, &schedule, dim)
}

/// The sharp conical-density example: splice of uniform and plane rules in
/// R^d around a coordinate k-plane, with Lebesgue-level frequency
/// (s - k)/(d - k) for a target dimension s in (k, d).
pub fn splice_cone_extremal(d: usize, k: usize, s: f64, depth: u32) -> Result<Measure> {
    if k == 0 || k >= d {
        return Err(MeasureError::InvalidParams(format!(
            "need 1 <= k < d, got k={k}, d={d}"
        )));
    }
    if !(s > k as f64 && s < d as f64) {
        return Err(MeasureError::InvalidParams(format!(
            "need k < s < d, got s={s}"
        )));
    }
    let q_plane = (d as f64 - s) / (d as f64 - k as f64);
    let schedule = SpliceSchedule::new(q_plane, BlockGrowth::Linear, depth)?;
    splice(
        uniform_rule(2),
        plane_rule((0..k).collect(), 2),
        &schedule,
        d,
    )
}

/// The mean-porosity example: splice of uniform and Cantor rules in R^d
/// with Cantor-level frequency p.
pub fn splice_porosity_extremal(d: usize, alpha: f64, p: f64, depth: u32) -> Result<Measure> {
    let rule_b = cantor_rule(alpha)?;
    let rule_a = uniform_rule(rule_b.arity);
    // Constant mid-size blocks: long enough that pores carried over from a
    // finished Cantor block decay within a small share of the next block,
    // short enough that the prefix frequency reaches p by modest depths.
    let schedule = SpliceSchedule::new(p, BlockGrowth::Constant(6), depth)?;
    splice(rule_a, rule_b, &schedule, d)
}

/// Uniform measure on [0,1]^d as a dyadic grid.
pub fn unit_cube(d: usize) -> Result<Measure> {
    grid_measure(uniform_rule(2), d)
}

/// Orthonormal basis check used by cone specifications.
pub fn check_orthonormal(basis: &[Point], dim: usize) -> Result<()> {
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            let d = crate::geom::dot(*u, *v, dim);
            if (d - expect).abs() > 1e-12 {
                return Err(MeasureError::InvalidParams(format!(
                    "basis not orthonormal: <b{i}, b{j}> = {d}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn salli_dimension_closed_form() {
        // alpha = 1/4 -> middle thirds -> log 2 / log 3
        let d = salli_dimension(0.25).unwrap();
        assert!((d - 2.0_f64.ln() / 3.0_f64.ln()).abs() < 1e-15);
        // alpha = 0.4 -> ratio 0.2/1.2 = 1/6 -> log2/log6
        let d = salli_dimension(0.4).unwrap();
        assert!((d - 2.0_f64.ln() / 6.0_f64.ln()).abs() < 1e-15);
        // limits
        assert!(salli_dimension(1e-9).unwrap() > 0.999_999);
        assert!(salli_dimension(0.49).unwrap() < 0.2);
        assert!(salli_dimension(0.5).is_err());
        assert!(salli_dimension(0.0).is_err());
    }

    #[test]
    fn cantor_salli_ratios() {
        let m = cantor_salli(0.25).unwrap();
        let roots = m.roots();
        let cs = m.children_of(&roots[0]);
        assert_eq!(cs.len(), 2);
        assert!((cs[0].hi[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((cs[1].lo[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((cs[0].mass - 0.5).abs() < 1e-15);

        let m = cantor_salli(0.1).unwrap();
        let cs = m.children_of(&m.roots()[0]);
        assert!((cs[0].hi[0] - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_ifs_rejected() {
        let spec = IfsSpec {
            dim: 1,
            maps: vec![
                IfsMap {
                    ratio: 0.6,
                    offset: ORIGIN,
                },
                IfsMap {
                    ratio: 0.6,
                    offset: {
                        let mut o = ORIGIN;
                        o[0] = 0.4;
                        o
                    },
                },
            ],
            weights: vec![0.5, 0.5],
        };
        assert!(matches!(
            ifs_measure(spec),
            Err(MeasureError::InvalidParams(_))
        ));
    }

    #[test]
    fn schedule_tracks_target_frequency() {
        let s = SpliceSchedule::new(0.5, BlockGrowth::Linear, 36).unwrap();
        let b = s.b_count(36);
        let last_block = s.block_length_at(36);
        assert!(
            (b as f64 - 0.5 * 36.0).abs() <= last_block as f64,
            "b = {b}, block = {last_block}"
        );
        // the invariant holds at every prefix
        for n in 1..=36 {
            let b = s.b_count(n) as f64;
            let block = s.block_length_at(n) as f64;
            assert!((b - 0.5 * n as f64).abs() <= block, "prefix {n}");
        }
    }

    #[test]
    fn schedule_extremes() {
        let s0 = SpliceSchedule::new(0.0, BlockGrowth::Linear, 20).unwrap();
        assert_eq!(s0.b_count(20), 0);
        let s1 = SpliceSchedule::new(1.0, BlockGrowth::Linear, 20).unwrap();
        assert_eq!(s1.b_count(20), 20);
    }

    #[test]
    fn cantor_rule_arity() {
        let r = cantor_rule(0.25).unwrap();
        assert_eq!(r.arity, 3);
        assert!(cantor_rule(0.2).is_err()); // ratio 0.6/1.6 = 3/8
        let r = cantor_rule(1.0 / 3.0).unwrap(); // ratio (1/3)/(4/3) = 1/4
        assert_eq!(r.arity, 4);
    }

    #[test]
    fn splice_q0_matches_pure_rule() {
        let sched = SpliceSchedule::new(0.0, BlockGrowth::Linear, 20).unwrap();
        let spliced = splice(uniform_rule(2), plane_rule(vec![0], 2), &sched, 2).unwrap();
        let pure = unit_cube(2).unwrap();
        for depth in [1u32, 3, 5] {
            let a = spliced.cells_at_depth(depth);
            let b = pure.cells_at_depth(depth);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x.mass - y.mass).abs() < 1e-15);
            }
        }
    }
}
