//! JSON measure specifications: a serde schema for building measures from
//! declarative documents and for serializing constructible measures back
//! out, with cell masses preserved at every depth.

use crate::constructions::{
    cantor_rule, grid_measure, ifs_measure_depth, lebesgue_ball, plane, plane_rule, point_mass,
    product_measure, splice, uniform_rule, BlockGrowth, SpliceSchedule,
};
use crate::error::{MeasureError, Result};
use crate::measure::{IfsMap, IfsSpec, Kind, Measure, Rule, RuleKind, DEFAULT_MAX_DEPTH};
use crate::geom::ORIGIN;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Serializable subdivision rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleSpec {
    Uniform { arity: u32 },
    Plane { axes: Vec<usize>, arity: u32 },
    Cantor { alpha: f64 },
}

impl RuleSpec {
    pub fn build(&self) -> Result<Rule> {
        match self {
            RuleSpec::Uniform { arity } => {
                check_arity(*arity)?;
                Ok(uniform_rule(*arity))
            }
            RuleSpec::Plane { axes, arity } => {
                check_arity(*arity)?;
                Ok(plane_rule(axes.clone(), *arity))
            }
            RuleSpec::Cantor { alpha } => cantor_rule(*alpha),
        }
    }

    fn from_rule(rule: &Rule) -> RuleSpec {
        match &rule.kind {
            RuleKind::Uniform => RuleSpec::Uniform { arity: rule.arity },
            RuleKind::Plane { axes } => RuleSpec::Plane {
                axes: axes.clone(),
                arity: rule.arity,
            },
            RuleKind::Cantor => {
                // arity m corresponds to hole parameter (m-2)/(2m-2)
                let m = rule.arity as f64;
                RuleSpec::Cantor {
                    alpha: (m - 2.0) / (2.0 * m - 2.0),
                }
            }
        }
    }
}

fn check_arity(arity: u32) -> Result<()> {
    if arity >= 2 {
        Ok(())
    } else {
        Err(MeasureError::InvalidParams(format!(
            "rule arity must be at least 2, got {arity}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub ratio: f64,
    pub offset: Vec<f64>,
}

/// Declarative measure description, the `"type"`-tagged JSON schema the
/// command line accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureSpec {
    LebesgueBall {
        dim: usize,
    },
    PointMass {
        dim: usize,
    },
    Plane {
        dim: usize,
        axes: Vec<usize>,
    },
    Ifs {
        dim: usize,
        maps: Vec<MapSpec>,
        weights: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<u32>,
    },
    /// One rule at every level, or an explicit per-level rule list.
    Grid {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rule: Option<RuleSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        levels: Option<Vec<RuleSpec>>,
    },
    /// Two rules alternated across scale blocks so B-levels reach the
    /// requested Cesaro frequency.
    Splice {
        dim: usize,
        rule_a: RuleSpec,
        rule_b: RuleSpec,
        frequency: f64,
        #[serde(default = "default_growth")]
        block_growth: BlockGrowth,
        #[serde(default = "default_depth")]
        depth: u32,
    },
    Product {
        factors: Vec<MeasureSpec>,
    },
}

fn default_growth() -> BlockGrowth {
    BlockGrowth::Linear
}

fn default_depth() -> u32 {
    DEFAULT_MAX_DEPTH
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureSpec::LebesgueBall { dim } => lebesgue_ball(*dim),
            MeasureSpec::PointMass { dim } => point_mass(*dim),
            MeasureSpec::Plane { dim, axes } => plane(*dim, axes),
            MeasureSpec::Ifs {
                dim,
                maps,
                weights,
                depth,
            } => {
                let mut ifs_maps = Vec::with_capacity(maps.len());
                for m in maps {
                    if m.offset.len() != *dim {
                        return Err(MeasureError::InvalidParams(format!(
                            "ifs map offset has {} coordinates in dimension {dim}",
                            m.offset.len()
                        )));
                    }
                    let mut offset = ORIGIN;
                    offset[..*dim].copy_from_slice(&m.offset);
                    ifs_maps.push(IfsMap {
                        ratio: m.ratio,
                        offset,
                    });
                }
                ifs_measure_depth(
                    IfsSpec {
                        dim: *dim,
                        maps: ifs_maps,
                        weights: weights.clone(),
                    },
                    depth.unwrap_or(DEFAULT_MAX_DEPTH),
                )
            }
            MeasureSpec::Grid { dim, rule, levels } => match (rule, levels) {
                (Some(r), None) => grid_measure(r.build()?, *dim),
                (None, Some(specs)) if !specs.is_empty() => {
                    let rules: Vec<Rule> =
                        specs.iter().map(|s| s.build()).collect::<Result<_>>()?;
                    let arity = rules[0].arity;
                    if rules.iter().any(|r| r.arity != arity) {
                        return Err(MeasureError::InvalidParams(
                            "all grid levels must share one arity".into(),
                        ));
                    }
                    if !(1..=3).contains(dim) {
                        return Err(MeasureError::InvalidParams(format!(
                            "ambient dimension must be 1..=3, got {dim}"
                        )));
                    }
                    Ok(Measure::new(
                        *dim,
                        rules.len() as u32,
                        Kind::Grid {
                            levels: Arc::new(rules),
                        },
                    ))
                }
                _ => Err(MeasureError::InvalidParams(
                    "grid spec needs exactly one of `rule` or nonempty `levels`".into(),
                )),
            },
            MeasureSpec::Splice {
                dim,
                rule_a,
                rule_b,
                frequency,
                block_growth,
                depth,
            } => {
                let schedule = SpliceSchedule::new(*frequency, *block_growth, *depth)?;
                splice(rule_a.build()?, rule_b.build()?, &schedule, *dim)
            }
            MeasureSpec::Product { factors } => {
                if factors.len() < 2 {
                    return Err(MeasureError::InvalidParams(
                        "product needs at least two factors".into(),
                    ));
                }
                let mut built = factors[0].build()?;
                for f in &factors[1..] {
                    built = product_measure(built, f.build()?)?;
                }
                Ok(built)
            }
        }
    }

    /// Serialize a constructible measure back to a spec. Grid measures come
    /// back with their explicit level list, so splices round-trip with cell
    /// masses intact even though the schedule parameters are forgotten.
    pub fn from_measure(mu: &Measure) -> Result<MeasureSpec> {
        let dim = mu.ambient_dim();
        match &mu.kind {
            Kind::LebesgueBall => Ok(MeasureSpec::LebesgueBall { dim }),
            Kind::PointMass => Ok(MeasureSpec::PointMass { dim }),
            Kind::Plane { axes } => Ok(MeasureSpec::Plane {
                dim,
                axes: axes.clone(),
            }),
            Kind::Ifs(spec) => Ok(MeasureSpec::Ifs {
                dim,
                maps: spec
                    .maps
                    .iter()
                    .map(|m| MapSpec {
                        ratio: m.ratio,
                        offset: m.offset[..dim].to_vec(),
                    })
                    .collect(),
                weights: spec.weights.clone(),
                depth: Some(mu.max_depth()),
            }),
            Kind::Grid { levels } => Ok(MeasureSpec::Grid {
                dim,
                rule: None,
                levels: Some(levels.iter().map(RuleSpec::from_rule).collect()),
            }),
            Kind::Product { a, b } => Ok(MeasureSpec::Product {
                factors: vec![Self::from_measure(a)?, Self::from_measure(b)?],
            }),
            _ => Err(MeasureError::InvalidParams(format!(
                "{} measures have no spec form",
                mu.kind_name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{cantor_salli, splice_cone_extremal};

    fn parse(text: &str) -> MeasureSpec {
        serde_json::from_str(text).unwrap()
    }

    fn cells_match(a: &Measure, b: &Measure, depth: u32) {
        let ca = a.cells_at_depth(depth);
        let cb = b.cells_at_depth(depth);
        assert_eq!(ca.len(), cb.len());
        for (x, y) in ca.iter().zip(&cb) {
            assert!((x.mass - y.mass).abs() < 1e-12);
            assert!((x.lo[0] - y.lo[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn parses_every_kind() {
        let docs = [
            r#"{"type":"lebesgue_ball","dim":2}"#,
            r#"{"type":"point_mass","dim":1}"#,
            r#"{"type":"plane","dim":3,"axes":[0,1]}"#,
            r#"{"type":"ifs","dim":1,"maps":[{"ratio":0.25,"offset":[0.0]},{"ratio":0.25,"offset":[0.75]}],"weights":[0.5,0.5]}"#,
            r#"{"type":"grid","dim":1,"rule":{"kind":"cantor","alpha":0.25}}"#,
            r#"{"type":"splice","dim":2,"rule_a":{"kind":"uniform","arity":2},"rule_b":{"kind":"plane","axes":[0],"arity":2},"frequency":0.5}"#,
            r#"{"type":"product","factors":[{"type":"grid","dim":1,"rule":{"kind":"cantor","alpha":0.25}},{"type":"grid","dim":1,"rule":{"kind":"cantor","alpha":0.25}}]}"#,
        ];
        for doc in docs {
            parse(doc).build().unwrap();
        }
    }

    #[test]
    fn rejects_bad_documents() {
        for doc in [
            r#"{"type":"ifs","dim":1,"maps":[{"ratio":0.5,"offset":[0.0]},{"ratio":0.5,"offset":[0.5]}],"weights":[0.7,0.7]}"#,
            r#"{"type":"grid","dim":1}"#,
            r#"{"type":"grid","dim":1,"rule":{"kind":"cantor","alpha":0.2}}"#,
            r#"{"type":"plane","dim":2,"axes":[5]}"#,
        ] {
            assert!(parse(doc).build().is_err(), "{doc}");
        }
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"type":"nope"}"#).is_err());
    }

    #[test]
    fn round_trip_preserves_cell_masses() {
        let originals = vec![
            cantor_salli(0.25).unwrap(),
            splice_cone_extremal(2, 1, 1.5, 40).unwrap(),
            parse(r#"{"type":"product","factors":[{"type":"grid","dim":1,"rule":{"kind":"cantor","alpha":0.25}},{"type":"grid","dim":1,"rule":{"kind":"uniform","arity":3}}]}"#)
                .build()
                .unwrap(),
        ];
        for mu in originals {
            let spec = MeasureSpec::from_measure(&mu).unwrap();
            let text = serde_json::to_string(&spec).unwrap();
            let rebuilt = parse(&text).build().unwrap();
            for depth in [1, 3, 6] {
                cells_match(&mu, &rebuilt, depth);
            }
        }
    }

    #[test]
    fn cantor_rule_alpha_round_trips() {
        let r = cantor_rule(0.25).unwrap();
        assert_eq!(RuleSpec::from_rule(&r), RuleSpec::Cantor { alpha: 0.25 });
        let r = cantor_rule(1.0 / 3.0).unwrap();
        assert_eq!(RuleSpec::from_rule(&r).build().unwrap(), r);
    }
}
