//! Property tests over randomized constructions: enclosure nesting and
//! conservation for arbitrary two-map IFS measures, schedule frequency
//! tracking, and spec round-trips for random rule stacks.

use proptest::prelude::*;
use scenery_core::constructions::{ifs_measure, BlockGrowth, SpliceSchedule};
use scenery_core::geom::point_from;
use scenery_core::measure::{IfsMap, IfsSpec};
use scenery_core::spec::{MeasureSpec, RuleSpec};

/// Two disjoint maps on [0,1]: left one in [0, split), right in (split, 1].
fn two_map_ifs() -> impl Strategy<Value = IfsSpec> {
    (0.2..0.8f64, 0.05..0.95f64, 0.05..0.95f64, 0.1..0.9f64).prop_map(
        |(split, left_frac, right_frac, w)| {
            let left_ratio = split * left_frac;
            let right_ratio = (1.0 - split) * right_frac;
            IfsSpec {
                dim: 1,
                maps: vec![
                    IfsMap {
                        ratio: left_ratio,
                        offset: point_from(&[0.0]),
                    },
                    IfsMap {
                        ratio: right_ratio,
                        offset: point_from(&[1.0 - right_ratio]),
                    },
                ],
                weights: vec![w, 1.0 - w],
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ifs_enclosures_nest_and_children_conserve(
        spec in two_map_ifs(),
        x in -0.2..1.2f64,
        r_exp in 0.5..6.0f64,
    ) {
        let mu = ifs_measure(spec).unwrap();
        let x = point_from(&[x]);
        let r = (-r_exp).exp();
        let coarse = mu.ball_mass_unchecked(x, r, 5);
        let fine = mu.ball_mass_unchecked(x, r, 12);
        prop_assert!(fine.low >= coarse.low - 1e-12);
        prop_assert!(fine.high <= coarse.high + 1e-12);
        let node = mu.roots().into_iter().next().unwrap();
        let children = mu.children_of(&node);
        let total: f64 = children.iter().map(|c| c.mass).sum();
        prop_assert!((total - node.mass).abs() < 1e-12);
    }

    #[test]
    fn schedule_prefix_frequency_tracks_target(
        q in 0.0..1.0f64,
        constant in prop::option::of(1u32..8),
        depth in 10u32..40,
    ) {
        let growth = match constant {
            Some(l) => BlockGrowth::Constant(l),
            None => BlockGrowth::Linear,
        };
        let sched = SpliceSchedule::new(q, growth, depth).unwrap();
        for n in 1..=depth as usize {
            let freq = sched.b_count(n) as f64 / n as f64;
            let block = sched.block_length_at(n) as f64;
            // One block is the granularity of the greedy labeling.
            prop_assert!(
                (freq - q).abs() <= block / n as f64 + 1e-12,
                "prefix {n}: freq {freq} vs target {q} (block {block})"
            );
        }
    }

    #[test]
    fn grid_specs_round_trip(
        levels in prop::collection::vec(0usize..3, 1..12),
    ) {
        let rules: Vec<RuleSpec> = levels
            .iter()
            .map(|k| match k {
                0 => RuleSpec::Uniform { arity: 3 },
                1 => RuleSpec::Cantor { alpha: 0.25 },
                _ => RuleSpec::Plane { axes: vec![0], arity: 3 },
            })
            .collect();
        let spec = MeasureSpec::Grid { dim: 2, rule: None, levels: Some(rules) };
        let mu = spec.build().unwrap();
        let text = serde_json::to_string(&MeasureSpec::from_measure(&mu).unwrap()).unwrap();
        let rebuilt: MeasureSpec = serde_json::from_str(&text).unwrap();
        let nu = rebuilt.build().unwrap();
        let depth = (levels.len() as u32).min(4);
        let ca = mu.cells_at_depth(depth);
        let cb = nu.cells_at_depth(depth);
        prop_assert_eq!(ca.len(), cb.len());
        for (a, b) in ca.iter().zip(&cb) {
            prop_assert!((a.mass - b.mass).abs() < 1e-12);
        }
    }
}
