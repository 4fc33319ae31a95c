use super::classify::BoxRegion;
use super::*;
use crate::constructions::{
    cantor_quarter, cantor_salli, grid_measure, lebesgue_ball, mixture, plane, point_mass,
    product_measure, splice, uniform_rule, BlockGrowth, SpliceSchedule,
};
use rand::Rng;

/// Independent oracle for the mass a two-map end-to-end IFS on [0,1] with
/// equal weights gives to an interval, via cylinder recursion.
fn two_map_interval_mass(ratio: f64, a: f64, b: f64, depth: u32) -> f64 {
    if b <= 0.0 || a >= 1.0 {
        return 0.0;
    }
    if a <= 0.0 && b >= 1.0 {
        return 1.0;
    }
    if depth == 0 {
        return 0.0; // unresolved boundary sliver, weight <= 2^-depth_total
    }
    let off = 1.0 - ratio;
    0.5 * (two_map_interval_mass(ratio, a / ratio, b / ratio, depth - 1)
        + two_map_interval_mass(ratio, (a - off) / ratio, (b - off) / ratio, depth - 1))
}

fn pt(x: f64, y: f64, z: f64) -> Point {
    [x, y, z]
}

#[test]
fn cantor_ball_mass_matches_cylinder_oracle() {
    let m = cantor_quarter();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let x: f64 = rng.gen_range(-0.2..1.2);
        let r: f64 = rng.gen_range(0.01..0.8);
        let oracle = two_map_interval_mass(0.25, x - r, x + r, 60);
        let got = m.ball_mass(pt(x, 0.0, 0.0), r, 40).unwrap();
        assert!(
            oracle >= got.low - 1e-9 && oracle <= got.high + 1e-9,
            "x={x} r={r} oracle={oracle} got=[{},{}]",
            got.low,
            got.high
        );
        assert!(got.width() < 1e-6, "width {}", got.width());
    }
}

#[test]
fn salli_measure_matches_oracle() {
    let m = cantor_salli(0.25).unwrap(); // middle thirds
    let ratio = 1.0 / 3.0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let x: f64 = rng.gen_range(0.0..1.0);
        let r: f64 = rng.gen_range(0.01..0.5);
        let oracle = two_map_interval_mass(ratio, x - r, x + r, 80);
        let got = m.ball_mass(pt(x, 0.0, 0.0), r, 40).unwrap();
        assert!(
            oracle >= got.low - 1e-8 && oracle <= got.high + 1e-8,
            "x={x} r={r} oracle={oracle} got=[{},{}]",
            got.low,
            got.high
        );
    }
}

#[test]
fn lebesgue_analytic_agrees_with_tree() {
    // depth is per-dimension: boundary cell counts grow like 2^((d-1) depth)
    for (d, depth) in [(1usize, 20u32), (2, 12), (3, 7)] {
        let m = lebesgue_ball(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for _ in 0..6 {
            let mut x = ORIGIN;
            for i in 0..d {
                x[i] = rng.gen_range(-0.9..0.9);
            }
            let r: f64 = rng.gen_range(0.05..1.0);
            let analytic = m.ball_mass(x, r, 30).unwrap();
            assert!(analytic.width() == 0.0);
            let tree = m.region_mass(&BallRegion { center: x, r }, depth);
            assert!(
                analytic.mid() >= tree.low - 1e-9 && analytic.mid() <= tree.high + 1e-9,
                "d={d} x={x:?} r={r} analytic={} tree=[{},{}]",
                analytic.mid(),
                tree.low,
                tree.high
            );
        }
    }
}

#[test]
fn plane_analytic_agrees_with_tree() {
    let m = plane(2, &[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..12 {
        let x = pt(rng.gen_range(-0.8..0.8), rng.gen_range(-0.5..0.5), 0.0);
        let r: f64 = rng.gen_range(0.1..1.0);
        let analytic = m.ball_mass(x, r, 30).unwrap();
        let tree = m.region_mass(&BallRegion { center: x, r }, 20);
        assert!(
            analytic.mid() >= tree.low - 1e-5 && analytic.mid() <= tree.high + 1e-5,
            "x={x:?} r={r} analytic={} tree=[{},{}]",
            analytic.mid(),
            tree.low,
            tree.high
        );
    }
}

#[test]
fn point_mass_ball_values() {
    let m = point_mass(2).unwrap();
    let v = m.ball_mass(ORIGIN, 0.5, 10).unwrap();
    assert_eq!((v.low, v.high), (1.0, 1.0));
    let v = m.ball_mass(pt(0.9, 0.0, 0.0), 0.5, 10).unwrap();
    assert_eq!((v.low, v.high), (0.0, 0.0));
    // boundary case stays ambiguous between open and closed ball
    let v = m.ball_mass(pt(0.5, 0.0, 0.0), 0.5, 10).unwrap();
    assert_eq!((v.low, v.high), (0.0, 1.0));
}

#[test]
fn ball_mass_preconditions() {
    let m = cantor_quarter();
    assert!(matches!(
        m.ball_mass(ORIGIN, 0.0, 10),
        Err(MeasureError::InvalidRadius(_))
    ));
    assert!(matches!(
        m.ball_mass(ORIGIN, 1e-14, 10),
        Err(MeasureError::DepthExceeded { .. })
    ));
}

fn check_conservation(m: &Measure, rounds: u32, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots = m.roots();
    let total: f64 = roots.iter().map(|n| n.mass).sum();
    assert!((total - 1.0).abs() < 1e-12, "root mass {total}");
    let mut node = pick_weighted(&roots, &mut rng);
    for _ in 0..rounds {
        let children = m.children_of(&node);
        if children.is_empty() {
            break;
        }
        let s: f64 = children.iter().map(|c| c.mass).sum();
        assert!(
            (s - node.mass).abs() <= 1e-12 * node.mass.max(1e-300) + 1e-300,
            "child sum {s} vs parent {} ({})",
            node.mass,
            m.kind_name()
        );
        for c in &children {
            for i in 0..m.ambient_dim() {
                assert!(
                    c.lo[i] >= node.lo[i] - 1e-12 && c.hi[i] <= node.hi[i] + 1e-12,
                    "child escapes parent box ({})",
                    m.kind_name()
                );
            }
        }
        node = pick_weighted(&children, &mut rng);
    }
}

#[test]
fn children_conserve_mass_across_kinds() {
    check_conservation(&lebesgue_ball(2).unwrap(), 12, 1);
    check_conservation(&lebesgue_ball(3).unwrap(), 8, 2);
    check_conservation(&plane(3, &[0, 1]).unwrap(), 10, 3);
    check_conservation(&point_mass(1).unwrap(), 10, 4);
    check_conservation(&cantor_quarter(), 15, 5);
    let sched = SpliceSchedule::new(0.5, BlockGrowth::Linear, 30).unwrap();
    let spl = splice(
        uniform_rule(2),
        crate::constructions::plane_rule(vec![0], 2),
        &sched,
        2,
    )
    .unwrap();
    check_conservation(&spl, 15, 6);
    let prod = product_measure(cantor_quarter(), cantor_quarter()).unwrap();
    check_conservation(&prod, 15, 7);
    let mix = shifted_mixture();
    check_conservation(&mix, 12, 8);
    check_conservation(&cantor_quarter().translate(pt(0.3, 0.0, 0.0)), 15, 9);
}

/// Mixture of two 1/4-Cantor copies on [0, 1/4] and [3/4, 1].
fn shifted_mixture() -> Measure {
    let left = cantor_quarter().affine(4.0, ORIGIN, 1.0);
    let right = cantor_quarter().affine(4.0, pt(-3.0, 0.0, 0.0), 1.0);
    // affine views keep mass 1 and shrink the root box
    mixture(vec![(0.5, left), (0.5, right)]).unwrap()
}

#[test]
fn translate_shifts_ball_queries() {
    let m = cantor_quarter();
    let t = m.translate(pt(0.4, 0.0, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let c: f64 = rng.gen_range(-0.6..0.6);
        let r: f64 = rng.gen_range(0.02..0.5);
        let a = t.ball_mass(pt(c, 0.0, 0.0), r, 40).unwrap();
        let b = m.ball_mass(pt(c + 0.4, 0.0, 0.0), r, 40).unwrap();
        assert!((a.mid() - b.mid()).abs() < 1e-9, "c={c} r={r}");
    }
}

#[test]
fn nested_views_flatten() {
    let m = cantor_quarter();
    let chained = m
        .translate(pt(0.1, 0.0, 0.0))
        .translate(pt(0.2, 0.0, 0.0));
    let direct = m.translate(pt(0.3, 0.0, 0.0));
    // one layer deep after flattening
    if let Kind::Affine(v) = &chained.kind {
        assert!(!matches!(v.base.kind, Kind::Affine(_)));
    } else {
        panic!("expected view");
    }
    // shift composition rounds in the last ulp, so compare enclosures
    let a = chained.ball_mass(pt(0.05, 0.0, 0.0), 0.3, 40).unwrap();
    let b = direct.ball_mass(pt(0.05, 0.0, 0.0), 0.3, 40).unwrap();
    assert!((a.mid() - b.mid()).abs() < 1e-6);
    assert!(a.low <= b.high + 1e-12 && b.low <= a.high + 1e-12);
}

#[test]
fn restrict_renormalizes() {
    let m = cantor_quarter();
    // left first-level cylinder carries mass 1/2
    let region = BoxRegion {
        lo: pt(-1.0, 0.0, 0.0),
        hi: pt(0.3, 1.0, 1.0),
    };
    let r = m.restrict(&region, 20).unwrap();
    let total: f64 = r.roots().iter().map(|n| n.mass).sum();
    assert!((total - 1.0).abs() < 1e-12);
    // left-left cylinder [0, 1/16] has conditional mass 1/2
    let v = r
        .region_mass(
            &BoxRegion {
                lo: pt(-1.0, 0.0, 0.0),
                hi: pt(0.07, 1.0, 1.0),
            },
            40,
        );
    assert!(v.low <= 0.5 + 1e-9 && v.high >= 0.5 - 1e-9, "{v:?}");
    assert!(v.width() < 1e-6);
}

#[test]
fn restrict_empty_region_errors() {
    let m = cantor_quarter();
    let region = BoxRegion {
        lo: pt(0.3, 0.0, 0.0),
        hi: pt(0.7, 1.0, 1.0),
    };
    assert!(matches!(
        m.restrict(&region, 20),
        Err(MeasureError::ZeroMass)
    ));
}

#[test]
fn restrict_of_restriction_is_rejected() {
    let m = cantor_quarter();
    let region = BoxRegion {
        lo: pt(-1.0, 0.0, 0.0),
        hi: pt(0.3, 1.0, 1.0),
    };
    let r = m.restrict(&region, 10).unwrap();
    assert!(matches!(
        r.restrict(&region, 10),
        Err(MeasureError::UnsupportedKind(_))
    ));
}

#[test]
fn sampling_is_deterministic_and_in_support() {
    let m = cantor_quarter();
    let a = m.support_sample(32, 99);
    let b = m.support_sample(32, 99);
    assert_eq!(a, b);
    let c = m.support_sample(32, 100);
    assert_ne!(a, c);
    for p in &a {
        assert!(m.point_in_support(p), "{p:?}");
        // sampled points sit inside level-2 cylinders
        let frac = p[0] * 16.0;
        let cell = frac.floor() as i64;
        assert!([0, 3, 12, 15].contains(&(cell.clamp(0, 15))), "{p:?}");
    }
}

#[test]
fn deeper_enclosures_nest() {
    let m = cantor_salli(0.25).unwrap();
    let region = BallRegion {
        center: pt(0.31, 0.0, 0.0),
        r: 0.27,
    };
    let mut prev: Option<MassInterval> = None;
    for depth in [4u32, 8, 12, 20, 32] {
        let v = m.region_mass(&region, depth);
        if let Some(p) = prev {
            assert!(
                v.nested_in(&p),
                "depth {depth}: [{},{}] not within [{},{}]",
                v.low,
                v.high,
                p.low,
                p.high
            );
        }
        prev = Some(v);
    }
}

#[test]
fn product_mass_factorizes_on_boxes() {
    let prod = product_measure(cantor_quarter(), cantor_quarter()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let (a, b) = {
            let u: f64 = rng.gen_range(0.0..0.9);
            (u, u + rng.gen_range(0.05..0.5))
        };
        let (c, d) = {
            let u: f64 = rng.gen_range(0.0..0.9);
            (u, u + rng.gen_range(0.05..0.5))
        };
        // box edges cut full columns of cells, so keep the depth moderate
        let v = prod.region_mass(
            &BoxRegion {
                lo: pt(a, c, 0.0),
                hi: pt(b, d, 0.0),
            },
            16,
        );
        let oracle =
            two_map_interval_mass(0.25, a, b, 60) * two_map_interval_mass(0.25, c, d, 60);
        assert!(
            oracle >= v.low - 1e-7 && oracle <= v.high + 1e-7,
            "box [{a},{b}]x[{c},{d}] oracle {oracle} got [{},{}]",
            v.low,
            v.high
        );
    }
}

#[test]
fn grid_cantor_rule_matches_ifs() {
    // arity-3 cantor stencil is the middle-thirds measure
    let g = grid_measure(crate::constructions::cantor_rule(0.25).unwrap(), 1).unwrap();
    let i = cantor_salli(0.25).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let x: f64 = rng.gen_range(0.0..1.0);
        let r: f64 = rng.gen_range(0.02..0.4);
        let a = g.ball_mass(pt(x, 0.0, 0.0), r, 40).unwrap();
        let b = i.ball_mass(pt(x, 0.0, 0.0), r, 40).unwrap();
        assert!(
            a.low <= b.high + 1e-9 && b.low <= a.high + 1e-9,
            "x={x} r={r} grid [{},{}] ifs [{},{}]",
            a.low,
            a.high,
            b.low,
            b.high
        );
    }
}

#[test]
fn depth_for_scale_reaches_requested_resolution() {
    let m = cantor_quarter();
    let d = m.depth_for_scale(0.01, 2);
    // ratio 1/4: cells at that depth are finer than 0.01 * 4^-2
    assert!(0.25_f64.powi(d as i32 - 2) <= 0.01 + 1e-12);
    let l = lebesgue_ball(2).unwrap();
    let d = l.depth_for_scale(0.1, 0);
    assert!(2.0 * 0.5_f64.powi(d as i32) <= 0.1 + 1e-12);
}
