mod common;

use common::{derivative_gap, expr};
use proptest::prelude::*;
use walker_verify::catalog;
use walker_verify::chart::{einstein_residual_at, LAMBDA};
use walker_verify::domain::{Params, Point, Sampler};
use walker_verify::exec::Exec;
use walker_verify::expr::{evaluate, parse, Expr, Names};
use walker_verify::gauge::FlowTransform;
use walker_verify::killing::lie_bracket;
use walker_verify::walker::walker_point;

/// Expressions in `x, y` that stay finite on `[-1, 1]²`.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (-3i64..=3).prop_map(Expr::int),
        (-2.0f64..2.0).prop_map(Expr::real),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (b.sin() + 2)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(|a| (a.cos() + 2).ln()),
            (inner, 2i64..=3).prop_map(|(a, n)| a.powi(n)),
        ]
    })
}

fn xy(x: f64, y: f64) -> Point {
    Point::new([("x", x), ("y", y)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn derivative_matches_finite_differences(e in arb_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = xy(x, y);
        for var in ["x", "y"] {
            prop_assert!(derivative_gap(&e, var, &p).unwrap() < 1e-6, "d/d{var} of {e}");
        }
    }

    #[test]
    fn printing_then_parsing_preserves_values(e in arb_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let text = e.to_string();
        let back = parse(&text, &Names::new(["x", "y"], Vec::<String>::new())).unwrap();
        let p = xy(x, y);
        let (a, b) = (evaluate(&e, &p).unwrap(), evaluate(&back, &p).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{text}: {a} vs {b}");
    }

    #[test]
    fn derivative_is_linear(a in arb_expr(), b in arb_expr(), c in -3i64..=3, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = xy(x, y);
        let lhs = evaluate(&(c * &a + &b).derivative("x"), &p).unwrap();
        let rhs = c as f64 * evaluate(&a.derivative("x"), &p).unwrap() + evaluate(&b.derivative("x"), &p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn derivative_obeys_product_rule(a in arb_expr(), b in arb_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let p = xy(x, y);
        let ev = |e: &Expr| evaluate(e, &p).unwrap();
        let lhs = ev(&(&a * &b).derivative("y"));
        let rhs = ev(&a.derivative("y")) * ev(&b) + ev(&a) * ev(&b.derivative("y"));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn bracket_is_antisymmetric(a in arb_expr(), b in arb_expr(), c in arb_expr(), d in arb_expr(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let coords = vec!["x".to_string(), "y".to_string()];
        let k1 = walker_verify::killing::VectorField::new(vec![a, b]);
        let k2 = walker_verify::killing::VectorField::new(vec![c, d]);
        let (l, r) = (lie_bracket(&k1, &k2, &coords).unwrap(), lie_bracket(&k2, &k1, &coords).unwrap());
        let p = xy(x, y);
        for (s, t) in l.components.iter().zip(&r.components) {
            let (s, t) = (evaluate(s, &p).unwrap(), evaluate(t, &p).unwrap());
            prop_assert!((s + t).abs() <= 1e-9 * (1.0 + s.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn serial_and_parallel_sampling_agree(seed in any::<u64>(), n in 1usize..200) {
        let e = catalog::build("example2").unwrap();
        let params = e.params(-1.0);
        let serial = Sampler::new(n, seed).with_exec(Exec::Serial).points(e.domain(), &params).unwrap();
        let parallel = Sampler::new(n, seed).with_exec(Exec::Parallel).points(e.domain(), &params).unwrap();
        prop_assert_eq!(serial, parallel);
    }

    #[test]
    fn example1_is_einstein_for_any_negative_lambda(
        lambda in -3.0f64..-0.2,
        v in -1.0f64..1.0,
        x in 0.3f64..2.0,
        y in -1.0f64..1.0,
        u in -0.5f64..0.5,
    ) {
        let g = catalog::build("example1").unwrap().walker().assemble().unwrap();
        let p = walker_point(v, x, y, u).with_param(LAMBDA, lambda);
        prop_assert!(einstein_residual_at(&g, lambda, &p).unwrap().relative < 1e-9);
    }

    #[test]
    fn flow_round_trip_returns_home(x in 0.5f64..1.8, y in -1.0f64..1.0, u in -0.5f64..0.5) {
        let original = catalog::build("example1-original").unwrap();
        let flow = FlowTransform::from_walker(original.walker(), 0.0).unwrap();
        let params = Params::from([(LAMBDA.to_string(), -1.0)]);
        let there = flow.integrate(x, y, 0.0, u, &params).unwrap();
        let back = flow.integrate(there.x, there.y, u, 0.0, &params).unwrap();
        prop_assert!((back.x - x).abs() < 1e-8 && (back.y - y).abs() < 1e-8);
    }
}

#[test]
fn parse_rejects_unknown_names() {
    assert!(parse("x + q", &Names::new(["x"], Vec::<String>::new())).is_err());
    assert!(expr("Lambda*x").parameters().contains(LAMBDA));
}
