use std::collections::BTreeMap;

use g2inv::catalog::random_analytic;
use g2inv::expr::parse;
use g2inv::invariants::{first, relations_first};
use g2inv::jet::{finite_difference_jet, ArithOp, Jet2};
use g2inv::metric::DEFAULT_TOL;
use g2inv::rank::{jacobian_rank, random_probe, InvariantSet, DEFAULT_EPS};
use g2inv::report::float_text;
use g2inv::second::{relations_second, second_invariants};
use g2inv::transform::{invariance_row, pushforward_jets, PseudoTransform};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TEMPLATES: [&str; 6] = [
    "a*sin(b*t1 + c*t2)*exp(d*t2)",
    "(a + t1^2)/(2 + b*cosh(c*t2))",
    "sqrt(3 + a*t1^2 + b*t2^2 + c*t1*t2)",
    "tanh(a*t1 - d)*ln(2 + cos(b*t2))",
    "t1^3*t2 - a*t2^2 + b/(1.5 + sin(c*t1))",
    "cosh(a*t1)^2 - sinh(b*t2)^3 + tan(0.3*c*t1)",
];

fn coeff() -> impl Strategy<Value = f64> {
    -0.9f64..0.9
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..0.9, 0.1f64..0.9)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expression_jets_match_differences(
        k in 0..TEMPLATES.len(),
        (a, b, c, d) in (coeff(), coeff(), coeff(), coeff()),
        p in point(),
    ) {
        let e = parse(TEMPLATES[k]).unwrap();
        let params: BTreeMap<String, f64> =
            [("a", a), ("b", b), ("c", c), ("d", d)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let jet = e.eval_jet(&params, p, 2).unwrap();
        let fd = finite_difference_jet(|x, y| e.eval(&params, (x, y)), p, 2, 1e-3).unwrap();
        for s in 0..jet.coeffs().len() {
            prop_assert!(close(jet.coeffs()[s], fd.coeffs()[s], 1e-6), "slot {s}: {} vs {}", jet.coeffs()[s], fd.coeffs()[s]);
        }
    }

    #[test]
    fn printed_expressions_reparse(
        k in 0..TEMPLATES.len(),
        (a, b, c, d) in (coeff(), coeff(), coeff(), coeff()),
        p in point(),
    ) {
        let params: BTreeMap<String, f64> =
            [("a", a), ("b", b), ("c", c), ("d", d)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let e = parse(TEMPLATES[k]).unwrap().bind(&params);
        prop_assert!(e.identifiers().is_empty());
        let again = parse(&e.to_string()).unwrap();
        let none = BTreeMap::new();
        prop_assert_eq!(e.eval(&none, p).unwrap(), again.eval(&none, p).unwrap());
    }

    #[test]
    fn jet_division_inverts_multiplication(
        u in prop::collection::vec(-2.0f64..2.0, 6),
        v in prop::collection::vec(-2.0f64..2.0, 6),
    ) {
        let mut v = v;
        v[0] = 1.0 + v[0].abs();
        let a = Jet2::from_coeffs(2, &u).unwrap();
        let b = Jet2::from_coeffs(2, &v).unwrap();
        let back = Jet2::arith(&Jet2::arith(&a, &b, ArithOp::Mul).unwrap(), &b, ArithOp::Div).unwrap();
        for s in 0..6 {
            prop_assert!(close(back.coeffs()[s], a.coeffs()[s], 1e-12));
        }
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(float_text(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_order_relations_hold(seed in 0u64..10_000, p in point()) {
        let j = random_analytic(seed).point_jets(p, 1).unwrap();
        for r in relations_first(&j, DEFAULT_TOL) {
            prop_assert!(r.holds(1e-8), "{} residual {} note {:?}", r.name, r.residual, r.note);
        }
    }

    #[test]
    fn second_order_relations_hold(seed in 0u64..10_000, p in point()) {
        let j = random_analytic(seed).point_jets(p, 2).unwrap();
        prop_assume!(second_invariants(&j, DEFAULT_TOL).is_ok());
        for r in relations_second(&j, DEFAULT_TOL).unwrap() {
            prop_assert!(r.holds(1e-7), "{} residual {}", r.name, r.residual);
        }
    }

    #[test]
    fn invariants_survive_transforms(seed in 0u64..10_000, tseed in any::<u64>(), p in point()) {
        let j = random_analytic(seed).point_jets(p, 1).unwrap();
        let t = PseudoTransform::random(&mut ChaCha8Rng::seed_from_u64(tseed));
        let row = invariance_row(&j, &t, DEFAULT_TOL).unwrap();
        prop_assert!(row.max_residual() < 1e-7, "{:?}", row.residuals);
        prop_assert!(row.signs_ok(1e-9), "{:?} vs {:?}", row.frame_signs, row.expected_signs);
    }

    #[test]
    fn pushforward_composes(seed in 0u64..10_000, tseed in any::<u64>(), p in point()) {
        let j = random_analytic(seed).point_jets(p, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(tseed);
        let (s, t) = (PseudoTransform::random(&mut rng), PseudoTransform::random(&mut rng));
        let step = pushforward_jets(&pushforward_jets(&j, &s).unwrap(), &t).unwrap();
        let direct = pushforward_jets(&j, &t.after(&s)).unwrap();
        prop_assert!(close(step.point.0, direct.point.0, 1e-12) && close(step.point.1, direct.point.1, 1e-12));
        for (x, y) in step.to_vec().iter().zip(direct.to_vec()) {
            prop_assert!(close(*x, y, 1e-9), "{x} vs {y}");
        }
        let (a, b) = (first(&step).six(), first(&direct).six());
        for k in 0..6 {
            prop_assert!(close(a[k], b[k], 1e-8));
        }
    }

    #[test]
    fn transform_documents_round_trip(tseed in any::<u64>(), p in point()) {
        let t = PseudoTransform::random(&mut ChaCha8Rng::seed_from_u64(tseed));
        let back = PseudoTransform::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), t.to_json());
        prop_assert_eq!(back.image(p).unwrap(), t.image(p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn generic_probes_have_full_rank(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for set in InvariantSet::ALL {
            let r = jacobian_rank(set, &random_probe(&mut rng, set.jet_order()), DEFAULT_EPS).unwrap();
            prop_assert_eq!(r.rank, set.expected_rank(), "{} sv {:?}", set.name(), r.singular_values);
        }
    }
}
