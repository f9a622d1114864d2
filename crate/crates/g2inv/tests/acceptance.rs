//! Acceptance suite: one line per criterion.
//!
//! Each criterion carries an expected status. Criteria that cannot hold for
//! the metrics as given are expected to fail; they still run in full, print
//! FAIL with the measured numbers, and the harness checks that the failure
//! has exactly the documented shape.

use std::process::ExitCode;
use std::time::Instant;

use g2inv::catalog::{catalog, catalog_default, random_analytic, ParamValue, Params};
use g2inv::einstein::{kundu_a_constancy, onshell_relations, residual};
use g2inv::equivalence::{characterize_vdb, compare_sources, Verdict, DEFAULT_PAIR};
use g2inv::invariants::{extended, first, relations_first};
use g2inv::jet::{coeff_count, finite_difference_jet};
use g2inv::metric::{G2Metric, Rect, DEFAULT_TOL};
use g2inv::rank::{jacobian_rank, random_probe, InvariantSet, DEFAULT_EPS};
use g2inv::second::relations_second;
use g2inv::source::MetricSource;
use g2inv::transform::{invariance_report, PseudoTransform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    /// Whether the detailed breakdown matches the documented expectation.
    shape_ok: bool,
    detail: String,
}

impl Outcome {
    fn plain(passed: bool, detail: String) -> Outcome {
        Outcome { passed, shape_ok: true, detail }
    }
}

type Criterion = (&'static str, fn() -> Outcome, Expect);

enum Expect {
    Pass,
    Fail(&'static str),
}

fn vdb() -> G2Metric {
    catalog_default("vdb").unwrap()
}

fn ten_points(m: &G2Metric) -> Vec<(f64, f64)> {
    m.domain.unwrap().grid(5, 2)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Closed-form fundamentals of the Van den Bergh metric.
fn vdb_closed(t1: f64, t2: f64) -> [f64; 6] {
    let a = 6f64.sqrt() * t1;
    let (ch, sh) = (a.cosh(), a.sinh());
    let (c2, s2) = (t2.cosh(), t2.sinh());
    [
        -4.0 * c2.powi(2) / (ch * s2.powi(6)),
        -6.0 * (sh.powi(2) - 1.0) / (ch.powi(3) * s2.powi(4)),
        6.0 * sh.powi(2) * (-6.0 * s2.powi(2) + c2.powi(2) * ch.powi(2)) / (ch.powi(6) * s2.powi(10)),
        -36.0 * sh.powi(2) / (ch.powi(6) * s2.powi(8)),
        2.0 / (ch * s2.powi(4)),
        144.0 * sh.powi(2) / (s2.powi(16) * ch.powi(8)),
    ]
}

fn closed_form_invariants() -> Outcome {
    let m = vdb();
    let grid = Rect::new((0.3, 1.2), (0.7, 1.5)).grid(5, 4);
    let (mut jet_err, mut fd_err) = (0.0f64, 0.0f64);
    for &p in &grid {
        let want = vdb_closed(p.0, p.1);
        let got = first(&m.point_jets(p, 1).unwrap()).six();
        let fd = first(&m.fd_point_jets(p, 1, 1e-3).unwrap()).six();
        for k in 0..6 {
            jet_err = jet_err.max(rel(got[k], want[k]));
            fd_err = fd_err.max(rel(fd[k], want[k]));
        }
    }
    Outcome::plain(
        jet_err < 1e-9 && fd_err < 1e-6,
        format!("20 points; max rel error jets {jet_err:.1e} (tol 1e-9), finite differences {fd_err:.1e} (tol 1e-6)"),
    )
}

fn vdb_ricci_flat() -> Outcome {
    let m = vdb();
    let grid = Rect::new((0.3, 1.2), (0.7, 1.5)).grid(5, 4);
    let (mut worst, mut best) = (0.0f64, f64::INFINITY);
    for &p in &grid {
        let r = residual(&m.point_jets(p, 2).unwrap(), 0.0).unwrap().normalized;
        worst = worst.max(r);
        best = best.min(r);
    }
    // The documented shape: clearly nonzero everywhere, not a roundoff artefact.
    Outcome {
        passed: worst < 1e-8,
        shape_ok: best > 1e-6,
        detail: format!("normalized residual in [{best:.2e}, {worst:.2e}] (tol 1e-8)"),
    }
}

fn kv(pairs: &[(&str, &str)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), ParamValue::parse(v))).collect()
}

fn einstein_max(m: &G2Metric, lambda: f64) -> f64 {
    ten_points(m)
        .iter()
        .map(|p| residual(&m.point_jets(*p, 2).unwrap(), lambda).unwrap().normalized)
        .fold(0.0, f64::max)
}

fn lambda_vacuum() -> Outcome {
    let cases: Vec<(&str, G2Metric, f64, bool)> = vec![
        (
            "ppwave1 R=S=exp(t1), W=2t1",
            catalog("ppwave1", &kv(&[("R", "exp(t1)"), ("S", "exp(t1)"), ("W", "2*t1")])).unwrap(),
            0.0,
            false,
        ),
        ("ppwave1 R=S=cos(t1), W=2t1", catalog_default("ppwave1").unwrap(), 0.0, true),
        ("ppwave2 c=2", catalog("ppwave2", &kv(&[("c", "2"), ("psi", "2*t1^2")])).unwrap(), 0.0, true),
        ("ppwave3 c=1", catalog("ppwave3", &kv(&[("c", "1"), ("psi", "exp(t1)")])).unwrap(), 0.0, true),
        (
            "lambda_kundu c=1 L=3",
            catalog("lambda_kundu", &kv(&[("c", "1"), ("Lambda", "3"), ("psi", "0")])).unwrap(),
            3.0,
            true,
        ),
        (
            "lambda_kundu_c0 L=3",
            catalog("lambda_kundu_c0", &kv(&[("Lambda", "3"), ("psi", "t1^3")])).unwrap(),
            3.0,
            true,
        ),
    ];
    let mut passed = true;
    let mut shape_ok = true;
    let mut parts = Vec::new();
    for (label, m, lambda, expect_vacuum) in &cases {
        let r = einstein_max(m, *lambda);
        let ok = r < 1e-8;
        passed &= ok;
        shape_ok &= ok == *expect_vacuum;
        parts.push(format!("{label}: {r:.1e}"));
    }
    Outcome { passed, shape_ok, detail: parts.join("; ") }
}

fn corpus() -> Vec<G2Metric> {
    let mut v = vec![vdb()];
    v.extend((1..=5).map(random_analytic));
    v
}

fn first_order_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut literal_fail = Vec::new();
    let mut shape_ok = true;
    let mut skipped = 0;
    for m in corpus() {
        let mut lit = 0.0f64;
        let mut sign = 0.0;
        for p in ten_points(&m) {
            let j = m.point_jets(p, 1).unwrap();
            for r in relations_first(&j, DEFAULT_TOL) {
                if r.skipped.is_some() {
                    skipped += 1;
                } else {
                    worst = worst.max(r.residual.abs());
                }
            }
            let inv = extended(&j, DEFAULT_TOL);
            if let Some(o) = &inv.oneill {
                lit = lit.max(rel(inv.theta_i_sq, 16.0 * o.theta_c));
            }
            sign = j.sign_det_gt() * j.sign_det_h();
        }
        if lit > 1e-8 {
            literal_fail.push(m.name.clone());
        }
        shape_ok &= (lit > 1e-8) == (sign < 0.0);
    }
    Outcome {
        passed: worst < 1e-8,
        shape_ok,
        detail: format!(
            "6 metrics x 10 points, max residual {worst:.1e} (tol 1e-8), {skipped} skipped; \
             unsigned Theta_I^2 = 16 Theta_C fails on [{}] where sgn(det g~)sgn(det h) = -1",
            literal_fail.join(", ")
        ),
    }
}

fn second_order_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    for m in corpus() {
        for p in ten_points(&m) {
            for r in relations_second(&m.point_jets(p, 2).unwrap(), DEFAULT_TOL).unwrap() {
                if r.skipped.is_none() && r.residual.abs() > worst {
                    worst = r.residual.abs();
                    worst_name = format!("{} on {}", r.name, m.name);
                }
            }
        }
    }
    Outcome::plain(worst < 1e-7, format!("6 metrics x 10 points, max residual {worst:.1e} ({worst_name}) (tol 1e-7)"))
}

fn onshell_suite() -> Outcome {
    let cases: [(G2Metric, f64); 3] = [
        (vdb(), 0.0),
        (catalog_default("lambda_kundu").unwrap(), 3.0),
        (catalog_default("lambda_kundu_c0").unwrap(), 3.0),
    ];
    let mut passed = true;
    let mut shape_ok = true;
    let mut parts = Vec::new();
    for (m, lambda) in &cases {
        let jets: Vec<_> = ten_points(m).iter().map(|p| m.point_jets(*p, 3).unwrap()).collect();
        let mut failing = std::collections::BTreeSet::new();
        let mut worst = 0.0f64;
        for j in &jets {
            for r in onshell_relations(j, *lambda, DEFAULT_TOL).unwrap() {
                if r.skipped.is_none() {
                    worst = worst.max(r.residual.abs());
                    if r.residual.abs() >= 1e-7 {
                        failing.insert(r.name);
                    }
                }
            }
        }
        let ka = kundu_a_constancy(&jets);
        passed &= failing.is_empty() && ka.deviation < 1e-7;
        let failing: Vec<String> = failing.into_iter().collect();
        if m.name == "vdb" {
            // Not a vacuum metric: exactly the curvature-dependent relations break.
            shape_ok &= failing == ["equal_gauss", "orbit_curvature", "x_c_rho"];
        } else {
            shape_ok &= failing.is_empty() && ka.deviation < 1e-7;
        }
        parts.push(format!(
            "{}: max {worst:.1e}, failing [{}], kundu_A deviation {:.1e}{}",
            m.name,
            failing.join(", "),
            ka.deviation,
            ka.notice.map(|n| format!(" ({n})")).unwrap_or_default()
        ));
    }
    Outcome { passed, shape_ok, detail: parts.join("; ") }
}

fn ranks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut passed = true;
    let mut parts = Vec::new();
    for set in InvariantSet::ALL {
        let got: Vec<usize> = (0..5)
            .map(|_| jacobian_rank(set, &random_probe(&mut rng, set.jet_order()), DEFAULT_EPS).unwrap().rank)
            .collect();
        passed &= got.iter().all(|r| *r == set.expected_rank());
        parts.push(format!("{} {:?} (want {})", set.name(), got, set.expected_rank()));
    }
    Outcome::plain(passed, parts.join("; "))
}

fn invariance() -> Outcome {
    let m = vdb();
    let pts = ten_points(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst, mut signs) = (0.0f64, true);
    let mut eps_seen = std::collections::BTreeSet::new();
    for _ in 0..25 {
        let p = PseudoTransform::random(&mut rng);
        let r = invariance_report(&m, &p, &pts, DEFAULT_TOL).unwrap();
        worst = worst.max(r.max_residual);
        signs &= r.signs_ok;
        for row in &r.rows {
            eps_seen.insert((row.eps.0 as i32, row.eps.1 as i32));
        }
    }
    Outcome::plain(
        worst < 1e-7 && signs,
        format!("25 transforms x 10 points, max rel residual {worst:.1e} (tol 1e-7), sign laws {signs}, (eps1, eps2) seen {eps_seen:?}"),
    )
}

fn verdicts() -> Outcome {
    let base = vdb();
    let plain = MetricSource::Plain(base.clone());
    let fixed = PseudoTransform::parse(["t1 + 0.1*t2^2", "t2"], ["sin(t1)", "0"], [[2.0, 1.0], [0.0, 1.0]]).unwrap();
    let moved = MetricSource::Transformed { name: "vdb_transformed".into(), base: base.clone(), transform: fixed };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random = MetricSource::Transformed {
        name: "vdb_random_transform".into(),
        base: base.clone(),
        transform: PseudoTransform::random(&mut rng),
    };
    let lk = MetricSource::Plain(catalog_default("lambda_kundu").unwrap());
    let cmp = |a: &MetricSource, b: &MetricSource| {
        compare_sources(a, b, 12, DEFAULT_PAIR, 1e-4, None).unwrap().comparison.verdict
    };
    let v1 = cmp(&plain, &moved);
    let v2 = cmp(&plain, &random);
    let v3 = cmp(&plain, &lk);
    let pts = base.domain.unwrap().grid(5, 4);
    let ch = |s: &MetricSource| characterize_vdb(s, &pts, 1e-8).unwrap().holds;
    let (c1, c2, c3) = (ch(&plain), ch(&moved), ch(&lk));
    Outcome::plain(
        v1 == Verdict::Consistent && v2 == Verdict::Consistent && v3 != Verdict::Consistent && c1 && c2 && !c3,
        format!(
            "vdb~transformed {}, vdb~random transform {}, vdb~lambda_kundu {}; characterization vdb {c1}, transformed {c2}, lambda_kundu {c3}",
            v1.name(),
            v2.name(),
            v3.name()
        ),
    )
}

fn ppwave_vanishing() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in ["ppwave1", "ppwave2", "ppwave3"] {
        let m = catalog_default(n).unwrap();
        let mut w = 0.0f64;
        for p in ten_points(&m) {
            let j = m.point_jets(p, 1).unwrap();
            let s = j.scale();
            for v in first(&j).six() {
                w = w.max(v.abs() / s);
            }
        }
        worst = worst.max(w);
        parts.push(format!("{n} {w:.1e}"));
    }
    Outcome::plain(worst < 1e-9, format!("max |I|/scale: {} (tol 1e-9)", parts.join(", ")))
}

fn jets_vs_differences() -> Outcome {
    let mut metrics: Vec<G2Metric> = g2inv::catalog::NAMES
        .iter()
        .filter(|n| **n != "random_analytic")
        .map(|n| catalog_default(n).unwrap())
        .collect();
    metrics.extend((1..=5).map(random_analytic));
    let mut worst = 0.0f64;
    let mut count = 0;
    for m in &metrics {
        for p in ten_points(m) {
            let an = m.raw_jets(p, 2).unwrap();
            for (k, e) in m.components.iter().enumerate() {
                let fd = finite_difference_jet(|x, y| e.eval(&m.params, (x, y)), p, 2, 1e-3).unwrap();
                for s in 1..coeff_count(2) {
                    let (a, b) = (an[k].coeffs()[s], fd.coeffs()[s]);
                    worst = worst.max((a - b).abs() / a.abs().max(1.0));
                }
                count += 1;
            }
        }
    }
    Outcome::plain(
        worst < 1e-6,
        format!("{count} component jets, max first/second derivative error {worst:.1e} (tol 1e-6)"),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("vdb closed-form fundamentals", closed_form_invariants, Expect::Pass),
        ("vdb Ricci-flat", vdb_ricci_flat, Expect::Fail("the vdb metric as given is not Ricci-flat")),
        (
            "Lambda-vacuum catalog instances",
            lambda_vacuum,
            Expect::Fail(
                "ppwave1 with R=S=exp(t1), W=2t1 violates its own vacuum constraint; the default instance uses cos",
            ),
        ),
        ("first-order relations", first_order_suite, Expect::Pass),
        ("second-order relations", second_order_suite, Expect::Pass),
        (
            "on-shell relations and constant A",
            onshell_suite,
            Expect::Fail("vdb is not vacuum, so the curvature-dependent on-shell relations fail there"),
        ),
        ("Jacobian ranks 6 / 4 / 20", ranks, Expect::Pass),
        ("pseudogroup invariance and sign laws", invariance, Expect::Pass),
        ("equivalence verdicts", verdicts, Expect::Pass),
        ("pp-wave fundamentals vanish", ppwave_vanishing, Expect::Pass),
        ("analytic jets vs finite differences", jets_vs_differences, Expect::Pass),
    ];
    let mut unexpected = 0;
    for (i, (name, run, expect)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let o = run();
        let dt = t0.elapsed().as_secs_f64();
        let status = if o.passed { "PASS" } else { "FAIL" };
        let (expected_pass, reason) = match expect {
            Expect::Pass => (true, None),
            Expect::Fail(r) => (false, Some(r)),
        };
        let as_expected = o.passed == expected_pass && o.shape_ok;
        println!("[{status}] {:>2}. {name}: {} ({dt:.2}s)", i + 1, o.detail);
        if let Some(r) = reason {
            println!("          expected failure: {r}");
        }
        if !as_expected {
            unexpected += 1;
            println!("          UNEXPECTED: outcome or breakdown differs from the recorded expectation");
        }
    }
    if unexpected == 0 {
        println!("acceptance: all criteria behaved as recorded");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} criteria deviated from the recorded expectation");
        ExitCode::FAILURE
    }
}
