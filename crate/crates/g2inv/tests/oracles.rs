//! Values checked against independent sources: closed forms, a round sphere,
//! finite differences of the invariant fields, and exact identities.

#![allow(clippy::excessive_precision)]

use std::collections::BTreeMap;

use g2inv::catalog::{catalog_default, random_analytic, NAMES};
use g2inv::einstein::{einstein_divergence, kundu_a_constancy, residual, ricci4};
use g2inv::equivalence::vdb_oracle;
use g2inv::invariants::{extended, first, frame, relations_first};
use g2inv::metric::{Form, G2Metric, DEFAULT_TOL};
use g2inv::oneill::{oneill, Connection};
use g2inv::second::{directional_partials, fundamental_jets, second_invariants};

fn vdb() -> G2Metric {
    catalog_default("vdb").unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn sample_metrics() -> Vec<G2Metric> {
    let mut v = vec![vdb()];
    v.extend((1..=6).map(random_analytic));
    v
}

fn points(m: &G2Metric) -> Vec<(f64, f64)> {
    m.domain.unwrap().grid(3, 3)
}

#[test]
fn vdb_values_at_reference_point() {
    // Closed forms evaluated in 50-digit arithmetic.
    let want = [
        -1.9558210814143801,
        -0.70571137067843369,
        -0.010843734532336549,
        -0.59938721071015333,
        0.56721320521627168,
        0.19284133890221499,
    ];
    let got = first(&vdb().point_jets((0.5, 1.0), 1).unwrap()).six();
    for k in 0..6 {
        assert!(close(got[k], want[k], 1e-12), "invariant {k}: {} vs {}", got[k], want[k]);
    }
}

#[test]
fn vdb_oracle_matches_direct_values() {
    let m = vdb();
    for p in points(&m) {
        let s = first(&m.point_jets(p, 1).unwrap()).six();
        let o = vdb_oracle(s[0], s[4]).unwrap();
        for (k, idx) in [1, 2, 3, 5].into_iter().enumerate() {
            assert!(close(o[k], s[idx], 1e-9), "{p:?} {idx}: {} vs {}", o[k], s[idx]);
        }
    }
}

#[test]
fn vdb_finite_difference_mode() {
    let m = vdb();
    for p in points(&m) {
        let a = first(&m.point_jets(p, 1).unwrap()).six();
        let b = first(&m.fd_point_jets(p, 1, 1e-3).unwrap()).six();
        for k in 0..6 {
            assert!(close(a[k], b[k], 1e-8));
        }
    }
}

fn sphere() -> G2Metric {
    let vals = ["1", "0", "sin(t1)^2", "0", "0", "0", "0", "1", "0", "1"];
    let c: BTreeMap<String, String> =
        Form::Submersion.keys().iter().map(|k| k.to_string()).zip(vals.iter().map(|v| v.to_string())).collect();
    G2Metric::new("sphere_x_plane", Form::Submersion, BTreeMap::new(), &c, None).unwrap()
}

#[test]
fn unit_sphere_times_plane() {
    let j = sphere().point_jets((0.7, 0.2), 2).unwrap();
    let s = second_invariants(&j, DEFAULT_TOL).unwrap();
    assert!((s.k_xiperp - 1.0).abs() < 1e-12, "orbit-orthogonal curvature {}", s.k_xiperp);
    assert!(s.k_xi.abs() < 1e-12);
    assert!((s.c_ric - 2.0).abs() < 1e-12, "C_ric {}", s.c_ric);
    let ric = ricci4(&j).unwrap();
    let sin2 = 0.7f64.sin().powi(2);
    assert!((ric[0][0] - 1.0).abs() < 1e-12 && (ric[1][1] - sin2).abs() < 1e-12);
    assert!(ric[2][2].abs() < 1e-12 && ric[3][3].abs() < 1e-12);
}

#[test]
fn flat_space_has_zero_ricci() {
    let m = catalog_default("flat").unwrap();
    let ric = ricci4(&m.point_jets((0.1, 0.2), 2).unwrap()).unwrap();
    assert!(ric.iter().flatten().all(|v| v.abs() < 1e-14));
}

#[test]
fn ricci_needs_second_order() {
    assert!(ricci4(&vdb().point_jets((0.5, 1.0), 1).unwrap()).is_err());
}

#[test]
fn orbit_gauss_curvature_is_quarter_c_chi() {
    let m = vdb();
    for p in m.domain.unwrap().grid(5, 2) {
        let j = m.point_jets(p, 2).unwrap();
        let s = second_invariants(&j, DEFAULT_TOL).unwrap();
        assert!(close(s.k_xi, -0.25 * s.c_chi, 1e-8), "{} vs {}", s.k_xi, -0.25 * s.c_chi);
    }
}

#[test]
fn frame_lengths_and_orthogonality() {
    for m in sample_metrics() {
        for p in points(&m) {
            let j = m.point_jets(p, 1).unwrap();
            let fr = frame(&j, DEFAULT_TOL);
            assert!(fr.valid());
            let conn = Connection::new(&j);
            let v = fr.vectors;
            let lens = [fr.ell_h, fr.ell_hperp, fr.ell_c, fr.ell_cperp];
            let scale = lens.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for a in 0..4 {
                assert!(close(conn.dot(&v[a], &v[a]), lens[a], 1e-10), "{} length {a}", m.name);
                for b in a + 1..4 {
                    assert!(conn.dot(&v[a], &v[b]).abs() < 1e-10 * scale, "{} ({a},{b})", m.name);
                }
            }
            let f = first(&j);
            assert!(close(fr.ell_h, 0.25 * f.c_rho, 1e-14));
        }
    }
}

#[test]
fn integrability_tensor_components() {
    for m in sample_metrics() {
        for p in points(&m) {
            let j = m.point_jets(p, 1).unwrap();
            let f = first(&j);
            let o = oneill(&j, DEFAULT_TOL).unwrap();
            let lh = 0.25 * f.c_rho;
            assert!(close(o.a123, -0.5 * f.ell_c, 1e-10));
            assert!(close(o.a213, f.sign_gt * 0.5 * f.ell_c, 1e-10));
            assert!(close(o.a312, -0.5 * lh, 1e-10));
            assert!(close(o.a321, 0.5 * lh, 1e-10));
        }
    }
}

#[test]
fn shape_tensor_support() {
    // T vanishes on a horizontal first argument; otherwise it maps
    // vertical to horizontal and horizontal to vertical.
    for m in sample_metrics() {
        for p in points(&m) {
            let o = oneill(&m.point_jets(p, 1).unwrap(), DEFAULT_TOL).unwrap();
            let scale = o.t.iter().flatten().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let zero = b < 2 || (a < 2) == (c < 2);
                        if zero {
                            assert!(
                                o.t[a][b][c].abs() < 1e-9 * scale,
                                "{} T[{a}][{b}][{c}] = {}",
                                m.name,
                                o.t[a][b][c]
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn theta_identities() {
    for m in sample_metrics() {
        for p in points(&m) {
            let j = m.point_jets(p, 1).unwrap();
            let inv = extended(&j, DEFAULT_TOL);
            let o = inv.oneill.as_ref().unwrap();
            assert!(close(inv.theta_ii, 4.0 * inv.ell_c * o.t332, 1e-10));
            let sgh = j.sign_det_gt() * j.sign_det_h();
            assert!(close(inv.theta_i_sq, sgh * 16.0 * o.theta_c, 1e-10));
            assert!(close(first(&j).sigma_gamma.powi(2), inv.q_gamma.abs(), 1e-10));
            assert!(relations_first(&j, DEFAULT_TOL).iter().all(|r| r.holds(1e-10)));
        }
    }
}

#[test]
fn fundamental_jets_match_differences_of_fields() {
    let h = 1e-5;
    for m in sample_metrics() {
        let p = m.domain.unwrap().grid(3, 3)[4];
        let jets = fundamental_jets(&m.point_jets(p, 2).unwrap()).unwrap();
        let at = |x: f64, y: f64| first(&m.point_jets((x, y), 1).unwrap()).six();
        let (xp, xm) = (at(p.0 + h, p.1), at(p.0 - h, p.1));
        let (yp, ym) = (at(p.0, p.1 + h), at(p.0, p.1 - h));
        for k in 0..6 {
            assert!(close(jets[k].d(0), (xp[k] - xm[k]) / (2.0 * h), 1e-6), "{} d1 I{k}", m.name);
            assert!(close(jets[k].d(1), (yp[k] - ym[k]) / (2.0 * h), 1e-6), "{} d2 I{k}", m.name);
        }
    }
}

#[test]
fn vdb_signature_slope_matches_closed_signature() {
    let m = vdb();
    let p = (0.6, 1.1);
    let j = m.point_jets(p, 2).unwrap();
    let s2 = second_invariants(&j, DEFAULT_TOL).unwrap();
    let (d_rho, d_ell) = directional_partials(&s2, 1, 0, 4, DEFAULT_TOL).unwrap();
    let f = first(&j);
    let h = 1e-6;
    let c = |cr: f64, l: f64| vdb_oracle(cr, l).unwrap()[0];
    let want_rho = (c(f.c_rho * (1.0 + h), f.ell_c) - c(f.c_rho * (1.0 - h), f.ell_c)) / (2.0 * h * f.c_rho);
    let want_ell = (c(f.c_rho, f.ell_c * (1.0 + h)) - c(f.c_rho, f.ell_c * (1.0 - h))) / (2.0 * h * f.ell_c);
    assert!(close(d_rho, want_rho, 1e-6), "{d_rho} vs {want_rho}");
    assert!(close(d_ell, want_ell, 1e-6), "{d_ell} vs {want_ell}");
}

#[test]
fn contracted_bianchi_identity() {
    let mut ms: Vec<G2Metric> =
        NAMES.iter().filter(|n| **n != "random_analytic").map(|n| catalog_default(n).unwrap()).collect();
    ms.extend((1..=3).map(random_analytic));
    for m in ms {
        for p in m.domain.unwrap().grid(2, 2) {
            let j = m.point_jets(p, 3).unwrap();
            let d = einstein_divergence(&j).unwrap();
            let scale = ricci4(&j).unwrap().iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
            assert!(d.iter().all(|v| v.abs() < 1e-10 * scale), "{} {d:?}", m.name);
        }
    }
}

#[test]
fn einstein_residuals_of_catalog_solutions() {
    for (n, lambda) in
        [("ppwave1", 0.0), ("ppwave2", 0.0), ("ppwave3", 0.0), ("lambda_kundu", 3.0), ("lambda_kundu_c0", 3.0)]
    {
        let m = catalog_default(n).unwrap();
        for p in points(&m) {
            let r = residual(&m.point_jets(p, 2).unwrap(), lambda).unwrap();
            assert!(r.normalized < 1e-12, "{n} {p:?} {}", r.normalized);
        }
    }
    // Shifting Λ must break it.
    let m = catalog_default("lambda_kundu").unwrap();
    assert!(residual(&m.point_jets((1.0, 0.0), 2).unwrap(), 2.0).unwrap().normalized > 1e-3);
}

#[test]
fn kundu_vector_is_constant() {
    for n in ["vdb", "lambda_kundu", "lambda_kundu_c0"] {
        let m = catalog_default(n).unwrap();
        let jets: Vec<_> = points(&m).iter().map(|p| m.point_jets(*p, 1).unwrap()).collect();
        let k = kundu_a_constancy(&jets);
        assert!(k.deviation < 1e-10, "{n} {}", k.deviation);
    }
}

#[test]
fn random_metrics_are_not_kundu() {
    let m = random_analytic(2);
    let jets: Vec<_> = points(&m).iter().map(|p| m.point_jets(*p, 1).unwrap()).collect();
    assert!(kundu_a_constancy(&jets).deviation > 1e-3);
}
