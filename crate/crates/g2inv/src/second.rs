//! Invariant differentiations and second-order invariants.

use crate::curvature::{
    christoffel, four_inverse, four_metric, lower, orbit_metric, ricci_from, riemann, sectional, values,
};
use crate::error::{Error, Result};
use crate::invariants::{first, trace_det, RelationResidual, FUNDAMENTAL_IDS};
use crate::jet::Jet2;
use crate::metric::{negligible, PointJets};

#[derive(Clone, Debug)]
pub struct Invariants2 {
    /// `X I_j` for the six fundamentals.
    pub xi: [f64; 6],
    /// `X⊥ I_j`.
    pub xperp_i: [f64; 6],
    pub c_ric: f64,
    pub q_ric: f64,
    pub c_nu: f64,
    pub c_nu_prime: f64,
    pub q_nu: f64,
    pub k_xi: f64,
    pub k_xiperp: f64,
    /// Commutator coefficients; absent where `C_ρ ≈ 0`.
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub x: [f64; 2],
    pub xperp: [f64; 2],
    /// `[X, X⊥]` on the orbit space.
    pub bracket: [f64; 2],
    pub six: [f64; 6],
    pub c_rho: f64,
    pub c_chi: f64,
    pub ell_c: f64,
    pub sign_gt: f64,
    pub sign_h: f64,
    pub notice: Option<String>,
}

fn need_order(j: &PointJets, k: usize) -> Result<()> {
    if j.order < k {
        return Err(Error::Invalid(format!("order-{k} jets required, got order {}", j.order)));
    }
    Ok(())
}

/// 1-jets of the six fundamentals via nested jet arithmetic.
pub fn fundamental_jets(j: &PointJets) -> Result<[Jet2; 6]> {
    need_order(j, 2)?;
    Ok(first(&j.nest().truncate(1)).six())
}

/// Gaussian curvature of a 2-metric from its order-2 jets.
pub fn gauss_curvature(gt: &[Jet2; 3]) -> f64 {
    let (e, f, g) = (gt[0], gt[1], gt[2]);
    let (ev, fv, gv) = (e.value(), f.value(), g.value());
    let m1 = [
        [-0.5 * e.d2(1, 1) + f.d2(0, 1) - 0.5 * g.d2(0, 0), 0.5 * e.d(0), f.d(0) - 0.5 * e.d(1)],
        [f.d(1) - 0.5 * g.d(0), ev, fv],
        [0.5 * g.d(1), fv, gv],
    ];
    let m2 = [[0.0, 0.5 * e.d(1), 0.5 * g.d(0)], [0.5 * e.d(1), ev, fv], [0.5 * g.d(0), fv, gv]];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    (det(m1) - det(m2)) / (ev * gv - fv * fv).powi(2)
}

pub fn second_invariants(j: &PointJets, tol: f64) -> Result<Invariants2> {
    need_order(j, 2)?;
    let nested = j.nest().truncate(1);
    let fj = first(&nested);
    let six_j = fj.six();
    let x = fj.x.map(|v| v.value());
    let xperp = fj.xperp.map(|v| v.value());
    let along = |v: &[f64; 2], q: &Jet2| v[0] * q.d(0) + v[1] * q.d(1);
    let xi = six_j.map(|q| along(&x, &q));
    let xperp_i = six_j.map(|q| along(&xperp, &q));
    let bracket =
        [along(&x, &fj.xperp[0]) - along(&xperp, &fj.x[0]), along(&x, &fj.xperp[1]) - along(&xperp, &fj.x[1])];

    let c_ric = 2.0 * gauss_curvature(&j.gt);
    let (g2, g2i) = orbit_metric(j);
    let (r2, _) = riemann(&g2, &g2i);
    let ric2 = ricci_from(&r2);
    let gt = j.gt.map(|v| v.value());
    let (_, q_ric) = trace_det(&[ric2[0][0], ric2[0][1], ric2[1][1]], &gt);

    let gam2 = christoffel(&g2, &g2i);
    let dh = j.det_h;
    let dv = dh.value();
    let sig = [dh.d(0) / dv, dh.d(1) / dv];
    let hess = |a: usize, b: usize| {
        let mut v = dh.d2(a, b) / dv - dh.d(a) * dh.d(b) / (dv * dv);
        for (k, s) in sig.iter().enumerate() {
            v -= gam2[k][a][b] * s;
        }
        v
    };
    let nu = [hess(0, 0), hess(0, 1), hess(1, 1)];
    let (c_nu, q_nu) = trace_det(&nu, &gt);

    let g4 = four_metric(j);
    let gi4 = four_inverse(j);
    let (r4, _) = riemann(&g4, &gi4);
    let rm = lower(&r4, &g4);
    let g4v = values(&g4);
    let f = |i: usize, k: usize| j.fk(i, k).value();
    let k_xi = sectional(&rm, &g4v, &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]);
    let e1 = [1.0, 0.0, -f(0, 0), -f(0, 1)];
    let e2 = [0.0, 1.0, -f(1, 0), -f(1, 1)];
    let k_xiperp = sectional(&rm, &g4v, &e1, &e2);

    let f0 = first(j);
    let z = crate::invariants::fundamental_terms(j);
    let generic_rho = !negligible(z.c_rho.0, z.c_rho.1, tol) && f0.c_rho != 0.0;
    let (j1, j2, notice) = if generic_rho {
        (Some(-xperp_i[0] / f0.c_rho), Some(xi[0] / f0.c_rho - c_nu), None)
    } else {
        (None, None, Some("C_rho ≈ 0: J1, J2 unavailable".to_string()))
    };
    Ok(Invariants2 {
        xi,
        xperp_i,
        c_ric,
        q_ric,
        c_nu,
        c_nu_prime: c_nu - 2.0 * f0.c_chi + f0.c_rho,
        q_nu,
        k_xi,
        k_xiperp,
        j1,
        j2,
        x,
        xperp,
        bracket,
        six: f0.six(),
        c_rho: f0.c_rho,
        c_chi: f0.c_chi,
        ell_c: f0.ell_c,
        sign_gt: f0.sign_gt,
        sign_h: f0.sign_h,
        notice,
    })
}

/// Value and gradient of one fundamental invariant field on the orbit space.
pub fn invariant_field_jet(j: &PointJets, id: usize) -> Result<Jet2> {
    if id >= 6 {
        return Err(Error::Invalid(format!("invariant index {id} out of range")));
    }
    Ok(fundamental_jets(j)?[id])
}

/// `(φ_{I¹}, φ_{I²})`: derivatives of `φ` with respect to the invariant pair.
pub fn directional_partials(inv2: &Invariants2, phi: usize, i1: usize, i2: usize, tol: f64) -> Result<(f64, f64)> {
    let (xa, xb, xp) = (inv2.xi[i1], inv2.xi[i2], inv2.xi[phi]);
    let (pa, pb, pp) = (inv2.xperp_i[i1], inv2.xperp_i[i2], inv2.xperp_i[phi]);
    let delta = xa * pb - xb * pa;
    let mag = (xa * pb).abs() + (xb * pa).abs();
    if negligible(delta, mag, tol) || delta == 0.0 {
        return Err(Error::DependentPair(delta));
    }
    Ok(((xp * pb - xb * pp) / delta, (xa * pp - xp * pa) / delta))
}

/// `|Δ|` of a pair and its term magnitude.
pub fn pair_delta(inv2: &Invariants2, i1: usize, i2: usize) -> (f64, f64) {
    let (xa, xb) = (inv2.xi[i1], inv2.xi[i2]);
    let (pa, pb) = (inv2.xperp_i[i1], inv2.xperp_i[i2]);
    (xa * pb - xb * pa, (xa * pb).abs() + (xb * pa).abs())
}

/// Names of the 20 invariants of order at most two.
pub fn order2_names() -> Vec<String> {
    let mut v: Vec<String> = FUNDAMENTAL_IDS.iter().map(|s| s.to_string()).collect();
    v.extend(FUNDAMENTAL_IDS.iter().map(|s| format!("X_{s}")));
    v.extend(FUNDAMENTAL_IDS.iter().map(|s| format!("Xperp_{s}")));
    v.push("C_ric".into());
    v.push("C_nu".into());
    v
}

pub fn order2_values(inv2: &Invariants2) -> [f64; 20] {
    let mut out = [0.0; 20];
    out[..6].copy_from_slice(&inv2.six);
    out[6..12].copy_from_slice(&inv2.xi);
    out[12..18].copy_from_slice(&inv2.xperp_i);
    out[18] = inv2.c_ric;
    out[19] = inv2.c_nu;
    out
}

/// Second-order relation suite at a point.
pub fn relations_second(j: &PointJets, tol: f64) -> Result<Vec<RelationResidual>> {
    let s = second_invariants(j, tol)?;
    let sg = s.sign_gt;
    let mut out = vec![
        RelationResidual::from_terms("ricci_det", &[s.q_ric, -0.25 * s.c_ric * s.c_ric]),
        RelationResidual::from_terms(
            "q_nu",
            &[
                4.0 * s.c_rho * s.c_rho * s.q_nu,
                s.xi[0] * s.xi[0],
                sg * s.xperp_i[0] * s.xperp_i[0],
                -2.0 * s.c_nu * s.c_rho * s.xi[0],
            ],
        ),
        RelationResidual::from_terms("k_leaf", &[s.k_xi, 0.25 * s.c_chi]),
        RelationResidual::from_terms("k_orthogonal", &[s.k_xiperp, -0.5 * s.c_ric, sg * 0.75 * s.ell_c]),
    ];
    match (s.j1, s.j2) {
        (Some(j1), Some(j2)) => {
            let r = [s.bracket[0] - j1 * s.x[0] - j2 * s.xperp[0], s.bracket[1] - j1 * s.x[1] - j2 * s.xperp[1]];
            let norm = |v: [f64; 2]| v[0].hypot(v[1]);
            let scale =
                norm(s.bracket).max(norm([j1 * s.x[0], j1 * s.x[1]])).max(norm([j2 * s.xperp[0], j2 * s.xperp[1]]));
            let raw = norm(r);
            out.push(RelationResidual {
                name: "commutator".into(),
                residual: if scale > crate::invariants::TERM_FLOOR { raw / scale } else { 0.0 },
                raw,
                scale,
                skipped: None,
                note: None,
            });
        }
        _ => out.push(RelationResidual::skipped("commutator", "C_rho ≈ 0")),
    }
    Ok(out)
}
