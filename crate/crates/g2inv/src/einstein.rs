//! Λ-vacuum residuals, the constant vector of the Λ-Kundu analysis and the
//! on-shell relation suite.

use crate::curvature::{four_inverse, four_metric, ricci_from, riemann, values, Gamma, Mat};
use crate::error::{Error, Result};
use crate::invariants::{first, fundamental_terms, RelationResidual};
use crate::jet::Scalar;
use crate::metric::{negligible, sym, PointJets};
use crate::second::second_invariants;

#[derive(Clone, Debug)]
pub struct Residual {
    /// `R_ab − Λ g_ab`.
    pub matrix: Mat<f64, 4>,
    pub max_abs: f64,
    pub scale: f64,
    pub normalized: f64,
}

pub fn christoffel4(j: &PointJets) -> Result<Gamma<f64, 4>> {
    if j.order < 1 {
        return Err(Error::Invalid("order-1 jets required".into()));
    }
    Ok(crate::curvature::christoffel(&four_metric(j), &four_inverse(j)))
}

pub fn ricci4(j: &PointJets) -> Result<Mat<f64, 4>> {
    if j.order < 2 {
        return Err(Error::Invalid("order-2 jets required".into()));
    }
    let (r, _) = riemann(&four_metric(j), &four_inverse(j));
    Ok(ricci_from(&r))
}

/// Largest coefficient over the 4-metric jets.
pub fn metric_scale(j: &PointJets) -> f64 {
    four_metric(j).iter().flatten().fold(0.0, |m, x| m.max(x.max_abs()))
}

pub fn residual(j: &PointJets, lambda: f64) -> Result<Residual> {
    let ric = ricci4(j)?;
    let g = values(&four_metric(j));
    let mut matrix = [[0.0; 4]; 4];
    let mut max_abs = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            matrix[a][b] = ric[a][b] - lambda * g[a][b];
            max_abs = max_abs.max(matrix[a][b].abs());
        }
    }
    let scale = metric_scale(j);
    Ok(Residual { matrix, max_abs, scale, normalized: if scale > 0.0 { max_abs / scale } else { max_abs } })
}

/// Divergence of the Einstein tensor, `∇^a G_ab`, from order-3 jets.
pub fn einstein_divergence(j: &PointJets) -> Result<[f64; 4]> {
    if j.order < 3 {
        return Err(Error::Invalid("order-3 jets required".into()));
    }
    let n = j.nest();
    let g = four_metric(&n);
    let gi = four_inverse(&n);
    let (r, gam) = riemann(&g, &gi);
    let ric = ricci_from(&r);
    let ginv = values(&gi);
    let gv = values(&g);
    let mut scal = ric[0][0].zero_like();
    for a in 0..4 {
        for b in 0..4 {
            scal = scal + ginv[a][b] * ric[a][b];
        }
    }
    let ein = |a: usize, b: usize| ric[a][b] - gv[a][b] * scal * 0.5;
    let mut out = [0.0; 4];
    for (b, ob) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                let gac = ginv[a][c].value();
                if gac == 0.0 {
                    continue;
                }
                let mut term = if c < 2 { ein(a, b).d(c) } else { 0.0 };
                for e in 0..4 {
                    term -= gam[e][c][a].value() * ein(e, b).value();
                    term -= gam[e][c][b].value() * ein(a, e).value();
                }
                acc += gac * term;
            }
        }
        *ob = acc;
    }
    Ok(out)
}

/// `√|det h| (h C)`: constant up to sign on Λ-vacuum metrics with `C_ρ ≠ 0`.
pub fn kundu_a(j: &PointJets) -> [f64; 2] {
    let f = first(j);
    let h = j.h.map(|x| x.value());
    let root = f.sign_h * j.det_h.value();
    let root = root.sqrt();
    [
        root * (sym(&h, 0, 0) * f.curv[0] + sym(&h, 1, 0) * f.curv[1]),
        root * (sym(&h, 0, 1) * f.curv[0] + sym(&h, 1, 1) * f.curv[1]),
    ]
}

#[derive(Clone, Debug)]
pub struct KunduA {
    pub samples: Vec<[f64; 2]>,
    /// Largest pairwise difference after aligning signs, relative to the largest norm.
    pub deviation: f64,
    pub notice: Option<String>,
}

pub fn kundu_a_constancy(jets: &[PointJets]) -> KunduA {
    let samples: Vec<[f64; 2]> = jets.iter().map(kundu_a).collect();
    let norm = |v: &[f64; 2]| v[0].hypot(v[1]);
    let big = samples.iter().map(norm).fold(0.0, f64::max);
    if big == 0.0 {
        return KunduA { samples, deviation: 0.0, notice: Some("A ≡ 0 (vacuous)".into()) };
    }
    let refv = samples.iter().copied().max_by(|a, b| norm(a).total_cmp(&norm(b))).unwrap_or([0.0; 2]);
    let mut dev = 0.0f64;
    for s in &samples {
        let sign = if s[0] * refv[0] + s[1] * refv[1] < 0.0 { -1.0 } else { 1.0 };
        dev = dev.max(norm(&[sign * s[0] - refv[0], sign * s[1] - refv[1]]));
    }
    KunduA { samples, deviation: dev / big, notice: None }
}

/// The on-shell relations satisfied by Λ-vacuum metrics (`Ric = Λ g`).
pub fn onshell_relations(j: &PointJets, lambda: f64, tol: f64) -> Result<Vec<RelationResidual>> {
    let s = second_invariants(j, tol)?;
    let f = first(j);
    let (sg, sgh) = (f.sign_gt, f.sign_gt * f.sign_h);
    let (cr, cc, qc, qg, l) = (f.c_rho, f.c_chi, f.q_chi, f.q_gamma, f.ell_c);
    let th = f.theta_i;
    let rg = f.sigma_gamma.signum() * qg.abs().sqrt();
    let (xcr, xpcr) = (s.xi[0], s.xperp_i[0]);
    let (xl, xpl) = (s.xi[4], s.xperp_i[4]);
    let dq = qc - qg;
    let note = format!("root sign {:+}", f.sigma_gamma.signum());
    let mut out = vec![
        RelationResidual::from_terms("orbit_curvature", &[s.c_ric, 0.5 * cc, -sg * 1.5 * l]),
        RelationResidual::from_terms("laplacian", &[s.c_nu, -sg * l, 4.0 * lambda, 0.5 * cr]),
        RelationResidual::from_terms(
            "xperp_c_rho",
            &[sg * xpcr * xpcr, 4.0 * qc * cr * cr, -16.0 * dq * cc * cr, 64.0 * dq * dq],
        ),
        RelationResidual::from_terms(
            "xperp_ell_c",
            &[sg * xpl * xpl, sgh * 4.0 * th * th, -sgh * 8.0 * l * rg * th, 4.0 * l * l * qc],
        )
        .with_note(note.clone()),
        RelationResidual::from_terms("x_c_rho", &[xcr, cr * cr, -cc * cr, 4.0 * lambda * cr, -sg * l * cr, 8.0 * dq]),
        RelationResidual::from_terms(
            "x_ell_c",
            &[
                dq * xl * xl,
                -sgh * cr * rg * th * xl,
                (3.0 * qc - 2.0 * qg) * cr * l * xl,
                (cc * cr * qc + 2.0 * cr * cr * qc - cr * cr * qg - 4.0 * qc * qc + 4.0 * qc * qg) * l * l,
                -sgh * (2.0 * cc * cr + cr * cr - 8.0 * qc) * rg * th * l,
                -8.0 * rg * rg * rg * th * l,
                sgh * (cc * cr - 0.25 * cr * cr - 4.0 * qc + 4.0 * qg) * th * th,
            ],
        )
        .with_note(note),
        RelationResidual::from_terms("equal_gauss", &[s.k_xiperp, -s.k_xi]),
    ];
    let z = fundamental_terms(j);
    if negligible(z.c_rho.0, z.c_rho.1, tol) {
        for r in out.iter_mut().filter(|r| r.name.starts_with("x")) {
            r.note = Some("C_rho ≈ 0 stratum".into());
        }
    }
    Ok(out)
}
