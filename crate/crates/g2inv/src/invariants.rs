//! First-order scalar invariants and semi-invariants.
//!
//! The core [`first`] is generic over [`Scalar`], so running it on nested jets
//! yields exact derivatives of every quantity along the orbit space.

use crate::jet::Scalar;
use crate::metric::{inv_sym, negligible, sym, PointJets, DEFAULT_TOL};

/// Values of the first-order quantities at a point.
#[derive(Clone, Copy, Debug)]
pub struct First<T> {
    /// `σ = d ln |det h|`
    pub sigma: [T; 2],
    pub rho: [T; 3],
    pub chi: [T; 3],
    pub gamma: [T; 3],
    pub c_rho: T,
    pub q_rho: T,
    pub c_chi: T,
    pub q_chi: T,
    pub c_gamma: T,
    pub q_gamma: T,
    /// Vertical components of the curvature vector.
    pub curv: [T; 2],
    pub ell_c: T,
    pub theta_i: T,
    pub theta_ii: T,
    pub theta_iii: T,
    /// Signed square root of `|Q_γ|` carried by the determinant of `h` and its gradient.
    pub sigma_gamma: T,
    pub x: [T; 2],
    pub xperp: [T; 2],
    pub sign_h: f64,
    pub sign_gt: f64,
}

fn det3<T: Scalar>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `(C_μ, Q_μ) = (μ_ij g̃^ij, det μ / det g̃)`.
pub fn trace_det<T: Scalar>(mu: &[T; 3], gt: &[T; 3]) -> (T, T) {
    let det_gt = gt[0] * gt[2] - gt[1] * gt[1];
    let gi = inv_sym(gt, det_gt);
    let c = mu[0] * gi[0] + mu[1] * gi[1] * 2.0 + mu[2] * gi[2];
    let q = (mu[0] * mu[2] - mu[1] * mu[1]) / det_gt;
    (c, q)
}

pub fn first<T: Scalar>(j: &PointJets<T>) -> First<T> {
    let gt = j.gt.map(|x| x.value());
    let h = j.h.map(|x| x.value());
    let dh = [j.h.map(|x| x.d(0)), j.h.map(|x| x.d(1))];
    let det_h = j.det_h.value();
    let det_gt = j.det_gt.value();
    let ddet = [j.det_h.d(0), j.det_h.d(1)];
    let sigma = [ddet[0] / det_h, ddet[1] / det_h];
    let rho = [sigma[0] * sigma[0], sigma[0] * sigma[1], sigma[1] * sigma[1]];
    let chi_ij = |a: usize, b: usize| ((dh[a][0] * dh[b][2] + dh[b][0] * dh[a][2]) * 0.5 - dh[a][1] * dh[b][1]) / det_h;
    let chi = [chi_ij(0, 0), chi_ij(0, 1), chi_ij(1, 1)];
    let gamma = [chi[0] - rho[0] * 0.25, chi[1] - rho[1] * 0.25, chi[2] - rho[2] * 0.25];
    let (c_rho, q_rho) = trace_det(&rho, &gt);
    let (c_chi, q_chi) = trace_det(&chi, &gt);
    let (c_gamma, q_gamma) = trace_det(&gamma, &gt);

    let root_gt = det_gt.abs().sqrt();
    let root_h = det_h.abs().sqrt();
    let curv = [(j.fk(0, 0).d(1) - j.fk(1, 0).d(0)) / root_gt, (j.fk(0, 1).d(1) - j.fk(1, 1).d(0)) / root_gt];
    let hc = [sym(&h, 0, 0) * curv[0] + sym(&h, 0, 1) * curv[1], sym(&h, 1, 0) * curv[0] + sym(&h, 1, 1) * curv[1]];
    let ell_c = hc[0] * curv[0] + hc[1] * curv[1];
    let rows = |r3: [T; 3]| [dh[0], dh[1], r3];
    let theta_i = det3(rows([curv[1] * curv[1], -(curv[0] * curv[1]), curv[0] * curv[0]])) / (root_h * root_gt);
    let theta_ii = det3(rows([
        hc[0] * curv[1] * -2.0,
        h[0] * curv[0] * curv[0] - h[2] * curv[1] * curv[1],
        hc[1] * curv[0] * 2.0,
    ])) / (det_h * root_gt);
    let theta_iii = det3(rows([hc[0] * hc[0], hc[0] * hc[1], hc[1] * hc[1]])) / (root_h * root_h * root_h * root_gt);
    let sigma_gamma = det3([h, dh[0], dh[1]]) / (root_h * root_h * root_h * root_gt * 2.0);

    let gi = inv_sym(&gt, det_gt);
    let x =
        [sym(&gi, 0, 0) * sigma[0] + sym(&gi, 0, 1) * sigma[1], sym(&gi, 1, 0) * sigma[0] + sym(&gi, 1, 1) * sigma[1]];
    let xperp = [sigma[1] / root_gt, -sigma[0] / root_gt];
    First {
        sigma,
        rho,
        chi,
        gamma,
        c_rho,
        q_rho,
        c_chi,
        q_chi,
        c_gamma,
        q_gamma,
        curv,
        ell_c,
        theta_i,
        theta_ii,
        theta_iii,
        sigma_gamma,
        x,
        xperp,
        sign_h: det_h.re().signum(),
        sign_gt: det_gt.re().signum(),
    }
}

/// `(σ, ρ, χ, γ)` at a point.
pub fn base_forms(j: &PointJets) -> ([f64; 2], [f64; 3], [f64; 3], [f64; 3]) {
    let f = first(j);
    (f.sigma, f.rho, f.chi, f.gamma)
}

/// Identifiers of the six fundamental invariants, in canonical order.
pub const FUNDAMENTAL_IDS: [&str; 6] = ["C_rho", "C_chi", "Q_chi", "Q_gamma", "ell_C", "Theta_I_sq"];

/// Canonical id for an invariant name or alias.
pub fn canonical_id(name: &str) -> Option<usize> {
    let n = match name {
        "Crho" | "C_rho" => "C_rho",
        "Cchi" | "C_chi" => "C_chi",
        "Qchi" | "Q_chi" => "Q_chi",
        "Qgamma" | "Q_gamma" => "Q_gamma",
        "lC" | "ell_C" | "ellC" => "ell_C",
        "ThetaI2" | "Theta_I_sq" => "Theta_I_sq",
        _ => return None,
    };
    FUNDAMENTAL_IDS.iter().position(|k| *k == n)
}

impl<T: Scalar> First<T> {
    /// The six fundamentals in canonical order.
    pub fn six(&self) -> [T; 6] {
        [self.c_rho, self.c_chi, self.q_chi, self.q_gamma, self.ell_c, self.theta_i * self.theta_i]
    }
}

/// Value and term magnitude of `C_ρ` and `ℓ_C`, for zero tests.
pub struct ZeroTerms {
    pub c_rho: (f64, f64),
    pub ell_c: (f64, f64),
}

pub fn fundamental_terms(j: &PointJets) -> ZeroTerms {
    let f = first(j);
    let gi = inv_sym(&j.gt.map(|x| x.value()), j.det_gt.value());
    let s = f.sigma;
    let mag_rho = gi[0].abs() * s[0] * s[0] + 2.0 * (gi[1] * s[0] * s[1]).abs() + gi[2].abs() * s[1] * s[1];
    let h = j.h.map(|x| x.value());
    let c = f.curv;
    let mag_c = h[0].abs() * c[0] * c[0] + 2.0 * (h[1] * c[0] * c[1]).abs() + h[2].abs() * c[1] * c[1];
    ZeroTerms { c_rho: (f.c_rho, mag_rho), ell_c: (f.ell_c, mag_c) }
}

/// First-order invariants with the frame-derived extensions.
#[derive(Clone, Debug)]
pub struct Invariants1 {
    pub c_rho: f64,
    pub c_chi: f64,
    pub q_chi: f64,
    pub q_gamma: f64,
    pub ell_c: f64,
    pub theta_i_sq: f64,
    pub c_gamma: f64,
    pub q_rho: f64,
    pub theta_i: f64,
    pub theta_ii: f64,
    pub theta_iii: f64,
    pub sigma_gamma: f64,
    pub ell_h: f64,
    pub ell_hperp: f64,
    pub ell_cperp: f64,
    /// Present only where the frame `{H, H⊥, C, C⊥}` exists.
    pub oneill: Option<crate::oneill::OneillData>,
}

impl Invariants1 {
    pub fn six(&self) -> [f64; 6] {
        [self.c_rho, self.c_chi, self.q_chi, self.q_gamma, self.ell_c, self.theta_i_sq]
    }
}

/// The six fundamentals (plus cheap extras), without frame quantities.
pub fn fundamental(j: &PointJets) -> Invariants1 {
    let f = first(j);
    Invariants1 {
        c_rho: f.c_rho,
        c_chi: f.c_chi,
        q_chi: f.q_chi,
        q_gamma: f.q_gamma,
        ell_c: f.ell_c,
        theta_i_sq: f.theta_i * f.theta_i,
        c_gamma: f.c_gamma,
        q_rho: f.q_rho,
        theta_i: f.theta_i,
        theta_ii: f.theta_ii,
        theta_iii: f.theta_iii,
        sigma_gamma: f.sigma_gamma,
        ell_h: 0.25 * f.c_rho,
        ell_hperp: f.sign_gt * 0.25 * f.c_rho,
        ell_cperp: f.sign_h * f.ell_c,
        oneill: None,
    }
}

/// Fundamentals plus O'Neill-frame quantities where the frame is valid.
pub fn extended(j: &PointJets, tol: f64) -> Invariants1 {
    let mut inv = fundamental(j);
    inv.oneill = crate::oneill::oneill(j, tol).ok();
    inv
}

pub fn thetas(j: &PointJets) -> (f64, f64, f64) {
    let f = first(j);
    (f.theta_i, f.theta_ii, f.theta_iii)
}

/// 4D frame vectors in coordinates `(t1, t2, z1, z2)`.
#[derive(Clone, Copy, Debug)]
pub struct FrameData {
    pub x: [f64; 2],
    pub xperp: [f64; 2],
    /// Base components of `H`, `H⊥`.
    pub h: [f64; 2],
    pub hperp: [f64; 2],
    /// Vertical components of `C`, `C⊥`.
    pub c: [f64; 2],
    pub cperp: [f64; 2],
    pub ell_h: f64,
    pub ell_hperp: f64,
    pub ell_c: f64,
    pub ell_cperp: f64,
    pub horizontal_valid: bool,
    pub vertical_valid: bool,
    /// `(H, H⊥, C, C⊥)` as 4-vectors.
    pub vectors: [[f64; 4]; 4],
}

impl FrameData {
    pub fn valid(&self) -> bool {
        self.horizontal_valid && self.vertical_valid
    }

    pub fn notice(&self) -> Option<String> {
        (!self.valid()).then(|| {
            format!(
                "degenerate stratum: {}{}",
                if self.horizontal_valid { "" } else { "C_rho ≈ 0 " },
                if self.vertical_valid { "" } else { "ell_C ≈ 0" }
            )
            .trim_end()
            .to_string()
        })
    }
}

/// Horizontal lift of a base vector.
pub fn lift(j: &PointJets, v: [f64; 2]) -> [f64; 4] {
    let f = |i: usize, k: usize| j.fk(i, k).value();
    [v[0], v[1], -(v[0] * f(0, 0) + v[1] * f(1, 0)), -(v[0] * f(0, 1) + v[1] * f(1, 1))]
}

pub fn frame(j: &PointJets, tol: f64) -> FrameData {
    let f = first(j);
    let z = fundamental_terms(j);
    let h = j.h.map(|x| x.value());
    let root_h = f64::sqrt(f.sign_h * j.det_h.value());
    let hv = [-0.5 * f.x[0], -0.5 * f.x[1]];
    let hp = [-0.5 * f.xperp[0], -0.5 * f.xperp[1]];
    let c = f.curv;
    let cperp = [(h[1] * c[0] + h[2] * c[1]) / root_h, -(h[0] * c[0] + h[1] * c[1]) / root_h];
    let lh = lift(j, hv);
    let lhp = lift(j, hp);
    FrameData {
        x: f.x,
        xperp: f.xperp,
        h: hv,
        hperp: hp,
        c,
        cperp,
        ell_h: 0.25 * f.c_rho,
        ell_hperp: f.sign_gt * 0.25 * f.c_rho,
        ell_c: f.ell_c,
        ell_cperp: f.sign_h * f.ell_c,
        horizontal_valid: !negligible(z.c_rho.0, z.c_rho.1, tol) && f.c_rho != 0.0,
        vertical_valid: !negligible(z.ell_c.0, z.ell_c.1, tol) && f.ell_c != 0.0,
        vectors: [lh, lhp, [0.0, 0.0, c[0], c[1]], [0.0, 0.0, cperp[0], cperp[1]]],
    }
}

/// Relations whose terms are all below this are treated as identically zero.
pub const TERM_FLOOR: f64 = 1e-12;

/// One residual of a relation suite.
#[derive(Clone, Debug)]
pub struct RelationResidual {
    pub name: String,
    /// Signed residual divided by the largest term magnitude.
    pub residual: f64,
    pub raw: f64,
    pub scale: f64,
    /// Why the relation was not evaluated, if it was skipped.
    pub skipped: Option<String>,
    pub note: Option<String>,
}

impl RelationResidual {
    pub fn from_terms(name: &str, terms: &[f64]) -> RelationResidual {
        let raw: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let residual = if scale > TERM_FLOOR { raw / scale } else { 0.0 };
        RelationResidual { name: name.into(), residual, raw, scale, skipped: None, note: None }
    }

    pub fn skipped(name: &str, why: &str) -> RelationResidual {
        RelationResidual {
            name: name.into(),
            residual: 0.0,
            raw: 0.0,
            scale: 0.0,
            skipped: Some(why.into()),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.skipped.is_some() || self.residual.abs() < tol
    }
}

/// The first-order relation suite at a point.
pub fn relations_first(j: &PointJets, tol: f64) -> Vec<RelationResidual> {
    let f = first(j);
    let fr = frame(j, tol);
    let on = crate::oneill::oneill(j, tol);
    let mut out = Vec::new();
    let (sg, sh) = (f.sign_gt, f.sign_h);
    match &on {
        Ok(o) => {
            out.push(
                RelationResidual::from_terms("theta_c", &[f.theta_i * f.theta_i, -sg * sh * 16.0 * o.theta_c])
                    .with_note(format!("det g~ det h sign {:+}", sg * sh)),
            );
            out.push(RelationResidual::from_terms(
                "theta_cperp",
                &[f.theta_iii * f.theta_iii, -sg * sh * 16.0 * o.theta_cperp],
            ));
        }
        Err(_) if !fr.vertical_valid => {
            // Both sides vanish when the curvature vector is null.
            out.push(RelationResidual::from_terms("theta_c", &[f.theta_i * f.theta_i]));
            out.push(RelationResidual::from_terms("theta_cperp", &[f.theta_iii * f.theta_iii]));
        }
        Err(e) => {
            out.push(RelationResidual::skipped("theta_c", &e.to_string()));
            out.push(RelationResidual::skipped("theta_cperp", &e.to_string()));
        }
    }
    if !fr.vertical_valid {
        for n in ["t342", "gamma_root", "theta_quartic"] {
            out.push(RelationResidual::skipped(n, "ell_C ≈ 0"));
        }
        return out;
    }
    match &on {
        Ok(o) => out.push(RelationResidual::from_terms(
            "t342",
            &[
                f.theta_ii * f.theta_ii / (16.0 * f.ell_c * f.ell_c),
                sh * o.t342 * o.t342,
                sg * 0.25 * (f.q_chi - f.q_gamma),
            ],
        )),
        Err(e) => out.push(RelationResidual::skipped("t342", &e.to_string())),
    }
    let root = f.q_gamma.abs().sqrt();
    let branch = f.sigma_gamma.signum();
    out.push(
        RelationResidual::from_terms("gamma_root", &[-2.0 * f.ell_c * branch * root, sh * f.theta_i, f.theta_iii])
            .with_note(format!("root sign {branch:+}, det h sign {sh:+}")),
    );
    out.push(
        RelationResidual::from_terms(
            "theta_quartic",
            &[
                sg * 4.0 * f.q_chi * f.ell_c * f.ell_c,
                -8.0 * f.theta_i * branch * root * f.ell_c,
                sh * 4.0 * f.theta_i * f.theta_i,
                f.theta_ii * f.theta_ii,
            ],
        )
        .with_note(format!("root sign {branch:+}")),
    );
    out
}

pub fn relations_first_default(j: &PointJets) -> Vec<RelationResidual> {
    relations_first(j, DEFAULT_TOL)
}
