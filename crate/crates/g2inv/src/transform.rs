//! Adapted-coordinate changes `t̄ = φ(t)`, `z̄ = α z + ψ(t)` applied to
//! metric jets, and the invariance checks built on them.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::{parse, BinOp, Expr};
use crate::invariants::{first, frame, TERM_FLOOR};
use crate::jet::{coeff_count, multi_index, Jet2, MAX_ORDER};
use crate::metric::{det_sym, G2Metric, PointJets};

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoTransform {
    pub phi: [Expr; 2],
    pub psi: [Expr; 2],
    pub alpha: [[f64; 2]; 2],
}

fn det2(a: &[[f64; 2]; 2]) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn inv2(a: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = det2(a);
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

impl PseudoTransform {
    pub fn new(phi: [Expr; 2], psi: [Expr; 2], alpha: [[f64; 2]; 2]) -> Result<Self> {
        let d = det2(&alpha);
        if !d.is_finite() || d == 0.0 {
            return Err(Error::Degenerate("det alpha = 0".into()));
        }
        for e in phi.iter().chain(&psi) {
            if let Some(p) = e.identifiers().into_iter().next() {
                return Err(Error::Invalid(format!("transform expressions may only use t1, t2 (found '{p}')")));
            }
        }
        Ok(PseudoTransform { phi, psi, alpha })
    }

    pub fn identity() -> Self {
        PseudoTransform {
            phi: [Expr::var(0), Expr::var(1)],
            psi: [Expr::num(0.0), Expr::num(0.0)],
            alpha: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn parse(phi: [&str; 2], psi: [&str; 2], alpha: [[f64; 2]; 2]) -> Result<Self> {
        let p = |s: &str, k: &str| parse(s).map_err(|e| e.in_expr(k));
        PseudoTransform::new([p(phi[0], "phi1")?, p(phi[1], "phi2")?], [p(psi[0], "psi1")?, p(psi[1], "psi2")?], alpha)
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let obj = doc.as_object().ok_or_else(|| Error::Json("transform must be an object".into()))?;
        for k in obj.keys() {
            if !["phi1", "phi2", "psi1", "psi2", "alpha"].contains(&k.as_str()) {
                return Err(Error::UnknownKey(k.clone()));
            }
        }
        let s = |k: &str| -> Result<String> {
            match obj.get(k) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                Some(_) => Err(Error::Json(format!("'{k}' must be a string"))),
                None => Err(Error::MissingComponent(k.into())),
            }
        };
        let bad = || Error::Json("'alpha' must be [[a, b], [c, d]]".into());
        let rows = obj.get("alpha").ok_or_else(|| Error::MissingComponent("alpha".into()))?;
        let rows = rows.as_array().filter(|r| r.len() == 2).ok_or_else(bad)?;
        let mut alpha = [[0.0; 2]; 2];
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_array().filter(|r| r.len() == 2).ok_or_else(bad)?;
            for (j, v) in r.iter().enumerate() {
                alpha[i][j] = v.as_f64().ok_or_else(bad)?;
            }
        }
        PseudoTransform::parse([&s("phi1")?, &s("phi2")?], [&s("psi1")?, &s("psi2")?], alpha)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        PseudoTransform::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "phi1": self.phi[0].to_string(),
            "phi2": self.phi[1].to_string(),
            "psi1": self.psi[0].to_string(),
            "psi2": self.psi[1].to_string(),
            "alpha": self.alpha,
        })
    }

    /// Jets of `φ` and `ψ` at `point`.
    pub fn jets(&self, point: (f64, f64), order: usize) -> Result<([Jet2; 2], [Jet2; 2])> {
        let none = BTreeMap::new();
        let e = |x: &Expr, k: &str| x.eval_jet(&none, point, order).map_err(|e| e.in_expr(k));
        Ok(([e(&self.phi[0], "phi1")?, e(&self.phi[1], "phi2")?], [e(&self.psi[0], "psi1")?, e(&self.psi[1], "psi2")?]))
    }

    pub fn image(&self, point: (f64, f64)) -> Result<(f64, f64)> {
        let (phi, _) = self.jets(point, 0)?;
        Ok((phi[0].value(), phi[1].value()))
    }

    /// Jacobian `∂φ^m/∂t^i` indexed `[m][i]`.
    pub fn jacobian(&self, point: (f64, f64)) -> Result<[[f64; 2]; 2]> {
        let (phi, _) = self.jets(point, 1)?;
        Ok([[phi[0].d(0), phi[0].d(1)], [phi[1].d(0), phi[1].d(1)]])
    }

    /// `(sgn J_φ, sgn det α)`.
    pub fn signs(&self, point: (f64, f64)) -> Result<(f64, f64)> {
        let jd = det2(&self.jacobian(point)?);
        if jd == 0.0 || !jd.is_finite() {
            return Err(Error::Degenerate(format!("J_phi = {jd} at ({}, {})", point.0, point.1)));
        }
        Ok((jd.signum(), det2(&self.alpha).signum()))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &PseudoTransform) -> PseudoTransform {
        let sub = |e: &Expr| e.substitute(&first.phi[0], &first.phi[1]);
        let a = self.alpha;
        let lin = |r: usize| {
            bin(
                BinOp::Add,
                bin(BinOp::Mul, Expr::num(a[r][0]), first.psi[0].clone()),
                bin(BinOp::Mul, Expr::num(a[r][1]), first.psi[1].clone()),
            )
        };
        let mut alpha = [[0.0; 2]; 2];
        for (r, row) in alpha.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * first.alpha[0][c] + a[r][1] * first.alpha[1][c];
            }
        }
        PseudoTransform {
            phi: [sub(&self.phi[0]), sub(&self.phi[1])],
            psi: [bin(BinOp::Add, lin(0), sub(&self.psi[0])), bin(BinOp::Add, lin(1), sub(&self.psi[1]))],
            alpha,
        }
    }

    /// A random element with `J_φ` bounded away from zero on any rectangle.
    pub fn random<R: Rng>(rng: &mut R) -> PseudoTransform {
        let wave = |rng: &mut R, var: &str| {
            let k = rng.random_range(0.5..1.5);
            let c = rng.random_range(-1.0..1.0);
            let amp = rng.random_range(-0.4..0.4) / k;
            match rng.random_range(0..3) {
                0 => format!("({amp:.6})*sin({k:.6}*{var} + ({c:.6}))"),
                1 => format!("({amp:.6})*cos({k:.6}*{var} + ({c:.6}))"),
                _ => format!("({amp:.6})*tanh({k:.6}*{var} + ({c:.6}))"),
            }
        };
        let s1 = if rng.random_bool(0.5) { "" } else { "-" };
        let s2 = if rng.random_bool(0.5) { "" } else { "-" };
        let shift1 = rng.random_range(-0.5..0.5);
        let shift2 = rng.random_range(-0.5..0.5);
        let u = format!("{s1}(t1 + {} + ({shift1:.6}))", wave(rng, "t2"));
        let v = format!("{s2}(t2 + {} + ({shift2:.6}))", wave(rng, "t1"));
        let (p1, p2) = if rng.random_bool(0.5) { (v, u) } else { (u, v) };
        let psi1 = format!("{} + {}", wave(rng, "t1"), wave(rng, "t2"));
        let psi2 = format!("{} + ({:.6})*t1*t2", wave(rng, "t2"), rng.random_range(-0.5..0.5));
        let alpha = loop {
            let a = [
                [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
                [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            ];
            if det2(&a).abs() > 0.3 {
                break a;
            }
        };
        PseudoTransform::parse([&p1, &p2], [&psi1, &psi2], alpha).expect("generated transform parses")
    }
}

/// Convert a jet in `t` to a jet in `t̄ = φ(t)`, given `(J⁻¹)^i_m` jets.
fn rebase(u: &Jet2, jinv: &[[Jet2; 2]; 2]) -> Jet2 {
    let k = u.order();
    if k == 0 {
        return *u;
    }
    let ji = jinv.map(|r| r.map(|x| x.truncate(k - 1)));
    let p = [0, 1].map(|m| ji[0][m] * u.partial(0) + ji[1][m] * u.partial(1));
    let q = p.map(|pm| rebase(&pm, jinv));
    let mut c = vec![u.value(); coeff_count(k)];
    for (s, v) in c.iter_mut().enumerate().skip(1) {
        let (i, j) = multi_index(s);
        *v = if i >= 1 { q[0].get(i - 1, j) } else { q[1].get(0, j - 1) }.unwrap_or(0.0);
    }
    Jet2::from_slots(k, &c)
}

/// Jets of the transformed metric at `φ(t)`, same order as the input.
pub fn pushforward_jets(j: &PointJets, p: &PseudoTransform) -> Result<PointJets> {
    let k = j.order;
    if k + 1 > MAX_ORDER {
        return Err(Error::OrderOutOfRange(k + 1));
    }
    let (phi, psi) = p.jets(j.point, k + 1)?;
    let jm = [[phi[0].partial(0), phi[0].partial(1)], [phi[1].partial(0), phi[1].partial(1)]];
    let det = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0];
    if det.value() == 0.0 || !det.value().is_finite() {
        return Err(Error::Degenerate(format!("J_phi = 0 at ({}, {})", j.point.0, j.point.1)));
    }
    // jinv[i][m] = (J⁻¹)^i_m
    let jinv = [[jm[1][1] / det, -jm[0][1] / det], [-jm[1][0] / det, jm[0][0] / det]];
    let gt = |a: usize, b: usize| j.gt[a + b];
    let mut gbar = [Jet2::constant(0.0, k); 3];
    for (s, (m, n)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        let mut acc = Jet2::constant(0.0, k);
        for a in 0..2 {
            for b in 0..2 {
                acc = acc + jinv[a][m] * gt(a, b) * jinv[b][n];
            }
        }
        gbar[s] = acc;
    }
    let al = p.alpha;
    let mut fbar = [Jet2::constant(0.0, k); 4];
    for m in 0..2 {
        for r in 0..2 {
            let mut acc = Jet2::constant(0.0, k);
            for i in 0..2 {
                let w = j.fk(i, 0).scale(al[r][0]) + j.fk(i, 1).scale(al[r][1]) - psi[r].partial(i);
                acc = acc + w * jinv[i][m];
            }
            fbar[2 * m + r] = acc;
        }
    }
    let ai = inv2(&al);
    let h = |a: usize, b: usize| j.h[a + b];
    let mut hbar = [Jet2::constant(0.0, k); 3];
    for (s, (r, q)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        let mut acc = Jet2::constant(0.0, k);
        for a in 0..2 {
            for b in 0..2 {
                acc = acc + h(a, b).scale(ai[a][r] * ai[b][q]);
            }
        }
        hbar[s] = acc;
    }
    let rb = |x: &Jet2| rebase(x, &jinv);
    PointJets::new((phi[0].value(), phi[1].value()), gbar.map(|x| rb(&x)), fbar.map(|x| rb(&x)), hbar.map(|x| rb(&x)))
}

/// Push a tangent vector at `t` forward to `φ(t)`.
pub fn push_vector(p: &PseudoTransform, point: (f64, f64), v: &[f64; 4]) -> Result<[f64; 4]> {
    let (phi, psi) = p.jets(point, 1)?;
    let a = p.alpha;
    Ok([
        phi[0].d(0) * v[0] + phi[0].d(1) * v[1],
        phi[1].d(0) * v[0] + phi[1].d(1) * v[1],
        a[0][0] * v[2] + a[0][1] * v[3] + psi[0].d(0) * v[0] + psi[0].d(1) * v[1],
        a[1][0] * v[2] + a[1][1] * v[3] + psi[1].d(0) * v[0] + psi[1].d(1) * v[1],
    ])
}

/// Relative difference with an absolute floor for values at roundoff level.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(TERM_FLOOR)
}

#[derive(Clone, Debug)]
pub struct InvarianceRow {
    pub point: (f64, f64),
    pub image: (f64, f64),
    pub eps: (f64, f64),
    pub six: [f64; 6],
    pub six_bar: [f64; 6],
    /// Relative difference per fundamental.
    pub residuals: [f64; 6],
    /// Observed signs relating pushed `(H, H⊥, C, C⊥)` to the frame of the image.
    pub frame_signs: [f64; 4],
    pub expected_signs: [f64; 4],
    /// Distance from the pushed vector to the signed image frame vector, relative.
    pub frame_errors: [f64; 4],
    /// `sgn(Θ(ḡ)/Θ(g))` for `Θ_I, Θ_II, Θ_III`.
    pub theta_signs: [f64; 3],
    pub det_gt_ratio_error: f64,
    pub notice: Option<String>,
}

impl InvarianceRow {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(*r))
    }

    pub fn signs_ok(&self, tol: f64) -> bool {
        self.notice.is_some() || (self.frame_signs == self.expected_signs && self.frame_errors.iter().all(|e| *e < tol))
    }
}

#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
    pub max_residual: f64,
    pub signs_ok: bool,
}

impl InvarianceReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual < tol && self.signs_ok
    }
}

fn vnorm(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn invariance_row(j: &PointJets, p: &PseudoTransform, tol: f64) -> Result<InvarianceRow> {
    let jb = pushforward_jets(j, p)?;
    let eps = p.signs(j.point)?;
    let (f, fb) = (first(j), first(&jb));
    let (six, six_bar) = (f.six(), fb.six());
    let residuals = [0, 1, 2, 3, 4, 5].map(|i| rel_diff(six[i], six_bar[i]));
    let fr = frame(j, tol);
    let frb = frame(&jb, tol);
    let expected_signs = [1.0, eps.0, eps.0, eps.0 * eps.1];
    let mut frame_signs = [0.0; 4];
    let mut frame_errors = [0.0; 4];
    for a in 0..4 {
        let pushed = push_vector(p, j.point, &fr.vectors[a])?;
        let target = frb.vectors[a];
        let scale = vnorm(&target).max(vnorm(&pushed)).max(TERM_FLOOR);
        let err = |s: f64| vnorm(&[0, 1, 2, 3].map(|i| pushed[i] - s * target[i])) / scale;
        let (ep, em) = (err(1.0), err(-1.0));
        frame_signs[a] = if ep <= em { 1.0 } else { -1.0 };
        frame_errors[a] = ep.min(em);
    }
    let sgn = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { (a * b).signum() };
    let theta_signs = [sgn(f.theta_i, fb.theta_i), sgn(f.theta_ii, fb.theta_ii), sgn(f.theta_iii, fb.theta_iii)];
    let jac = p.jacobian(j.point)?;
    let jd = det2(&jac);
    let det_gt_ratio_error = rel_diff(jb.det_gt.value(), j.det_gt.value() / (jd * jd));
    Ok(InvarianceRow {
        point: j.point,
        image: jb.point,
        eps,
        six,
        six_bar,
        residuals,
        frame_signs,
        expected_signs,
        frame_errors,
        theta_signs,
        det_gt_ratio_error,
        notice: fr.notice(),
    })
}

pub fn invariance_report(
    m: &G2Metric,
    p: &PseudoTransform,
    points: &[(f64, f64)],
    tol: f64,
) -> Result<InvarianceReport> {
    let mut rows = Vec::with_capacity(points.len());
    for &pt in points {
        rows.push(invariance_row(&m.point_jets(pt, 1)?, p, tol)?);
    }
    let max_residual = rows.iter().fold(0.0f64, |a, r| a.max(r.max_residual()));
    let signs_ok = rows.iter().all(|r| r.signs_ok(1e-7));
    Ok(InvarianceReport { rows, max_residual, signs_ok })
}

/// `det h̄ (det α)² = det h`, relative.
pub fn det_h_law_error(j: &PointJets, jb: &PointJets, p: &PseudoTransform) -> f64 {
    let da = det2(&p.alpha);
    let hb = jb.h.map(|x| x.value());
    rel_diff(det_sym(&hb) * da * da, j.det_h.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog_default;

    #[test]
    fn identity_keeps_jets() {
        let m = catalog_default("vdb").unwrap();
        let j = m.point_jets((0.5, 1.0), 2).unwrap();
        let jb = pushforward_jets(&j, &PseudoTransform::identity()).unwrap();
        for (a, b) in j.components().iter().zip(jb.components().iter()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn signs_of_simple_transforms() {
        let swap = PseudoTransform::parse(["t2", "t1"], ["0", "0"], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(swap.signs((0.3, 0.4)).unwrap(), (-1.0, 1.0));
        let flip = PseudoTransform::parse(["t1", "t2"], ["0", "0"], [[1.0, 0.0], [0.0, -1.0]]).unwrap();
        assert_eq!(flip.signs((0.3, 0.4)).unwrap(), (1.0, -1.0));
        assert_eq!(PseudoTransform::identity().signs((0.0, 0.0)).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn singular_alpha_rejected() {
        assert!(PseudoTransform::parse(["t1", "t2"], ["0", "0"], [[1.0, 2.0], [2.0, 4.0]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = PseudoTransform::parse(["t1 + 0.1*t2^2", "t2"], ["sin(t1)", "0"], [[2.0, 1.0], [0.0, 1.0]]).unwrap();
        let q = PseudoTransform::from_json(&p.to_json()).unwrap();
        assert_eq!(p.to_json(), q.to_json());
    }

    #[test]
    fn degenerate_jacobian() {
        let p = PseudoTransform::parse(["t1^2", "t2"], ["0", "0"], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(p.signs((0.0, 0.3)), Err(Error::Degenerate(_))));
    }
}
