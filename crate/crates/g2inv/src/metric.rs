//! Metric definitions, jet extraction and the two component parametrizations.
//!
//! A metric with two commuting Killing fields `∂/∂z¹, ∂/∂z²` is stored either
//! in `bfh` form
//!
//! ```text
//! g = b_ij dt^i dt^j + 2 f_ik dt^i dz^k + h_kl dz^k dz^l
//! ```
//!
//! or in submersion form `g = g̃_ij dt^i dt^j + h_kl (dz^k + f_i^k dt^i)(dz^l + f_j^l dt^j)`.
//! Everything downstream consumes the submersion form.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::jet::{finite_difference_jet, Jet, Jet2, Scalar, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Bfh,
    Submersion,
}

impl Form {
    pub fn keys(self) -> [&'static str; 10] {
        match self {
            Form::Bfh => BFH_KEYS,
            Form::Submersion => SUB_KEYS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Form::Bfh => "bfh",
            Form::Submersion => "submersion",
        }
    }
}

pub const BFH_KEYS: [&str; 10] = ["b11", "b12", "b22", "f11", "f12", "f21", "f22", "h11", "h12", "h22"];
pub const SUB_KEYS: [&str; 10] = ["gt11", "gt12", "gt22", "F11", "F12", "F21", "F22", "h11", "h12", "h22"];

/// Rectangle in the `(t1, t2)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub t1: (f64, f64),
    pub t2: (f64, f64),
}

impl Rect {
    pub fn new(t1: (f64, f64), t2: (f64, f64)) -> Rect {
        Rect { t1, t2 }
    }

    /// `n1 × n2` grid including the corners, row-major in `t1`.
    pub fn grid(&self, n1: usize, n2: usize) -> Vec<(f64, f64)> {
        let lin = |(a, b): (f64, f64), n: usize, k: usize| {
            if n <= 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        };
        let mut pts = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                pts.push((lin(self.t1, n1, i), lin(self.t2, n2, j)));
            }
        }
        pts
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.t1.0 && p.0 <= self.t1.1 && p.1 >= self.t2.0 && p.1 <= self.t2.1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct G2Metric {
    pub name: String,
    pub form: Form,
    pub params: BTreeMap<String, f64>,
    /// Component expressions in the order of [`Form::keys`].
    pub components: [Expr; 10],
    pub domain: Option<Rect>,
}

impl G2Metric {
    /// Build from component strings, validating every expression.
    pub fn new(
        name: &str,
        form: Form,
        params: BTreeMap<String, f64>,
        components: &BTreeMap<String, String>,
        domain: Option<Rect>,
    ) -> Result<G2Metric> {
        let names: BTreeSet<String> = params.keys().cloned().collect();
        for k in components.keys() {
            if !form.keys().contains(&k.as_str()) {
                return Err(Error::UnknownKey(k.clone()));
            }
        }
        let mut parsed = Vec::with_capacity(10);
        for key in form.keys() {
            let text = components.get(key).ok_or_else(|| Error::MissingComponent(key.into()))?;
            let e = expr::parse(text).map_err(|e| e.in_expr(key))?;
            let issues = expr::validate(&e, &names);
            if !issues.is_empty() {
                return Err(Error::Validation(format!("{key}: {}", issues.join("; "))));
            }
            parsed.push(e);
        }
        let components: [Expr; 10] = parsed.try_into().expect("ten components");
        Ok(G2Metric { name: name.into(), form, params, components, domain })
    }

    pub fn component(&self, key: &str) -> Option<&Expr> {
        self.form.keys().iter().position(|k| *k == key).map(|i| &self.components[i])
    }

    /// Jets of the ten raw components in key order.
    pub fn raw_jets(&self, point: (f64, f64), order: usize) -> Result<[Jet2; 10]> {
        let keys = self.form.keys();
        let mut out = [Jet2::constant(0.0, order); 10];
        for (k, e) in self.components.iter().enumerate() {
            out[k] = e.eval_jet(&self.params, point, order).map_err(|e| e.in_expr(keys[k]))?;
        }
        Ok(out)
    }

    /// Canonical submersion-form jets at a point.
    pub fn point_jets(&self, point: (f64, f64), order: usize) -> Result<PointJets> {
        if order > MAX_ORDER {
            return Err(Error::OrderOutOfRange(order));
        }
        let r = self.raw_jets(point, order)?;
        self.assemble(point, &r)
    }

    /// As [`G2Metric::point_jets`], with derivatives from central differences
    /// of step `step` (order at most 2).
    pub fn fd_point_jets(&self, point: (f64, f64), order: usize, step: f64) -> Result<PointJets> {
        let keys = self.form.keys();
        let mut r = [Jet2::constant(0.0, order); 10];
        for (k, e) in self.components.iter().enumerate() {
            r[k] = finite_difference_jet(|x, y| e.eval(&self.params, (x, y)), point, order, step)
                .map_err(|e: Error| e.in_expr(keys[k]))?;
        }
        self.assemble(point, &r)
    }

    fn assemble(&self, point: (f64, f64), r: &[Jet2; 10]) -> Result<PointJets> {
        let h = [r[7], r[8], r[9]];
        match self.form {
            Form::Submersion => PointJets::new(point, [r[0], r[1], r[2]], [r[3], r[4], r[5], r[6]], h),
            Form::Bfh => {
                let (gt, f) = bfh_to_submersion(&[r[0], r[1], r[2]], &[r[3], r[4], r[5], r[6]], &h)?;
                PointJets::new(point, gt, f, h)
            }
        }
    }

    pub fn from_json(doc: &Value) -> Result<G2Metric> {
        let obj = doc.as_object().ok_or_else(|| Error::Json("metric must be an object".into()))?;
        for k in obj.keys() {
            if !["name", "form", "params", "components", "domain"].contains(&k.as_str()) {
                return Err(Error::UnknownKey(k.clone()));
            }
        }
        let name =
            obj.get("name").and_then(Value::as_str).ok_or_else(|| Error::Json("missing string field 'name'".into()))?;
        let form = match obj.get("form").and_then(Value::as_str) {
            Some("bfh") => Form::Bfh,
            Some("submersion") => Form::Submersion,
            _ => return Err(Error::Json("'form' must be \"bfh\" or \"submersion\"".into())),
        };
        let mut params = BTreeMap::new();
        if let Some(p) = obj.get("params") {
            let p = p.as_object().ok_or_else(|| Error::Json("'params' must be an object".into()))?;
            for (k, v) in p {
                let x = v.as_f64().ok_or_else(|| Error::Json(format!("param '{k}' must be a number")))?;
                params.insert(k.clone(), x);
            }
        }
        let comps = obj
            .get("components")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("missing object field 'components'".into()))?;
        let mut components = BTreeMap::new();
        for (k, v) in comps {
            let s = v.as_str().ok_or_else(|| Error::Json(format!("component '{k}' must be a string")))?;
            components.insert(k.clone(), s.to_string());
        }
        let domain = match obj.get("domain") {
            None => None,
            Some(d) => Some(parse_rect(d)?),
        };
        G2Metric::new(name, form, params, &components, domain)
    }

    pub fn from_json_str(text: &str) -> Result<G2Metric> {
        G2Metric::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Value {
        let mut comps = Map::new();
        for (k, e) in self.form.keys().iter().zip(&self.components) {
            comps.insert((*k).into(), Value::String(e.to_string()));
        }
        let mut doc = json!({
            "name": self.name,
            "form": self.form.name(),
            "params": self.params,
            "components": comps,
        });
        if let Some(r) = self.domain {
            doc["domain"] = rect_json(&r);
        }
        doc
    }
}

pub fn parse_rect(d: &Value) -> Result<Rect> {
    let bad = || Error::Json("'domain' must be {\"t1\": [a, b], \"t2\": [c, d]}".into());
    let o = d.as_object().ok_or_else(bad)?;
    let pair = |k: &str| -> Result<(f64, f64)> {
        let a = o.get(k).and_then(Value::as_array).ok_or_else(bad)?;
        match a.as_slice() {
            [x, y] => Ok((x.as_f64().ok_or_else(bad)?, y.as_f64().ok_or_else(bad)?)),
            _ => Err(bad()),
        }
    };
    Ok(Rect::new(pair("t1")?, pair("t2")?))
}

pub fn rect_json(r: &Rect) -> Value {
    json!({"t1": [r.t1.0, r.t1.1], "t2": [r.t2.0, r.t2.1]})
}

/// Symmetric 2×2 determinant `a11 a22 − a12²` for storage `[a11, a12, a22]`.
pub fn det_sym<T: Scalar>(a: &[T; 3]) -> T {
    a[0] * a[2] - a[1] * a[1]
}

/// Inverse of a symmetric 2×2 matrix given its determinant.
pub fn inv_sym<T: Scalar>(a: &[T; 3], det: T) -> [T; 3] {
    [a[2] / det, -a[1] / det, a[0] / det]
}

/// Entry `(i, j)` of symmetric storage.
#[inline]
pub fn sym<T: Copy>(a: &[T; 3], i: usize, j: usize) -> T {
    a[i + j]
}

pub fn bfh_to_submersion<T: Scalar>(
    b: &[Jet<T>; 3],
    f_low: &[Jet<T>; 4],
    h: &[Jet<T>; 3],
) -> Result<([Jet<T>; 3], [Jet<T>; 4])> {
    let dh = det_sym(h);
    if dh.value().re() == 0.0 {
        return Err(Error::Singular("det h vanishes".into()));
    }
    let hi = inv_sym(h, dh);
    let fl = |i: usize, k: usize| f_low[2 * i + k];
    // f_j^k = f_js h^sk
    let mut f = f_low.to_owned();
    for j in 0..2 {
        for k in 0..2 {
            f[2 * j + k] = fl(j, 0) * sym(&hi, 0, k) + fl(j, 1) * sym(&hi, 1, k);
        }
    }
    let mut gt = b.to_owned();
    for (idx, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        gt[idx] = b[idx] - (f[2 * i] * fl(j, 0) + f[2 * i + 1] * fl(j, 1));
    }
    Ok((gt, f))
}

pub fn submersion_to_bfh<T: Scalar>(gt: &[Jet<T>; 3], f: &[Jet<T>; 4], h: &[Jet<T>; 3]) -> ([Jet<T>; 3], [Jet<T>; 4]) {
    let mut fl = f.to_owned();
    for i in 0..2 {
        for k in 0..2 {
            fl[2 * i + k] = f[2 * i] * sym(h, 0, k) + f[2 * i + 1] * sym(h, 1, k);
        }
    }
    let mut b = gt.to_owned();
    for (idx, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        b[idx] = gt[idx] + f[2 * i] * fl[2 * j] + f[2 * i + 1] * fl[2 * j + 1];
    }
    (b, fl)
}

/// Submersion-form component jets at one point.
#[derive(Clone, Copy, Debug)]
pub struct PointJets<T: Scalar = f64> {
    pub point: (f64, f64),
    pub order: usize,
    /// `g̃11, g̃12, g̃22`
    pub gt: [Jet<T>; 3],
    /// `f_1^1, f_1^2, f_2^1, f_2^2`
    pub f: [Jet<T>; 4],
    /// `h11, h12, h22`
    pub h: [Jet<T>; 3],
    pub det_h: Jet<T>,
    pub det_gt: Jet<T>,
}

impl<T: Scalar> PointJets<T> {
    pub fn new(point: (f64, f64), gt: [Jet<T>; 3], f: [Jet<T>; 4], h: [Jet<T>; 3]) -> Result<Self> {
        let det_h = det_sym(&h);
        let det_gt = det_sym(&gt);
        if det_h.value().re() == 0.0 || !det_h.value().re().is_finite() {
            return Err(Error::Singular(format!("det h = 0 at ({}, {})", point.0, point.1)));
        }
        if det_gt.value().re() == 0.0 || !det_gt.value().re().is_finite() {
            return Err(Error::Singular(format!("det g̃ = 0 at ({}, {})", point.0, point.1)));
        }
        Ok(PointJets { point, order: gt[0].order(), gt, f, h, det_h, det_gt })
    }

    /// `f_i^k`.
    pub fn fk(&self, i: usize, k: usize) -> Jet<T> {
        self.f[2 * i + k]
    }

    /// The ten component jets in canonical order.
    pub fn components(&self) -> [Jet<T>; 10] {
        let (g, f, h) = (&self.gt, &self.f, &self.h);
        [g[0], g[1], g[2], f[0], f[1], f[2], f[3], h[0], h[1], h[2]]
    }

    pub fn from_components(point: (f64, f64), c: &[Jet<T>; 10]) -> Result<Self> {
        PointJets::new(point, [c[0], c[1], c[2]], [c[3], c[4], c[5], c[6]], [c[7], c[8], c[9]])
    }

    pub fn map(&self, f: impl Fn(&Jet<T>) -> Jet<T>) -> Result<Self> {
        let c = self.components().map(|j| f(&j));
        PointJets::from_components(self.point, &c)
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order)).expect("truncation keeps values")
    }

    /// Order-(k−1) jets whose coefficients are order-1 jets.
    pub fn nest(&self) -> PointJets<Jet<T>> {
        let c = self.components().map(|j| j.nest());
        PointJets::from_components(self.point, &c).expect("nesting keeps values")
    }

    pub fn sign_det_h(&self) -> f64 {
        self.det_h.value().re().signum()
    }

    pub fn sign_det_gt(&self) -> f64 {
        self.det_gt.value().re().signum()
    }
}

impl PointJets<f64> {
    /// Largest coefficient magnitude over all component jets.
    pub fn scale(&self) -> f64 {
        self.components().iter().fold(0.0, |m, j| m.max(j.max_abs()))
    }

    /// Flat coefficient vector (the jet-fiber coordinates).
    pub fn to_vec(&self) -> Vec<f64> {
        self.components().iter().flat_map(|j| j.coeffs().to_vec()).collect()
    }

    pub fn from_vec(point: (f64, f64), order: usize, v: &[f64]) -> Result<Self> {
        let n = crate::jet::coeff_count(order);
        if v.len() != 10 * n {
            return Err(Error::Invalid(format!("expected {} jet coordinates", 10 * n)));
        }
        let mut c = [Jet2::constant(0.0, order); 10];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = Jet2::from_coeffs(order, &v[k * n..(k + 1) * n])?;
        }
        PointJets::from_components(point, &c)
    }

    /// `b` and `f_ik` jets of the bfh form.
    pub fn to_bfh(&self) -> ([Jet2; 3], [Jet2; 4]) {
        submersion_to_bfh(&self.gt, &self.f, &self.h)
    }
}

/// Stratum indicators at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StratumFlags {
    pub sign_det_h: i8,
    pub sign_det_gt: i8,
    pub c_rho_zero: bool,
    pub ell_c_zero: bool,
    pub orthogonally_transitive: bool,
    pub generic: bool,
}

pub const DEFAULT_TOL: f64 = 1e-10;

/// `|v|` small compared with the magnitude `mag` of the terms that produced it.
pub fn negligible(v: f64, mag: f64, tol: f64) -> bool {
    v.abs() <= tol * mag
}

pub fn classify(j: &PointJets, tol: f64) -> StratumFlags {
    let inv = crate::invariants::fundamental_terms(j);
    let mut transitive = true;
    for k in 0..2 {
        let a = j.fk(0, k).d(1);
        let b = j.fk(1, k).d(0);
        transitive &= negligible(a - b, a.abs() + b.abs(), tol);
    }
    let c_rho_zero = negligible(inv.c_rho.0, inv.c_rho.1, tol);
    let ell_c_zero = transitive || negligible(inv.ell_c.0, inv.ell_c.1, tol);
    StratumFlags {
        sign_det_h: j.sign_det_h() as i8,
        sign_det_gt: j.sign_det_gt() as i8,
        c_rho_zero,
        ell_c_zero,
        orthogonally_transitive: transitive,
        generic: !c_rho_zero && !ell_c_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(form: &str, comps: &[(&str, &str)]) -> Value {
        let c: Map<String, Value> = comps.iter().map(|(k, v)| ((*k).into(), json!(v))).collect();
        json!({"name": "m", "form": form, "params": {}, "components": c})
    }

    #[test]
    fn missing_component_is_named() {
        let d = doc(
            "bfh",
            &[
                ("b11", "1"),
                ("b12", "0"),
                ("b22", "1"),
                ("f11", "0"),
                ("f12", "0"),
                ("f21", "0"),
                ("f22", "0"),
                ("h11", "1"),
                ("h12", "0"),
            ],
        );
        let e = G2Metric::from_json(&d).unwrap_err();
        assert_eq!(e.to_string(), "missing component h22");
    }

    #[test]
    fn unknown_key_rejected() {
        let mut d = doc("bfh", &[]);
        d["extra"] = json!(1);
        assert!(matches!(G2Metric::from_json(&d), Err(Error::UnknownKey(_))));
    }

    #[test]
    fn hand_conversion() {
        let d = doc(
            "bfh",
            &[
                ("b11", "2"),
                ("b12", "0"),
                ("b22", "1"),
                ("f11", "1"),
                ("f12", "0"),
                ("f21", "0"),
                ("f22", "0"),
                ("h11", "1"),
                ("h12", "0"),
                ("h22", "1"),
            ],
        );
        let m = G2Metric::from_json(&d).unwrap();
        let j = m.point_jets((0.3, 0.4), 1).unwrap();
        assert_eq!(j.gt[0].value(), 1.0);
        assert_eq!(j.fk(0, 0).value(), 1.0);
    }

    #[test]
    fn singular_h_reported() {
        let d = doc(
            "bfh",
            &[
                ("b11", "1"),
                ("b12", "0"),
                ("b22", "1"),
                ("f11", "0"),
                ("f12", "0"),
                ("f21", "0"),
                ("f22", "0"),
                ("h11", "t1"),
                ("h12", "0"),
                ("h22", "t1"),
            ],
        );
        let m = G2Metric::from_json(&d).unwrap();
        assert!(matches!(m.point_jets((0.0, 1.0), 1), Err(Error::Singular(_))));
    }
}
