//! Built-in metrics: flat space, simple test metrics, the Van den Bergh
//! vacuum example, pp-waves, Λ-Kundu families and seeded random metrics.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Form, G2Metric, Rect};

pub const NAMES: [&str; 9] =
    ["flat", "diag_t1", "vdb", "ppwave1", "ppwave2", "ppwave3", "lambda_kundu", "lambda_kundu_c0", "random_analytic"];

/// A catalog parameter: a number or an expression in `t1`, `t2`.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Expr(String),
}

impl ParamValue {
    /// Numbers stay numbers; anything else is kept as expression text.
    pub fn parse(text: &str) -> ParamValue {
        match text.trim().parse::<f64>() {
            Ok(v) => ParamValue::Num(v),
            Err(_) => ParamValue::Expr(text.trim().to_string()),
        }
    }

    fn as_expr(&self) -> String {
        match self {
            ParamValue::Num(v) if *v < 0.0 => format!("({v:?})"),
            ParamValue::Num(v) => format!("{v:?}"),
            ParamValue::Expr(s) => s.clone(),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

struct ParamSpec {
    numeric: &'static [(&'static str, Option<f64>)],
    exprs: &'static [(&'static str, &'static str)],
}

fn param_spec(name: &str) -> Option<ParamSpec> {
    Some(match name {
        "flat" | "diag_t1" | "vdb" => ParamSpec { numeric: &[], exprs: &[] },
        "ppwave1" => ParamSpec { numeric: &[], exprs: &[("R", "cos(t1)"), ("S", "cos(t1)"), ("W", "2*t1")] },
        "ppwave2" => ParamSpec { numeric: &[("c", Some(2.0))], exprs: &[("psi", "c^2*t1^2/2")] },
        "ppwave3" => ParamSpec { numeric: &[("c", Some(1.0))], exprs: &[("psi", "c^2*exp(t1)")] },
        "lambda_kundu" => ParamSpec { numeric: &[("c", Some(1.0)), ("Lambda", Some(3.0))], exprs: &[("psi", "0")] },
        "lambda_kundu_c0" => ParamSpec { numeric: &[("Lambda", Some(3.0))], exprs: &[("psi", "t1^3")] },
        "random_analytic" => ParamSpec { numeric: &[("seed", None)], exprs: &[] },
        _ => return None,
    })
}

fn comps(keys: [&str; 10], vals: [String; 10]) -> BTreeMap<String, String> {
    keys.iter().map(|k| k.to_string()).zip(vals).collect()
}

fn s(x: &str) -> String {
    x.to_string()
}

/// Fully instantiated catalog metric.
pub fn catalog(name: &str, params: &Params) -> Result<G2Metric> {
    let sp = param_spec(name).ok_or_else(|| Error::UnknownCatalog(name.into()))?;
    for k in params.keys() {
        let known = sp.numeric.iter().any(|(n, _)| n == k) || sp.exprs.iter().any(|(n, _)| n == k);
        if !known {
            return Err(Error::Invalid(format!("catalog metric '{name}' has no parameter '{k}'")));
        }
    }
    let mut num = BTreeMap::new();
    for (k, def) in sp.numeric {
        let v = match (params.get(*k), def) {
            (Some(ParamValue::Num(v)), _) => *v,
            (Some(ParamValue::Expr(e)), _) => {
                return Err(Error::Invalid(format!("parameter '{k}' must be numeric, got '{e}'")))
            }
            (None, Some(d)) => *d,
            (None, None) => return Err(Error::MissingParam((*k).into())),
        };
        num.insert((*k).to_string(), v);
    }
    let ex = |k: &str| -> String {
        let def = sp.exprs.iter().find(|(n, _)| *n == k).map(|(_, d)| *d).unwrap_or("0");
        format!("({})", params.get(k).map_or_else(|| def.to_string(), ParamValue::as_expr))
    };
    let sub = Form::Submersion.keys();
    let bfh = Form::Bfh.keys();
    let (form, c, domain, num) = match name {
        "flat" => (
            Form::Bfh,
            comps(bfh, [s("1"), s("0"), s("1"), s("0"), s("0"), s("0"), s("0"), s("1"), s("0"), s("1")]),
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            num,
        ),
        "diag_t1" => (
            Form::Submersion,
            comps(sub, [s("1"), s("0"), s("1"), s("0"), s("0"), s("0"), s("0"), s("t1"), s("0"), s("t1")]),
            Rect::new((1.0, 3.0), (-1.0, 1.0)),
            num,
        ),
        "vdb" => {
            let c6 = "cosh(sqrt(6)*t1)";
            (
                Form::Submersion,
                comps(
                    sub,
                    [
                        format!("{c6}*sinh(t2)^4"),
                        s("0"),
                        format!("-{c6}*sinh(t2)^4"),
                        s("-cosh(t2)^2/2"),
                        s("cosh(t2)"),
                        s("0"),
                        s("0"),
                        format!("12/{c6}"),
                        format!("12*cosh(t2)/{c6}"),
                        format!("2*{c6}*sinh(t2)^2 + 12*cosh(t2)^2/{c6}"),
                    ],
                ),
                Rect::new((0.3, 1.2), (0.7, 1.5)),
                num,
            )
        }
        "ppwave1" => {
            let (r, sv, w) = (ex("R"), ex("S"), ex("W"));
            (
                Form::Bfh,
                comps(
                    bfh,
                    [
                        s("0"),
                        s("1/2"),
                        s("0"),
                        s("0"),
                        s("0"),
                        s("0"),
                        s("0"),
                        format!("{r}^2"),
                        format!("{r}^2*{w}"),
                        format!("{r}^2*{w}^2 + {sv}^2"),
                    ],
                ),
                Rect::new((-1.0, 1.0), (-1.0, 1.0)),
                num,
            )
        }
        "ppwave2" => (
            Form::Bfh,
            comps(bfh, [s("1"), s("0"), s("1"), s("0"), s("0"), s("c*t1"), s("0"), ex("psi"), s("1"), s("0")]),
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            num,
        ),
        "ppwave3" => (
            Form::Bfh,
            comps(
                bfh,
                [s("exp(t1)"), s("0"), s("exp(t1)"), s("0"), s("0"), s("c*exp(t1)"), s("0"), ex("psi"), s("1"), s("0")],
            ),
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            num,
        ),
        "lambda_kundu" => {
            let psi = ex("psi");
            (
                Form::Bfh,
                comps(
                    bfh,
                    [
                        s("-3*c^2*t1/(Lambda*(c^2*t1^3 + 1))"),
                        s("0"),
                        s("-(c^2*t1^3 + 1)/t1"),
                        s("0"),
                        s("0"),
                        s("-1/t1"),
                        s("0"),
                        format!("-(t1^3*{psi} + 1)/t1"),
                        s("-t1^2"),
                        s("0"),
                    ],
                ),
                Rect::new((0.5, 1.5), (-1.0, 1.0)),
                num,
            )
        }
        "lambda_kundu_c0" => {
            let psi = ex("psi");
            (
                Form::Bfh,
                comps(
                    bfh,
                    [
                        s("-3/(Lambda*t1^2)"),
                        s("0"),
                        s("-1/t1^2"),
                        s("0"),
                        s("0"),
                        s("-t1"),
                        s("0"),
                        format!("-(t1^6 + {psi})/(2*t1^2)"),
                        s("-1/t1^2"),
                        s("0"),
                    ],
                ),
                Rect::new((0.5, 1.5), (-1.0, 1.0)),
                num,
            )
        }
        _ => {
            let seed = num["seed"];
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(Error::Invalid("seed must be a non-negative integer".into()));
            }
            let c = random_components(seed as u64);
            (Form::Submersion, comps(sub, c), Rect::new((0.1, 0.9), (0.1, 0.9)), BTreeMap::new())
        }
    };
    let full_name =
        if name == "random_analytic" { format!("random_analytic_{}", num_seed(params)) } else { name.to_string() };
    G2Metric::new(&full_name, form, num, &c, Some(domain))
}

fn num_seed(p: &Params) -> String {
    match p.get("seed") {
        Some(ParamValue::Num(v)) => format!("{}", *v as u64),
        _ => String::new(),
    }
}

pub fn catalog_default(name: &str) -> Result<G2Metric> {
    catalog(name, &Params::new())
}

pub fn random_analytic(seed: u64) -> G2Metric {
    let mut p = Params::new();
    p.insert("seed".into(), ParamValue::Num(seed as f64));
    catalog("random_analytic", &p).expect("random metrics are well formed")
}

/// A bounded smooth term with values in `[-1, 1]` on the unit square.
fn bounded_term(rng: &mut ChaCha8Rng) -> String {
    let k1 = rng.random_range(0.5..2.0);
    let k2 = rng.random_range(0.5..2.0);
    let ph = rng.random_range(-1.0..1.0);
    let arg = format!("{k1:.4}*t1 + {k2:.4}*t2 + ({ph:.4})");
    match rng.random_range(0..4) {
        0 => format!("sin({arg})"),
        1 => format!("cos({arg})"),
        2 => format!("tanh({arg})"),
        _ => s("t1*t2"),
    }
}

/// `Σ w_k term_k` with `Σ |w_k| = bound`.
fn bounded_sum(rng: &mut ChaCha8Rng, bound: f64) -> String {
    let n = rng.random_range(2..4);
    let mut ws: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = ws.iter().sum();
    for w in &mut ws {
        *w *= bound / total;
        if rng.random_bool(0.5) {
            *w = -*w;
        }
    }
    ws.iter().map(|w| format!("({w:.6})*{}", bounded_term(rng))).collect::<Vec<_>>().join(" + ")
}

/// Symmetric block `[[a+p11, p12], [p12, ±(a+p22)]]` with `|p| ≤ 0.3a`,
/// so the determinant keeps the sign of the diagonal product.
fn definite_block(rng: &mut ChaCha8Rng, negative: bool) -> [String; 3] {
    let a = rng.random_range(0.8..2.0);
    let b = 0.3 * a;
    let s22 = if negative { "-" } else { "" };
    [
        format!("{a:.6} + {}", bounded_sum(rng, b)),
        bounded_sum(rng, b),
        format!("{s22}({a:.6} + {})", bounded_sum(rng, b)),
    ]
}

fn random_components(seed: u64) -> [String; 10] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let neg_g = rng.random_bool(0.5);
    let neg_h = rng.random_bool(0.5);
    let g = definite_block(&mut rng, neg_g);
    let h = definite_block(&mut rng, neg_h);
    let f: Vec<String> = (0..4).map(|_| bounded_sum(&mut rng, 1.0)).collect();
    [
        g[0].clone(),
        g[1].clone(),
        g[2].clone(),
        f[0].clone(),
        f[1].clone(),
        f[2].clone(),
        f[3].clone(),
        h[0].clone(),
        h[1].clone(),
        h[2].clone(),
    ]
}
