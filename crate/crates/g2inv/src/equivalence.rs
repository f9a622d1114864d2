//! Equivalence by signature: how the remaining fundamental invariants depend
//! on a chosen independent pair `(I¹, I²)`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::invariants::{canonical_id, first, FUNDAMENTAL_IDS};
use crate::metric::{classify, negligible, parse_rect, rect_json, Rect, DEFAULT_TOL};
use crate::second::{directional_partials, fundamental_jets, pair_delta, second_invariants};
use crate::source::MetricSource;
use crate::transform::rel_diff;

pub const MIN_SAMPLES: usize = 8;
pub const DEFAULT_PAIR: (usize, usize) = (0, 4);
pub const DEFAULT_EQUIV_TOL: f64 = 1e-4;
/// Relative threshold on the independence determinant `Δ`.
pub const DELTA_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SigSample {
    pub i1: f64,
    pub i2: f64,
    /// The four remaining fundamentals, in fundamental order.
    pub rest: [f64; 4],
    /// `∂(rest)/∂(I¹, I²)`.
    pub slopes: [[f64; 2]; 4],
    /// Base-chart point.
    pub point: (f64, f64),
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub name: String,
    pub pair: (usize, usize),
    pub samples: Vec<SigSample>,
    pub domain: Rect,
    pub skipped: usize,
}

pub fn rest_ids(pair: (usize, usize)) -> [usize; 4] {
    let v: Vec<usize> = (0..6).filter(|i| *i != pair.0 && *i != pair.1).collect();
    [v[0], v[1], v[2], v.get(3).copied().unwrap_or(v[2])]
}

pub fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Invalid(format!("pair must be two invariant names, got '{text}'")));
    }
    let id = |s: &str| canonical_id(s).ok_or_else(|| Error::Invalid(format!("unknown invariant '{s}'")));
    let pair = (id(parts[0])?, id(parts[1])?);
    if pair.0 == pair.1 {
        return Err(Error::DependentPair(0.0));
    }
    Ok(pair)
}

fn sample_at(src: &MetricSource, pt: (f64, f64), pair: (usize, usize)) -> Result<Option<SigSample>> {
    let s = src.sample(pt, 2)?;
    if !classify(&s.jets, DEFAULT_TOL).generic {
        return Ok(None);
    }
    let inv2 = second_invariants(&s.jets, DEFAULT_TOL)?;
    let (delta, mag) = pair_delta(&inv2, pair.0, pair.1);
    if pair.0 == pair.1 || delta == 0.0 || negligible(delta, mag, DELTA_TOL) {
        return Ok(None);
    }
    let six = inv2.six;
    let ids = rest_ids(pair);
    let mut slopes = [[0.0; 2]; 4];
    for (k, id) in ids.iter().enumerate() {
        let (a, b) = directional_partials(&inv2, *id, pair.0, pair.1, DELTA_TOL)?;
        slopes[k] = [a, b];
    }
    Ok(Some(SigSample { i1: six[pair.0], i2: six[pair.1], rest: ids.map(|i| six[i]), slopes, point: pt, delta }))
}

pub fn build_signature(src: &MetricSource, rect: Rect, n: usize, pair: (usize, usize)) -> Result<Signature> {
    if pair.0 == pair.1 {
        return Err(Error::DependentPair(0.0));
    }
    let mut samples = Vec::new();
    let mut skipped = 0;
    for pt in rect.grid(n, n) {
        match sample_at(src, pt, pair) {
            Ok(Some(s)) => samples.push(s),
            Ok(None) | Err(_) => skipped += 1,
        }
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientCoverage { retained: samples.len(), required: MIN_SAMPLES });
    }
    Ok(Signature { name: src.name().to_string(), pair, samples, domain: rect, skipped })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Consistent => "Consistent",
            Verdict::Inconsistent => "Inconsistent",
            Verdict::Inconclusive => "Inconclusive",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Consistent => 0,
            Verdict::Inconsistent => 1,
            Verdict::Inconclusive => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub point_a: (f64, f64),
    pub point_b: (f64, f64),
    pub invariant: String,
    pub value_a: f64,
    pub value_b: f64,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub verdict: Verdict,
    pub coverage_a: f64,
    pub coverage_b: f64,
    pub matched: usize,
    pub max_discrepancy: f64,
    pub radius: f64,
    pub tol: f64,
    pub witness: Option<Witness>,
    pub note: String,
}

const SAMPLING_NOTE: &str = "sampling-based check: Consistent means no obstruction was found at this resolution";

fn quartiles(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let x = p * (v.len() - 1) as f64;
        let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (x - lo as f64)
    };
    (q(0.25), q(0.75))
}

/// Axis scales: interquartile range of the union of both signatures.
fn axis_scales(a: &Signature, b: &Signature) -> [f64; 2] {
    let all = || a.samples.iter().chain(&b.samples);
    [0, 1].map(|k| {
        let v: Vec<f64> = all().map(|s| if k == 0 { s.i1 } else { s.i2 }).collect();
        let (q1, q3) = quartiles(v.clone());
        let iqr = q3 - q1;
        if iqr > 0.0 {
            iqr
        } else {
            v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300)
        }
    })
}

fn dist(s: &[f64; 2], x: &SigSample, y: &SigSample) -> f64 {
    ((x.i1 - y.i1) / s[0]).hypot((x.i2 - y.i2) / s[1])
}

fn nearest<'a>(s: &[f64; 2], x: &SigSample, pool: &'a [SigSample]) -> Option<(usize, f64, &'a SigSample)> {
    pool.iter().enumerate().map(|(i, y)| (i, dist(s, x, y), y)).min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Median nearest-neighbour distance within one signature.
fn median_nn(s: &[f64; 2], sig: &Signature) -> f64 {
    let mut d: Vec<f64> = sig
        .samples
        .iter()
        .enumerate()
        .filter_map(|(i, x)| {
            sig.samples.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, y)| dist(s, x, y)).min_by(f64::total_cmp)
        })
        .collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

pub fn default_radius(a: &Signature, b: &Signature) -> f64 {
    let s = axis_scales(a, b);
    let denser = if a.samples.len() >= b.samples.len() { a } else { b };
    2.0 * median_nn(&s, denser)
}

/// Matches `a` against `b`; a matched pair is compared by first-order
/// prediction of `b`'s remaining invariants at `a`'s pair values, or exactly
/// when `refine` supplies a solved point of `b`.
fn compare_with(
    a: &Signature,
    b: &Signature,
    tol: f64,
    radius: Option<f64>,
    refine: &dyn Fn(&SigSample, &SigSample) -> Option<[f64; 4]>,
) -> Result<Comparison> {
    if a.pair != b.pair {
        return Err(Error::Invalid("signatures use different invariant pairs".into()));
    }
    let s = axis_scales(a, b);
    let radius = radius.unwrap_or_else(|| default_radius(a, b));
    let ids = rest_ids(a.pair);
    let mut matched = 0;
    let mut max_discrepancy = 0.0f64;
    let mut witness = None;
    for x in &a.samples {
        let Some((_, d, y)) = nearest(&s, x, &b.samples) else { continue };
        if d > radius {
            continue;
        }
        let predicted = refine(x, y).unwrap_or_else(|| {
            let (d1, d2) = (x.i1 - y.i1, x.i2 - y.i2);
            [0, 1, 2, 3].map(|k| y.rest[k] + y.slopes[k][0] * d1 + y.slopes[k][1] * d2)
        });
        matched += 1;
        for k in 0..4 {
            let e = rel_diff(x.rest[k], predicted[k]);
            if e > max_discrepancy {
                max_discrepancy = e;
                if e > tol {
                    witness = Some(Witness {
                        point_a: x.point,
                        point_b: y.point,
                        invariant: FUNDAMENTAL_IDS[ids[k]].to_string(),
                        value_a: x.rest[k],
                        value_b: predicted[k],
                    });
                }
            }
        }
    }
    let covered_b = b.samples.iter().filter(|y| nearest(&s, y, &a.samples).is_some_and(|n| n.1 <= radius)).count();
    let coverage_a = matched as f64 / a.samples.len() as f64;
    let coverage_b = covered_b as f64 / b.samples.len() as f64;
    let verdict = if witness.is_some() {
        Verdict::Inconsistent
    } else if coverage_a.min(coverage_b) < 0.5 {
        Verdict::Inconclusive
    } else {
        Verdict::Consistent
    };
    Ok(Comparison {
        verdict,
        coverage_a,
        coverage_b,
        matched,
        max_discrepancy,
        radius,
        tol,
        witness,
        note: SAMPLING_NOTE.into(),
    })
}

pub fn compare(a: &Signature, b: &Signature, tol: f64, radius: Option<f64>) -> Result<Comparison> {
    compare_with(a, b, tol, radius, &|_, _| None)
}

/// Solve `(I¹, I²)(t) = target` in `src`'s base chart by Newton iteration from `start`.
pub fn solve_pair(
    src: &MetricSource,
    pair: (usize, usize),
    target: (f64, f64),
    start: (f64, f64),
) -> Option<((f64, f64), [f64; 6])> {
    let rect = src.domain();
    let mut t = start;
    for _ in 0..30 {
        let s = src.sample(t, 2).ok()?;
        let fj = fundamental_jets(&s.jets).ok()?;
        let six = first(&s.jets).six();
        let (r1, r2) = (six[pair.0] - target.0, six[pair.1] - target.1);
        let scale = target.0.abs().max(target.1.abs()).max(1e-300);
        if r1.abs().max(r2.abs()) <= 1e-13 * scale {
            return Some((t, six));
        }
        // Gradients in the jets' chart, then back to the base chart.
        let jac_chart = [[fj[pair.0].d(0), fj[pair.0].d(1)], [fj[pair.1].d(0), fj[pair.1].d(1)]];
        let jac = match src {
            MetricSource::Plain(_) => jac_chart,
            MetricSource::Transformed { transform, .. } => {
                let jp = transform.jacobian(t).ok()?;
                let mut m = [[0.0; 2]; 2];
                for (r, row) in m.iter_mut().enumerate() {
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = jac_chart[r][0] * jp[0][c] + jac_chart[r][1] * jp[1][c];
                    }
                }
                m
            }
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dt0 = (jac[1][1] * r1 - jac[0][1] * r2) / det;
        let dt1 = (jac[0][0] * r2 - jac[1][0] * r1) / det;
        t = (t.0 - dt0, t.1 - dt1);
        if let Some(r) = rect {
            let pad = 0.25 * ((r.t1.1 - r.t1.0).abs() + (r.t2.1 - r.t2.0).abs());
            let wide = Rect::new((r.t1.0 - pad, r.t1.1 + pad), (r.t2.0 - pad, r.t2.1 + pad));
            if !wide.contains(t) {
                return None;
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct SourceComparison {
    pub a: Option<Signature>,
    pub b: Option<Signature>,
    pub comparison: Comparison,
}

fn stratum_verdict(verdict: Verdict, note: String) -> Comparison {
    Comparison {
        verdict,
        coverage_a: 0.0,
        coverage_b: 0.0,
        matched: 0,
        max_discrepancy: f64::NAN,
        radius: f64::NAN,
        tol: f64::NAN,
        witness: None,
        note,
    }
}

/// Build both signatures on their own domains and compare, refining each
/// match by solving for the pair values in `b`.
pub fn compare_sources(
    a: &MetricSource,
    b: &MetricSource,
    n: usize,
    pair: (usize, usize),
    tol: f64,
    radius: Option<f64>,
) -> Result<SourceComparison> {
    if pair.0 == pair.1 {
        return Err(Error::DependentPair(0.0));
    }
    let rect = |m: &MetricSource| {
        m.domain().ok_or_else(|| Error::Invalid(format!("metric '{}' has no sampling domain", m.name())))
    };
    let sa = build_signature(a, rect(a)?, n, pair);
    let sb = build_signature(b, rect(b)?, n, pair);
    let ok = |e: &Error| matches!(e, Error::InsufficientCoverage { .. } | Error::DependentPair(_));
    match (sa, sb) {
        (Ok(sa), Ok(sb)) => {
            let ids = rest_ids(pair);
            let refine = |x: &SigSample, y: &SigSample| {
                solve_pair(b, pair, (x.i1, x.i2), y.point).map(|(_, six)| ids.map(|i| six[i]))
            };
            let comparison = compare_with(&sa, &sb, tol, radius, &refine)?;
            Ok(SourceComparison { a: Some(sa), b: Some(sb), comparison })
        }
        (Ok(sa), Err(e)) if ok(&e) => Ok(SourceComparison {
            a: Some(sa),
            b: None,
            comparison: stratum_verdict(
                Verdict::Inconsistent,
                format!(
                    "stratum mismatch: '{}' has generic samples for the pair, '{}' does not ({e})",
                    a.name(),
                    b.name()
                ),
            ),
        }),
        (Err(e), Ok(sb)) if ok(&e) => Ok(SourceComparison {
            a: None,
            b: Some(sb),
            comparison: stratum_verdict(
                Verdict::Inconsistent,
                format!(
                    "stratum mismatch: '{}' has generic samples for the pair, '{}' does not ({e})",
                    b.name(),
                    a.name()
                ),
            ),
        }),
        (Err(ea), Err(eb)) if ok(&ea) && ok(&eb) => Ok(SourceComparison {
            a: None,
            b: None,
            comparison: stratum_verdict(
                Verdict::Inconclusive,
                "neither metric has generic samples for the pair".into(),
            ),
        }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Closed-form dependence of `(C_χ, Q_χ, Q_γ, Θ_I²)` on `(C_ρ, ℓ_C)` for the
/// Van den Bergh class.
pub fn vdb_oracle(c_rho: f64, ell: f64) -> Result<[f64; 4]> {
    let s = c_rho + 2.0 * ell;
    if s == 0.0 || negligible(s, c_rho.abs() + 2.0 * ell.abs(), 1e-12) {
        return Err(Error::Pole(format!("C_rho + 2 ell_C = {s}")));
    }
    let p = c_rho * c_rho + 4.0 * c_rho * ell + 4.0 * ell * ell;
    let l6 = ell.powi(6);
    let (s4, s8) = (s.powi(4), s.powi(8));
    let c_chi = -3.0 * ell * (-8.0 * l6 + p * p) / s4;
    let q_chi = -3.0 * ell * (48.0 * ell.powi(7) + c_rho * p * p) * (p * p - 4.0 * l6) / (4.0 * s8);
    let q_gamma = -36.0 * ell.powi(8) * (p * p - 4.0 * l6) / s8;
    Ok([c_chi, q_chi, q_gamma, -ell * ell * q_gamma])
}

#[derive(Clone, Debug)]
pub struct VdbCheck {
    pub holds: bool,
    pub max_residual: f64,
    pub checked: usize,
    pub skipped: usize,
    /// Per checked point: base point and the four relative residuals.
    pub residuals: Vec<((f64, f64), [f64; 4])>,
}

pub fn characterize_vdb(src: &MetricSource, points: &[(f64, f64)], tol: f64) -> Result<VdbCheck> {
    let mut residuals = Vec::new();
    let mut skipped = 0;
    let mut max_residual = 0.0f64;
    for &pt in points {
        let s = src.sample(pt, 1)?;
        if !classify(&s.jets, DEFAULT_TOL).generic {
            skipped += 1;
            continue;
        }
        let six = first(&s.jets).six();
        let Ok(o) = vdb_oracle(six[0], six[4]) else {
            skipped += 1;
            continue;
        };
        let got = [six[1], six[2], six[3], six[5]];
        let r = [0, 1, 2, 3].map(|k| rel_diff(got[k], o[k]));
        max_residual = r.iter().fold(max_residual, |m, x| m.max(*x));
        residuals.push((pt, r));
    }
    let holds = !residuals.is_empty() && max_residual <= tol;
    Ok(VdbCheck { holds, max_residual, checked: residuals.len(), skipped, residuals })
}

impl Signature {
    pub fn to_json(&self) -> Value {
        let samples: Vec<Value> = self
            .samples
            .iter()
            .map(|s| {
                json!({
                    "I1": s.i1,
                    "I2": s.i2,
                    "rest": s.rest,
                    "slopes": s.slopes,
                    "point": [s.point.0, s.point.1],
                    "delta": s.delta,
                })
            })
            .collect();
        json!({
            "name": self.name,
            "pair": [FUNDAMENTAL_IDS[self.pair.0], FUNDAMENTAL_IDS[self.pair.1]],
            "rest_ids": rest_ids(self.pair).map(|i| FUNDAMENTAL_IDS[i]),
            "domain": rect_json(&self.domain),
            "skipped": self.skipped,
            "samples": samples,
        })
    }

    pub fn from_json(doc: &Value) -> Result<Signature> {
        let bad = |w: &str| Error::Json(format!("signature: bad or missing '{w}'"));
        let name = doc["name"].as_str().ok_or_else(|| bad("name"))?.to_string();
        let pair = doc["pair"].as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("pair"))?;
        let id = |v: &Value| v.as_str().and_then(canonical_id).ok_or_else(|| bad("pair"));
        let pair = (id(&pair[0])?, id(&pair[1])?);
        let domain = parse_rect(&doc["domain"])?;
        let skipped = doc["skipped"].as_u64().ok_or_else(|| bad("skipped"))? as usize;
        let num = |v: &Value, w: &str| v.as_f64().ok_or_else(|| bad(w));
        let mut samples = Vec::new();
        for s in doc["samples"].as_array().ok_or_else(|| bad("samples"))? {
            let arr = |w: &str, n: usize| -> Result<Vec<f64>> {
                let a = s[w].as_array().filter(|a| a.len() == n).ok_or_else(|| bad(w))?;
                a.iter().map(|v| num(v, w)).collect()
            };
            let rest = arr("rest", 4)?;
            let point = arr("point", 2)?;
            let sl = s["slopes"].as_array().filter(|a| a.len() == 4).ok_or_else(|| bad("slopes"))?;
            let mut slopes = [[0.0; 2]; 4];
            for (k, row) in sl.iter().enumerate() {
                let row = row.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("slopes"))?;
                slopes[k] = [num(&row[0], "slopes")?, num(&row[1], "slopes")?];
            }
            samples.push(SigSample {
                i1: num(&s["I1"], "I1")?,
                i2: num(&s["I2"], "I2")?,
                rest: [rest[0], rest[1], rest[2], rest[3]],
                slopes,
                point: (point[0], point[1]),
                delta: num(&s["delta"], "delta")?,
            });
        }
        Ok(Signature { name, pair, samples, domain, skipped })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_pole() {
        assert!(matches!(vdb_oracle(-1.0, 0.5), Err(Error::Pole(_))));
    }

    #[test]
    fn oracle_theta_identity() {
        let o = vdb_oracle(-1.9, 0.6).unwrap();
        assert_eq!(o[3], -0.36 * o[2]);
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pair("Crho,lC").unwrap(), (0, 4));
        assert!(parse_pair("Crho").is_err());
        assert!(parse_pair("Crho,bogus").is_err());
        assert!(parse_pair("Crho,C_rho").is_err());
    }

    #[test]
    fn rest_excludes_pair() {
        assert_eq!(rest_ids((0, 4)), [1, 2, 3, 5]);
    }
}
