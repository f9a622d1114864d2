//! Command-line interface.

use std::fs;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::catalog::{self, ParamValue, Params};
use crate::einstein::{kundu_a_constancy, onshell_relations, residual};
use crate::equivalence::{compare_sources, parse_pair, DEFAULT_EQUIV_TOL};
use crate::error::{Error, Result};
use crate::invariants::{extended, first, relations_first, RelationResidual, FUNDAMENTAL_IDS};
use crate::metric::{classify, PointJets, Rect, DEFAULT_TOL};
use crate::rank::{jacobian_rank, random_probe, InvariantSet, DEFAULT_EPS};
use crate::report::{csv_header, csv_row, num, nums, to_json_string, to_text};
use crate::second::{order2_names, order2_values, relations_second, second_invariants};
use crate::source::{MetricSource, Sample};
use crate::transform::{invariance_row, PseudoTransform};

#[derive(Parser, Debug)]
#[command(name = "g2inv", version, about = "Scalar invariants of metrics with two commuting Killing vectors")]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct PointsArg {
    /// `grid`, or a list like `0.5,1;0.6,1.1`.
    #[arg(long, default_value = "grid")]
    pub points: String,
    /// Grid size for `--points grid`, as `N1xN2`.
    #[arg(long, default_value = "5x4")]
    pub grid: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Invariants at one point.
    Invariants {
        metric: String,
        #[arg(long)]
        at: String,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Fundamental invariants over a grid.
    Grid {
        metric: String,
        /// `a:b:n`
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
        #[arg(long)]
        out: String,
        #[arg(long)]
        csv: bool,
        /// Include the order-2 invariants.
        #[arg(long)]
        second: bool,
    },
    /// Λ-vacuum residuals.
    CheckEinstein {
        metric: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[command(flatten)]
        points: PointsArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Relation suites.
    CheckRelations {
        metric: String,
        #[arg(long)]
        first: bool,
        #[arg(long)]
        second: bool,
        #[arg(long)]
        onshell: bool,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[command(flatten)]
        points: PointsArg,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Numerical rank of an invariant list.
    Rank {
        metric: Option<String>,
        #[arg(long)]
        random: Option<u64>,
        #[arg(long)]
        set: String,
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Apply a coordinate transform.
    Transform {
        metric: String,
        transform: String,
        #[arg(long)]
        report_invariance: bool,
        #[command(flatten)]
        points: PointsArg,
        #[arg(long)]
        emit: Option<String>,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Signature comparison of two metrics.
    Equiv {
        a: String,
        b: String,
        #[arg(long, default_value = "Crho,lC")]
        pair: String,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_EQUIV_TOL)]
        tol: f64,
        #[arg(long)]
        radius: Option<f64>,
        /// Write both signatures to this file.
        #[arg(long)]
        signatures: Option<String>,
    },
    /// List or instantiate catalog metrics.
    Catalog {
        name: Option<String>,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        emit: Option<String>,
    },
}

struct Outcome {
    report: Value,
    code: i32,
}

fn ok(report: Value) -> Outcome {
    Outcome { report, code: 0 }
}

fn pass(report: Value, passed: bool) -> Outcome {
    Outcome { report, code: if passed { 0 } else { 1 } }
}

fn load(path: &str) -> Result<MetricSource> {
    let text = fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read '{path}': {e}")))?;
    MetricSource::from_json_str(&text)
}

pub fn parse_point(s: &str) -> Result<(f64, f64)> {
    let v: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Invalid(format!("point must be 't1,t2', got '{s}'"));
    if v.len() != 2 {
        return Err(bad());
    }
    Ok((v[0].parse().map_err(|_| bad())?, v[1].parse().map_err(|_| bad())?))
}

fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let v: Vec<&str> = s.split(':').collect();
    let bad = || Error::Invalid(format!("range must be 'a:b:n', got '{s}'"));
    if v.len() != 3 {
        return Err(bad());
    }
    let n: usize = v[2].parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((v[0].parse().map_err(|_| bad())?, v[1].parse().map_err(|_| bad())?, n))
}

fn points_of(src: &MetricSource, p: &PointsArg) -> Result<Vec<(f64, f64)>> {
    if p.points == "grid" {
        let dims: Vec<&str> = p.grid.split('x').collect();
        let bad = || Error::Invalid(format!("grid must be 'N1xN2', got '{}'", p.grid));
        if dims.len() != 2 {
            return Err(bad());
        }
        let n1: usize = dims[0].parse().map_err(|_| bad())?;
        let n2: usize = dims[1].parse().map_err(|_| bad())?;
        let rect = src
            .domain()
            .ok_or_else(|| Error::Invalid(format!("metric '{}' has no domain; pass --points", src.name())))?;
        Ok(rect.grid(n1, n2))
    } else {
        p.points.split(';').filter(|s| !s.trim().is_empty()).map(parse_point).collect()
    }
}

fn pt(p: (f64, f64)) -> Value {
    nums(&[p.0, p.1])
}

fn residuals_json(rs: &[RelationResidual]) -> Value {
    let mut m = serde_json::Map::new();
    for r in rs {
        m.insert(
            r.name.clone(),
            json!({
                "residual": num(r.residual),
                "raw": num(r.raw),
                "scale": num(r.scale),
                "skipped": r.skipped,
                "note": r.note,
            }),
        );
    }
    Value::Object(m)
}

fn six_json(six: &[f64; 6]) -> Value {
    let mut m = serde_json::Map::new();
    for (k, v) in FUNDAMENTAL_IDS.iter().zip(six) {
        m.insert((*k).into(), num(*v));
    }
    Value::Object(m)
}

fn flags_json(j: &PointJets, tol: f64) -> Value {
    let f = classify(j, tol);
    json!({
        "sign_det_h": f.sign_det_h,
        "sign_det_gt": f.sign_det_gt,
        "C_rho_zero": f.c_rho_zero,
        "ell_C_zero": f.ell_c_zero,
        "orthogonally_transitive": f.orthogonally_transitive,
        "generic": f.generic,
    })
}

fn invariants_json(s: &Sample, order: usize, tol: f64) -> Result<Value> {
    let j = &s.jets;
    let inv = extended(j, tol);
    let mut ext = json!({
        "C_gamma": num(inv.c_gamma),
        "Q_rho": num(inv.q_rho),
        "Theta_I": num(inv.theta_i),
        "Theta_II": num(inv.theta_ii),
        "Theta_III": num(inv.theta_iii),
        "ell_H": num(inv.ell_h),
        "ell_Hperp": num(inv.ell_hperp),
        "ell_Cperp": num(inv.ell_cperp),
    });
    if let Some(o) = &inv.oneill {
        for (k, v) in [
            ("Theta_C", o.theta_c),
            ("Theta_Cperp", o.theta_cperp),
            ("ell_T", o.ell_t),
            ("ell_Tperp", o.ell_tperp),
            ("T331", o.t331),
            ("T441", o.t441),
            ("T332", o.t332),
            ("T342", o.t342),
            ("T341", o.t341),
            ("A123", o.a123),
            ("A213", o.a213),
            ("A312", o.a312),
            ("A321", o.a321),
        ] {
            ext[k] = num(v);
        }
    }
    let fr = crate::invariants::frame(j, tol);
    let mut doc = json!({
        "point": pt(j.point),
        "base_point": pt(s.base_point),
        "fundamental": six_json(&inv.six()),
        "extended": ext,
        "flags": flags_json(j, tol),
        "frame_notice": fr.notice(),
    });
    if order >= 2 {
        let s2 = second_invariants(j, tol)?;
        let vals = order2_values(&s2);
        let mut m = serde_json::Map::new();
        for (k, v) in order2_names().iter().zip(vals) {
            m.insert(k.clone(), num(v));
        }
        for (k, v) in [
            ("Q_ric", s2.q_ric),
            ("C_nu_prime", s2.c_nu_prime),
            ("Q_nu", s2.q_nu),
            ("K_Xi", s2.k_xi),
            ("K_Xiperp", s2.k_xiperp),
        ] {
            m.insert(k.into(), num(v));
        }
        m.insert("J1".into(), s2.j1.map_or(Value::Null, num));
        m.insert("J2".into(), s2.j2.map_or(Value::Null, num));
        doc["second"] = Value::Object(m);
        doc["second_notice"] = json!(s2.notice);
    }
    Ok(doc)
}

/// Invariant report at a base-chart point, as emitted by `invariants --json`.
pub fn invariants_report(src: &MetricSource, point: (f64, f64), order: usize, tol: f64) -> Result<Value> {
    if !(1..=2).contains(&order) {
        return Err(Error::OrderOutOfRange(order));
    }
    let s = src.sample(point, order)?;
    let mut doc = invariants_json(&s, order, tol)?;
    doc["metric"] = json!(src.name());
    Ok(doc)
}

fn cmd_invariants(metric: &str, at: &str, order: usize, tol: f64) -> Result<Outcome> {
    Ok(ok(invariants_report(&load(metric)?, parse_point(at)?, order, tol)?))
}

fn cmd_grid(metric: &str, t1: &str, t2: &str, out: &str, csv: bool, second: bool) -> Result<Outcome> {
    let src = load(metric)?;
    let (a1, b1, n1) = parse_range(t1)?;
    let (a2, b2, n2) = parse_range(t2)?;
    let points = Rect::new((a1, b1), (a2, b2)).grid(n1, n2);
    let order = if second { 2 } else { 1 };
    let names = if second { order2_names()[6..].to_vec() } else { vec![] };
    let mut rows: Vec<((f64, f64), Vec<Option<f64>>)> = Vec::new();
    let mut failed = 0;
    for p in &points {
        let vals = match src.sample(*p, order) {
            Ok(s) => {
                let mut v: Vec<Option<f64>> = first(&s.jets).six().iter().map(|x| Some(*x)).collect();
                if second {
                    match second_invariants(&s.jets, DEFAULT_TOL) {
                        Ok(s2) => v.extend(order2_values(&s2)[6..].iter().map(|x| Some(*x))),
                        Err(_) => v.extend(std::iter::repeat_n(None, names.len())),
                    }
                }
                (s.jets.point, v)
            }
            Err(_) => {
                failed += 1;
                (*p, vec![None; 6 + names.len()])
            }
        };
        rows.push(vals);
    }
    let text = if csv {
        let mut t = csv_header(&names);
        t.push('\n');
        for (p, v) in &rows {
            t.push_str(&csv_row(*p, v));
            t.push('\n');
        }
        t
    } else {
        let mut cols = FUNDAMENTAL_IDS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        cols.extend(names.iter().cloned());
        let rj: Vec<Value> = rows
            .iter()
            .map(|(p, v)| json!({"point": pt(*p), "values": v.iter().map(|x| x.map_or(Value::Null, num)).collect::<Vec<_>>()}))
            .collect();
        to_json_string(&json!({"metric": src.name(), "columns": cols, "rows": rj}))
    };
    fs::write(out, text).map_err(|e| Error::Invalid(format!("cannot write '{out}': {e}")))?;
    Ok(ok(json!({"metric": src.name(), "points": points.len(), "failed": failed, "out": out})))
}

fn cmd_check_einstein(metric: &str, lambda: f64, p: &PointsArg, tol: f64) -> Result<Outcome> {
    let src = load(metric)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for bp in points_of(&src, p)? {
        let s = src.sample(bp, 2)?;
        let r = residual(&s.jets, lambda)?;
        worst = worst.max(r.normalized);
        rows.push(json!({"point": pt(s.jets.point), "normalized": num(r.normalized), "max_abs": num(r.max_abs)}));
    }
    let passed = worst < tol;
    Ok(pass(
        json!({"metric": src.name(), "lambda": num(lambda), "tol": num(tol), "max_normalized": num(worst), "pass": passed, "points": rows}),
        passed,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_check_relations(
    metric: &str,
    first_suite: bool,
    second_suite: bool,
    onshell: bool,
    lambda: Option<f64>,
    p: &PointsArg,
    tol: f64,
) -> Result<Outcome> {
    let src = load(metric)?;
    let (mut f1, mut f2) = (first_suite, second_suite);
    if !f1 && !f2 && !onshell {
        f1 = true;
        f2 = true;
    }
    if onshell && lambda.is_none() {
        return Err(Error::Invalid("--onshell requires --lambda".into()));
    }
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut jets = Vec::new();
    for bp in points_of(&src, p)? {
        let s = src.sample(bp, 2)?;
        let mut doc = json!({"point": pt(s.jets.point)});
        let mut all = Vec::new();
        if f1 {
            let r = relations_first(&s.jets, DEFAULT_TOL);
            doc["first"] = residuals_json(&r);
            all.extend(r);
        }
        if f2 {
            let r = relations_second(&s.jets, DEFAULT_TOL)?;
            doc["second"] = residuals_json(&r);
            all.extend(r);
        }
        if let (true, Some(l)) = (onshell, lambda) {
            let r = onshell_relations(&s.jets, l, DEFAULT_TOL)?;
            doc["onshell"] = residuals_json(&r);
            doc["einstein_residual"] = num(residual(&s.jets, l)?.normalized);
            all.extend(r);
        }
        for r in all.iter().filter(|r| r.skipped.is_none()) {
            worst = worst.max(r.residual.abs());
        }
        rows.push(doc);
        jets.push(s.jets);
    }
    let mut report = json!({"metric": src.name(), "tol": num(tol), "max_residual": num(worst), "points": rows});
    let mut passed = worst < tol;
    if onshell {
        let k = kundu_a_constancy(&jets);
        report["kundu_A"] = json!({"deviation": num(k.deviation), "notice": k.notice});
        passed &= k.deviation < tol;
    }
    report["pass"] = json!(passed);
    Ok(pass(report, passed))
}

fn cmd_rank(metric: Option<&str>, random: Option<u64>, set: &str, at: Option<&str>, eps: f64) -> Result<Outcome> {
    let set = InvariantSet::from_name(set)?;
    let (label, j) = match (metric, random) {
        (Some(_), Some(_)) => return Err(Error::Invalid("give a metric or --random, not both".into())),
        (None, None) => return Err(Error::Invalid("give a metric file or --random SEED".into())),
        (None, Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (format!("random probe {seed}"), random_probe(&mut rng, set.jet_order()))
        }
        (Some(path), None) => {
            let src = load(path)?;
            let p = match at {
                Some(a) => parse_point(a)?,
                None => {
                    let r = src.domain().ok_or_else(|| Error::Invalid("metric has no domain; pass --at".into()))?;
                    (0.5 * (r.t1.0 + r.t1.1), 0.5 * (r.t2.0 + r.t2.1))
                }
            };
            (src.name().to_string(), src.sample(p, set.jet_order())?.jets)
        }
    };
    let r = jacobian_rank(set, &j, eps)?;
    let passed = r.rank == r.expected;
    Ok(pass(
        json!({
            "probe": label,
            "set": set.name(),
            "rank": r.rank,
            "expected": r.expected,
            "eps": num(eps),
            "singular_values": nums(&r.singular_values),
            "notice": r.notice,
        }),
        passed,
    ))
}

fn cmd_transform(
    metric: &str,
    transform: &str,
    report: bool,
    p: &PointsArg,
    emit: Option<&str>,
    tol: f64,
) -> Result<Outcome> {
    let src = load(metric)?;
    let MetricSource::Plain(base) = &src else {
        return Err(Error::Invalid("transform expects a plain metric document".into()));
    };
    let text = fs::read_to_string(transform).map_err(|e| Error::Invalid(format!("cannot read '{transform}': {e}")))?;
    let tr = PseudoTransform::from_json_str(&text)?;
    let out = MetricSource::Transformed {
        name: format!("{}_transformed", base.name),
        base: base.clone(),
        transform: tr.clone(),
    };
    let mut doc = json!({"metric": src.name()});
    if let Some(path) = emit {
        fs::write(path, to_json_string(&out.to_json()))
            .map_err(|e| Error::Invalid(format!("cannot write '{path}': {e}")))?;
        doc["emitted"] = json!(path);
    }
    if !report {
        if emit.is_none() {
            doc["transformed"] = out.to_json();
        }
        return Ok(ok(doc));
    }
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut signs_ok = true;
    for bp in points_of(&src, p)? {
        let row = invariance_row(&base.point_jets(bp, 1)?, &tr, DEFAULT_TOL)?;
        worst = worst.max(row.max_residual());
        signs_ok &= row.signs_ok(tol);
        rows.push(json!({
            "point": pt(row.point),
            "image": pt(row.image),
            "eps": [row.eps.0, row.eps.1],
            "residuals": nums(&row.residuals),
            "frame_signs": nums(&row.frame_signs),
            "expected_signs": nums(&row.expected_signs),
            "frame_errors": nums(&row.frame_errors),
            "theta_signs": nums(&row.theta_signs),
            "notice": row.notice,
        }));
    }
    let passed = worst < tol && signs_ok;
    doc["max_residual"] = num(worst);
    doc["sign_laws_hold"] = json!(signs_ok);
    doc["pass"] = json!(passed);
    doc["points"] = Value::Array(rows);
    Ok(pass(doc, passed))
}

fn cmd_equiv(
    a: &str,
    b: &str,
    pair: &str,
    grid: usize,
    tol: f64,
    radius: Option<f64>,
    sig_out: Option<&str>,
) -> Result<Outcome> {
    let (sa, sb) = (load(a)?, load(b)?);
    let pair = parse_pair(pair)?;
    let r = compare_sources(&sa, &sb, grid, pair, tol, radius)?;
    let c = &r.comparison;
    if let Some(path) = sig_out {
        let doc = json!({
            "a": r.a.as_ref().map(|s| s.to_json()),
            "b": r.b.as_ref().map(|s| s.to_json()),
        });
        fs::write(path, to_json_string(&doc)).map_err(|e| Error::Invalid(format!("cannot write '{path}': {e}")))?;
    }
    let doc = json!({
        "a": sa.name(),
        "b": sb.name(),
        "pair": [FUNDAMENTAL_IDS[pair.0], FUNDAMENTAL_IDS[pair.1]],
        "verdict": c.verdict.name(),
        "coverage_a": num(c.coverage_a),
        "coverage_b": num(c.coverage_b),
        "matched": c.matched,
        "max_discrepancy": num(c.max_discrepancy),
        "radius": num(c.radius),
        "tol": num(c.tol),
        "witness": c.witness.as_ref().map(|w| json!({
            "point_a": pt(w.point_a),
            "point_b": pt(w.point_b),
            "invariant": w.invariant,
            "value_a": num(w.value_a),
            "value_b": num(w.value_b),
        })),
        "note": c.note,
    });
    Ok(Outcome { report: doc, code: c.verdict.exit_code() })
}

fn cmd_catalog(name: Option<&str>, params: &[String], emit: Option<&str>) -> Result<Outcome> {
    let Some(name) = name else {
        return Ok(ok(json!({"metrics": catalog::NAMES})));
    };
    let mut p = Params::new();
    for kv in params {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Invalid(format!("parameter must be k=v, got '{kv}'")))?;
        p.insert(k.trim().to_string(), ParamValue::parse(v));
    }
    let m = catalog::catalog(name, &p)?;
    let doc = m.to_json();
    match emit {
        Some(path) => {
            fs::write(path, to_json_string(&doc)).map_err(|e| Error::Invalid(format!("cannot write '{path}': {e}")))?;
            Ok(ok(json!({"metric": m.name, "emitted": path})))
        }
        None => Ok(ok(doc)),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Invariants { metric, at, order, tol } => cmd_invariants(metric, at, *order, *tol),
        Command::Grid { metric, t1, t2, out, csv, second } => cmd_grid(metric, t1, t2, out, *csv, *second),
        Command::CheckEinstein { metric, lambda, points, tol } => cmd_check_einstein(metric, *lambda, points, *tol),
        Command::CheckRelations { metric, first, second, onshell, lambda, points, tol } => {
            cmd_check_relations(metric, *first, *second, *onshell, *lambda, points, *tol)
        }
        Command::Rank { metric, random, set, at, eps } => {
            cmd_rank(metric.as_deref(), *random, set, at.as_deref(), *eps)
        }
        Command::Transform { metric, transform, report_invariance, points, emit, tol } => {
            cmd_transform(metric, transform, *report_invariance, points, emit.as_deref(), *tol)
        }
        Command::Equiv { a, b, pair, grid, tol, radius, signatures } => {
            cmd_equiv(a, b, pair, *grid, *tol, *radius, signatures.as_deref())
        }
        Command::Catalog { name, params, emit } => cmd_catalog(name.as_deref(), params, emit.as_deref()),
    }
}

/// Run with explicit arguments and streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(o) => {
            let text = if cli.json { to_json_string(&o.report) } else { to_text(&o.report) };
            let _ = out.write_all(text.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parsing() {
        assert_eq!(parse_point("0.5, 1").unwrap(), (0.5, 1.0));
        assert!(parse_point("0.5").is_err());
        assert_eq!(parse_range("0:1:3").unwrap(), (0.0, 1.0, 3));
        assert!(parse_range("0:1:0").is_err());
    }

    #[test]
    fn usage_error_exit_code() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["g2inv", "frobnicate"], &mut o, &mut e), 2);
        assert_eq!(run_with(["g2inv", "catalog", "nosuch"], &mut o, &mut e), 2);
    }
}
