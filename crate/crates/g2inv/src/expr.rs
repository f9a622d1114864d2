//! Closed-form component expressions in `t1`, `t2` and named parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Elementary, Jet2, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 9] =
        [Func::Exp, Func::Ln, Func::Sqrt, Func::Sin, Func::Cos, Func::Tan, Func::Sinh, Func::Cosh, Func::Tanh];

    pub fn name(self) -> &'static str {
        self.elementary().name()
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn elementary(self) -> Elementary {
        match self {
            Func::Exp => Elementary::Exp,
            Func::Ln => Elementary::Ln,
            Func::Sqrt => Elementary::Sqrt,
            Func::Sin => Elementary::Sin,
            Func::Cos => Elementary::Cos,
            Func::Tan => Elementary::Tan,
            Func::Sinh => Elementary::Sinh,
            Func::Cosh => Elementary::Cosh,
            Func::Tanh => Elementary::Tanh,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// `t1` is 0, `t2` is 1.
    Var(u8),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(Error::Syntax { offset: 0, msg: "empty expression".into() });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { offset: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let exp = self.exponent()?;
        if self.peek() == Some(b'^') {
            return Err(self.err("chained '^' needs parentheses"));
        }
        Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
    }

    fn exponent(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut k = self.pos + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                self.pos = k;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax { offset: start, msg: format!("bad number '{text}'") })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_alphanumeric() || s[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&s[start..self.pos]).unwrap_or("").to_string();
        if self.peek() == Some(b'(') {
            let f = Func::from_name(&name).ok_or_else(|| Error::UnknownFunction(name.clone()))?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        Ok(match name.as_str() {
            "t1" => Expr::Var(0),
            "t2" => Expr::Var(1),
            _ => Expr::Param(name),
        })
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn write_min(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "({v:?})"),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "t{}", i + 1),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_min(f, a, 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let (sym, l, r) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 5),
                };
                write_min(f, a, l)?;
                write!(f, "{sym}")?;
                write_min(f, b, r)
            }
        }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: u8) -> Expr {
        Expr::Var(i)
    }

    pub fn depends_on_vars(&self) -> bool {
        match self {
            Expr::Var(_) => true,
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_vars(),
            Expr::Bin(_, a, b) => a.depends_on_vars() || b.depends_on_vars(),
        }
    }

    /// Identifiers other than `t1`, `t2`.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Call(_, a) => a.walk(f),
            Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    /// Replace `t1`, `t2` by the given expressions.
    pub fn substitute(&self, t1: &Expr, t2: &Expr) -> Expr {
        match self {
            Expr::Var(0) => t1.clone(),
            Expr::Var(_) => t2.clone(),
            Expr::Num(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(t1, t2))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(t1, t2))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.substitute(t1, t2)), Box::new(b.substitute(t1, t2))),
        }
    }

    /// Replace parameters by numeric literals.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Expr {
        match self {
            Expr::Param(p) => params.get(p).map_or_else(|| self.clone(), |v| Expr::Num(*v)),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.bind(params))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.bind(params))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.bind(params)), Box::new(b.bind(params))),
        }
    }

    pub fn eval(&self, params: &BTreeMap<String, f64>, point: (f64, f64)) -> Result<f64> {
        Ok(self.eval_jet(params, point, 0)?.value())
    }

    pub fn eval_jet(&self, params: &BTreeMap<String, f64>, point: (f64, f64), order: usize) -> Result<Jet2> {
        let seeds = [Jet2::seed(point.0, Some(0), order)?, Jet2::seed(point.1, Some(1), order)?];
        self.eval_in(params, &seeds)
    }

    fn eval_in(&self, params: &BTreeMap<String, f64>, seeds: &[Jet2; 2]) -> Result<Jet2> {
        let order = seeds[0].order();
        let r = match self {
            Expr::Num(v) => Jet2::constant(*v, order),
            Expr::Var(i) => seeds[*i as usize],
            Expr::Param(p) => {
                let v = params.get(p).ok_or_else(|| Error::MissingParam(p.clone()))?;
                Jet2::constant(*v, order)
            }
            Expr::Neg(a) => -a.eval_in(params, seeds)?,
            Expr::Call(f, a) => {
                let x = a.eval_in(params, seeds)?;
                Jet2::elementary(f.elementary(), &x).map_err(|e| e.in_expr(self.to_string()))?
            }
            Expr::Bin(BinOp::Pow, a, b) => {
                let base = a.eval_in(params, seeds)?;
                self.pow(base, b, params, seeds)?
            }
            Expr::Bin(op, a, b) => {
                let x = a.eval_in(params, seeds)?;
                let y = b.eval_in(params, seeds)?;
                let op = match op {
                    BinOp::Add => crate::jet::ArithOp::Add,
                    BinOp::Sub => crate::jet::ArithOp::Sub,
                    BinOp::Mul => crate::jet::ArithOp::Mul,
                    _ => crate::jet::ArithOp::Div,
                };
                Jet2::arith(&x, &y, op).map_err(|e| e.in_expr(self.to_string()))?
            }
        };
        Ok(r)
    }

    fn pow(&self, base: Jet2, exp: &Expr, params: &BTreeMap<String, f64>, seeds: &[Jet2; 2]) -> Result<Jet2> {
        let wrap = |e: Error| e.in_expr(self.to_string());
        if exp.depends_on_vars() {
            let b = exp.eval_in(params, seeds)?;
            let l = Jet2::elementary(Elementary::Ln, &base).map_err(wrap)?;
            return Jet2::elementary(Elementary::Exp, &(b * l)).map_err(wrap);
        }
        let p = exp.eval_in(params, &[Jet2::constant(0.0, 0), Jet2::constant(0.0, 0)])?.value();
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            if p < 0.0 && base.value() == 0.0 {
                return Err(wrap(Error::Singular("negative power of zero".into())));
            }
            let r = base.powi(p as i32);
            if !Scalar::is_finite(&r) {
                return Err(wrap(Error::Singular("power overflow".into())));
            }
            return Ok(r);
        }
        Jet2::elementary(Elementary::PowConst(p), &base).map_err(wrap)
    }
}

/// Undeclared identifiers and variable exponents; empty means valid.
pub fn validate(e: &Expr, params: &BTreeSet<String>) -> Vec<String> {
    let mut issues = Vec::new();
    for id in e.identifiers() {
        if !params.contains(&id) {
            issues.push(format!("undeclared identifier \"{id}\""));
        }
    }
    e.walk(&mut |n| {
        if let Expr::Bin(BinOp::Pow, _, b) = n {
            if b.depends_on_vars() {
                issues.push(format!("non-constant exponent in {n}"));
            }
        }
    });
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn grammar_shapes() {
        assert_eq!(
            p("cosh(sqrt(6)*t1)"),
            Expr::Call(
                Func::Cosh,
                Box::new(Expr::Bin(
                    BinOp::Mul,
                    Box::new(Expr::Call(Func::Sqrt, Box::new(Expr::Num(6.0)))),
                    Box::new(Expr::Var(0))
                ))
            )
        );
        assert_eq!(
            p("t1^2 + t2"),
            Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Bin(BinOp::Pow, Box::new(Expr::Var(0)), Box::new(Expr::Num(2.0)))),
                Box::new(Expr::Var(1))
            )
        );
        assert!(matches!(p("sinh(t2)^4"), Expr::Bin(BinOp::Pow, ..)));
        assert_eq!(p("-t1^2"), Expr::Neg(Box::new(p("t1^2"))));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("t1^2^3"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("foo(t1)"), Err(Error::UnknownFunction(_))));
        assert!(matches!(parse(""), Err(Error::Syntax { offset: 0, .. })));
        match parse("t1 + * t2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation() {
        let ps: BTreeSet<String> = ["Lambda".to_string()].into();
        assert!(validate(&p("Lambda*t1"), &ps).is_empty());
        let v = validate(&p("c*t1"), &BTreeSet::new());
        assert_eq!(v, vec!["undeclared identifier \"c\"".to_string()]);
        assert!(validate(&p("t1^t2"), &BTreeSet::new())[0].contains("non-constant exponent"));
    }

    #[test]
    fn evaluation() {
        let none = BTreeMap::new();
        let j = p("t1*t2").eval_jet(&none, (2.0, 3.0), 1).unwrap();
        assert_eq!(j.coeffs(), &[6.0, 3.0, 2.0]);
        let v = p("cosh(sqrt(6)*t1)").eval(&none, (0.5, 0.0)).unwrap();
        assert!((v - (6f64.sqrt() * 0.5).cosh()).abs() < 1e-15);
        assert!((v - 1.848565).abs() < 1e-6);
        let e = p("1/(t1-t1)").eval(&none, (1.0, 1.0)).unwrap_err();
        assert!(matches!(e, Error::InExpr { .. }));
        let neg = p("(t1 - 3)^3").eval(&none, (1.0, 0.0)).unwrap();
        assert_eq!(neg, -8.0);
        let varexp = p("t1^t2").eval_jet(&none, (2.0, 3.0), 1).unwrap();
        assert!((varexp.value() - 8.0).abs() < 1e-12);
        assert!((varexp.d(1) - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn print_round_trip() {
        for s in ["-t1^2", "a - (b - c)", "2^-x", "(-t1)^2", "a/(b*c)", "--x", "exp(-t1)*t2"] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e, "{s} -> {e}");
        }
    }
}
