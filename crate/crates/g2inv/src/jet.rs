//! Truncated Taylor jets in two base variables.
//!
//! A [`Jet`] stores raw partial derivatives `∂^{i+j} f / ∂(t1)^i ∂(t2)^j` for
//! `i + j <= order`, with `order <= 3`. Coefficients are generic over
//! [`Scalar`], so a jet whose coefficients are themselves jets is a valid
//! scalar too; this is how derivatives of derived fields are obtained.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 3;
const SLOTS: usize = 10;

const BINOM: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];

/// Number of stored coefficients for a given order.
pub const fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Slot of the multi-index `(i, j)`: grouped by total degree, then by `j`.
pub const fn slot(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

/// Multi-index stored at a slot.
pub fn multi_index(s: usize) -> (usize, usize) {
    let mut n = 0;
    while (n + 1) * (n + 2) / 2 <= s {
        n += 1;
    }
    let j = s - n * (n + 1) / 2;
    (n - j, j)
}

/// Field-like numbers the invariant formulas are written against.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// The underlying real value (innermost constant term).
    fn re(&self) -> f64;
    fn zero_like(&self) -> Self;
    fn const_like(&self, v: f64) -> Self;
    fn is_finite(&self) -> bool;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn powf(self, p: f64) -> Self;

    fn recip(self) -> Self {
        self.const_like(1.0) / self
    }

    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        let mut acc = self.const_like(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn re(&self) -> f64 {
        *self
    }
    fn zero_like(&self) -> Self {
        0.0
    }
    fn const_like(&self, v: f64) -> Self {
        v
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Binary operations of the checked arithmetic API.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions available for composition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    PowConst(f64),
}

impl Elementary {
    pub fn name(&self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sqrt => "sqrt",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Tan => "tan",
            Elementary::Sinh => "sinh",
            Elementary::Cosh => "cosh",
            Elementary::Tanh => "tanh",
            Elementary::PowConst(_) => "pow",
        }
    }

    /// Domain check on the real value of the argument.
    pub fn check_domain(&self, x: f64) -> Result<()> {
        let ok = match self {
            Elementary::Ln | Elementary::Sqrt => x > 0.0,
            Elementary::Tan => x.cos() != 0.0,
            Elementary::PowConst(p) => x > 0.0 || (x != 0.0 && p.fract() == 0.0) || *p >= 3.0,
            _ => true,
        } && x.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Singular(format!("{} undefined at {}", self.name(), x)))
        }
    }

    /// `f(x), f'(x), f''(x), f'''(x)` evaluated in the scalar type of `x`.
    fn derivatives<T: Scalar>(&self, x: T) -> [T; 4] {
        match *self {
            Elementary::Exp => {
                let e = x.exp();
                [e, e, e, e]
            }
            Elementary::Ln => {
                let r = x.recip();
                let r2 = r * r;
                [x.ln(), r, -r2, r2 * r * 2.0]
            }
            Elementary::Sqrt => {
                let s = x.sqrt();
                let r = x.recip();
                let d1 = s.recip() * 0.5;
                let d2 = d1 * r * -0.5;
                let d3 = d2 * r * -1.5;
                [s, d1, d2, d3]
            }
            Elementary::Sin => {
                let (s, c) = (x.sin(), x.cos());
                [s, c, -s, -c]
            }
            Elementary::Cos => {
                let (s, c) = (x.sin(), x.cos());
                [c, -s, -c, s]
            }
            Elementary::Tan => {
                let t = x.tan();
                let sec2 = t * t + 1.0;
                let d2 = sec2 * t * 2.0;
                let d3 = sec2 * (t * t * 3.0 + 1.0) * 2.0;
                [t, sec2, d2, d3]
            }
            Elementary::Sinh => {
                let (s, c) = (x.sinh(), x.cosh());
                [s, c, s, c]
            }
            Elementary::Cosh => {
                let (s, c) = (x.sinh(), x.cosh());
                [c, s, c, s]
            }
            Elementary::Tanh => {
                let t = x.tanh();
                let d1 = -(t * t) + 1.0;
                let d2 = d1 * t * -2.0;
                let d3 = d1 * (t * t * 3.0 - 1.0) * 2.0;
                [t, d1, d2, d3]
            }
            Elementary::PowConst(p) => {
                let v = x.powf(p);
                let r = x.recip();
                let d1 = v * r * p;
                let d2 = d1 * r * (p - 1.0);
                let d3 = d2 * r * (p - 2.0);
                [v, d1, d2, d3]
            }
        }
    }

    /// Apply to a plain real number.
    pub fn apply_f64(&self, x: f64) -> f64 {
        self.derivatives(x)[0]
    }
}

/// Truncated two-variable jet with raw partial-derivative coefficients.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<T = f64> {
    order: u8,
    c: [T; SLOTS],
}

/// Jet with real coefficients.
pub type Jet2 = Jet<f64>;

impl<T: Scalar> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("order", &self.order).field("coeffs", &self.coeffs()).finish()
    }
}

impl Jet<f64> {
    /// Constant jet (`var = None`) or coordinate jet of `t^{var+1}`.
    pub fn seed(value: f64, var: Option<usize>, order: usize) -> Result<Jet2> {
        if order > MAX_ORDER {
            return Err(Error::OrderOutOfRange(order));
        }
        let mut j = Jet::constant(value, order);
        if let Some(v) = var {
            if v > 1 {
                return Err(Error::Invalid(format!("variable index {v} out of range")));
            }
            if order >= 1 {
                j.c[1 + v] = 1.0;
            }
        }
        Ok(j)
    }

    pub fn constant(value: f64, order: usize) -> Jet2 {
        let mut c = [0.0; SLOTS];
        c[0] = value;
        Jet { order: order.min(MAX_ORDER) as u8, c }
    }

    /// Build from a coefficient slice in slot order.
    pub fn from_coeffs(order: usize, coeffs: &[f64]) -> Result<Jet2> {
        if order > MAX_ORDER {
            return Err(Error::OrderOutOfRange(order));
        }
        if coeffs.len() != coeff_count(order) {
            return Err(Error::Invalid(format!(
                "expected {} coefficients for order {order}, got {}",
                coeff_count(order),
                coeffs.len()
            )));
        }
        let mut c = [0.0; SLOTS];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Jet { order: order as u8, c })
    }

    /// Checked binary arithmetic.
    pub fn arith(a: &Jet2, b: &Jet2, op: ArithOp) -> Result<Jet2> {
        if a.order != b.order {
            return Err(Error::OrderMismatch(a.order as usize, b.order as usize));
        }
        let r = match op {
            ArithOp::Add => *a + *b,
            ArithOp::Sub => *a - *b,
            ArithOp::Mul => *a * *b,
            ArithOp::Div => {
                if b.c[0] == 0.0 {
                    return Err(Error::Singular("division by a jet with zero value".into()));
                }
                *a / *b
            }
        };
        r.finite_or("arithmetic")
    }

    /// Checked elementary function.
    pub fn elementary(f: Elementary, a: &Jet2) -> Result<Jet2> {
        f.check_domain(a.c[0])?;
        a.compose(f).finite_or(f.name())
    }

    fn finite_or(self, what: &str) -> Result<Jet2> {
        if self.coeffs().iter().all(|v| v.is_finite()) {
            Ok(self)
        } else {
            Err(Error::Singular(format!("{what} produced a non-finite jet")))
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl<T: Scalar> Jet<T> {
    /// Generic constructor; `coeffs` must be non-empty and in slot order.
    pub fn from_slots(order: usize, coeffs: &[T]) -> Jet<T> {
        assert!(order <= MAX_ORDER && coeffs.len() == coeff_count(order));
        let mut c = [coeffs[0].zero_like(); SLOTS];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet { order: order as u8, c }
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c[..coeff_count(self.order as usize)]
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Raw partial `∂^{i+j}/∂(t1)^i ∂(t2)^j`; `None` beyond the stored order.
    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        (i + j <= self.order as usize).then(|| self.c[slot(i, j)])
    }

    /// First partial along `var` (0 or 1).
    pub fn d(&self, var: usize) -> T {
        assert!(self.order >= 1, "first derivative needs order >= 1");
        self.c[1 + var]
    }

    /// Second partial `∂_a ∂_b`.
    pub fn d2(&self, a: usize, b: usize) -> T {
        assert!(self.order >= 2, "second derivative needs order >= 2");
        self.c[3 + a + b]
    }

    /// Reinterpret an order-k jet as an order-(k-1) jet whose coefficients
    /// are order-1 jets: slot `(i, j)` holds `(f_ij, f_{i+1,j}, f_{i,j+1})`.
    pub fn nest(&self) -> Jet<Jet<T>> {
        assert!(self.order >= 1, "nesting needs order >= 1");
        let outer = self.order as usize - 1;
        let z = self.c[0].zero_like();
        let inner = |i: usize, j: usize| {
            let mut c = [z; SLOTS];
            c[0] = self.c[slot(i, j)];
            c[1] = self.c[slot(i + 1, j)];
            c[2] = self.c[slot(i, j + 1)];
            Jet { order: 1, c }
        };
        let mut c = [inner(0, 0).zero_like(); SLOTS];
        for (s, v) in c.iter_mut().enumerate().take(coeff_count(outer)) {
            let (i, j) = multi_index(s);
            *v = inner(i, j);
        }
        Jet { order: outer as u8, c }
    }

    /// Constant jet with the shape of `self`.
    pub fn lift(&self, v: T) -> Jet<T> {
        let z = v.zero_like();
        let mut c = [z; SLOTS];
        c[0] = v;
        Jet { order: self.order, c }
    }

    /// Jet of the partial derivative along `var`, one order lower.
    pub fn partial(&self, var: usize) -> Jet<T> {
        assert!(self.order >= 1, "partial needs order >= 1");
        let o = self.order as usize - 1;
        let z = self.c[0].zero_like();
        let mut c = [z; SLOTS];
        for (s, v) in c.iter_mut().enumerate().take(coeff_count(o)) {
            let (i, j) = multi_index(s);
            *v = if var == 0 { self.c[slot(i + 1, j)] } else { self.c[slot(i, j + 1)] };
        }
        Jet { order: o as u8, c }
    }

    pub fn truncate(&self, order: usize) -> Jet<T> {
        let o = order.min(self.order as usize);
        let mut c = self.c;
        let z = self.c[0].zero_like();
        for v in c.iter_mut().skip(coeff_count(o)) {
            *v = z;
        }
        Jet { order: o as u8, c }
    }

    pub fn scale(&self, s: T) -> Jet<T> {
        let mut r = *self;
        for v in r.c.iter_mut().take(coeff_count(self.order as usize)) {
            *v = *v * s;
        }
        r
    }

    /// `f ∘ self` through the Taylor expansion of `f` about the value.
    pub fn compose(&self, f: Elementary) -> Jet<T> {
        let d = f.derivatives(self.c[0]);
        let o = self.order as usize;
        let mut delta = *self;
        delta.c[0] = self.c[0].zero_like();
        let mut out = self.lift(d[0]);
        let mut pow = delta;
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1).take(o) {
            fact *= k as f64;
            out = out + pow.scale(*dk / fact);
            if k < o {
                pow = pow * delta;
            }
        }
        out
    }

    fn zip(&self, other: &Jet<T>, f: impl Fn(T, T) -> T) -> Jet<T> {
        debug_assert_eq!(self.order, other.order, "jet order mismatch");
        let mut r = *self;
        for (s, v) in r.c.iter_mut().enumerate().take(coeff_count(self.order as usize)) {
            *v = f(self.c[s], other.c[s]);
        }
        r
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: Jet<T>) -> Jet<T> {
        self.zip(&o, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: Jet<T>) -> Jet<T> {
        self.zip(&o, |a, b| a - b)
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: Jet<T>) -> Jet<T> {
        debug_assert_eq!(self.order, o.order, "jet order mismatch");
        let ord = self.order as usize;
        let mut r = self;
        for s in 0..coeff_count(ord) {
            let (i, j) = multi_index(s);
            let mut acc = self.c[0] * o.c[s];
            for p in 0..=i {
                for q in 0..=j {
                    if p == 0 && q == 0 {
                        continue;
                    }
                    let w = BINOM[i][p] * BINOM[j][q];
                    acc = acc + self.c[slot(p, q)] * o.c[slot(i - p, j - q)] * w;
                }
            }
            r.c[s] = acc;
        }
        r
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Jet<T>;
    fn div(self, o: Jet<T>) -> Jet<T> {
        self * o.compose(Elementary::PowConst(-1.0))
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        let mut r = self;
        for v in r.c.iter_mut().take(coeff_count(self.order as usize)) {
            *v = -*v;
        }
        r
    }
}

impl<T: Scalar> Add<f64> for Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: f64) -> Jet<T> {
        let mut r = self;
        r.c[0] = r.c[0] + o;
        r
    }
}

impl<T: Scalar> Sub<f64> for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: f64) -> Jet<T> {
        self + (-o)
    }
}

impl<T: Scalar> Mul<f64> for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: f64) -> Jet<T> {
        let mut r = self;
        for v in r.c.iter_mut().take(coeff_count(self.order as usize)) {
            *v = *v * o;
        }
        r
    }
}

impl<T: Scalar> Div<f64> for Jet<T> {
    type Output = Jet<T>;
    fn div(self, o: f64) -> Jet<T> {
        self * (1.0 / o)
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn re(&self) -> f64 {
        self.c[0].re()
    }
    fn zero_like(&self) -> Self {
        self.lift(self.c[0].zero_like())
    }
    fn const_like(&self, v: f64) -> Self {
        self.lift(self.c[0].const_like(v))
    }
    fn is_finite(&self) -> bool {
        self.coeffs().iter().all(|v| v.is_finite())
    }
    fn exp(self) -> Self {
        self.compose(Elementary::Exp)
    }
    fn ln(self) -> Self {
        self.compose(Elementary::Ln)
    }
    fn sqrt(self) -> Self {
        self.compose(Elementary::Sqrt)
    }
    fn sin(self) -> Self {
        self.compose(Elementary::Sin)
    }
    fn cos(self) -> Self {
        self.compose(Elementary::Cos)
    }
    fn tan(self) -> Self {
        self.compose(Elementary::Tan)
    }
    fn sinh(self) -> Self {
        self.compose(Elementary::Sinh)
    }
    fn cosh(self) -> Self {
        self.compose(Elementary::Cosh)
    }
    fn tanh(self) -> Self {
        self.compose(Elementary::Tanh)
    }
    fn powf(self, p: f64) -> Self {
        self.compose(Elementary::PowConst(p))
    }
}

/// Central-difference jet of order <= 2 with one Richardson step.
pub fn finite_difference_jet<E>(
    eval: impl Fn(f64, f64) -> std::result::Result<f64, E>,
    point: (f64, f64),
    order: usize,
    h: f64,
) -> std::result::Result<Jet2, E>
where
    E: From<Error>,
{
    if order > 2 {
        return Err(Error::OrderOutOfRange(order).into());
    }
    let (x, y) = point;
    let f0 = eval(x, y)?;
    let mut c = [0.0; SLOTS];
    c[0] = f0;
    if order == 0 {
        return Ok(Jet { order: 0, c });
    }
    let stencil = |h: f64| -> std::result::Result<[f64; 5], E> {
        let fx = (eval(x + h, y)? - eval(x - h, y)?) / (2.0 * h);
        let fy = (eval(x, y + h)? - eval(x, y - h)?) / (2.0 * h);
        if order < 2 {
            return Ok([fx, fy, 0.0, 0.0, 0.0]);
        }
        let fxx = (eval(x + h, y)? - 2.0 * f0 + eval(x - h, y)?) / (h * h);
        let fyy = (eval(x, y + h)? - 2.0 * f0 + eval(x, y - h)?) / (h * h);
        let fxy =
            (eval(x + h, y + h)? - eval(x + h, y - h)? - eval(x - h, y + h)? + eval(x - h, y - h)?) / (4.0 * h * h);
        Ok([fx, fy, fxx, fxy, fyy])
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    for k in 0..coeff_count(order) - 1 {
        c[k + 1] = (4.0 * fine[k] - coarse[k]) / 3.0;
    }
    Ok(Jet { order: order as u8, c })
}
