use std::collections::BTreeSet;
use std::fmt;
use std::ops;

use thiserror::Error;

use crate::Real;

/// Variables an expression may refer to.
///
/// `t` is time; the rest are phase-space coordinates. `u` is the argument of
/// the coupling functions of the generalized Ermakov system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
    Y,
    Z,
    V,
    Vx,
    Vy,
    Vz,
    P,
    U,
}

impl Var {
    pub const ALL: [Var; 10] = [
        Var::T,
        Var::X,
        Var::Y,
        Var::Z,
        Var::V,
        Var::Vx,
        Var::Vy,
        Var::Vz,
        Var::P,
        Var::U,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::V => "v",
            Var::Vx => "vx",
            Var::Vy => "vy",
            Var::Vz => "vz",
            Var::P => "p",
            Var::U => "u",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }

    #[inline]
    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Elementary functions available in expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Ln, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Applies the function, rejecting arguments outside its real domain.
    pub fn apply<T: Real>(self, x: T) -> Option<T> {
        match self {
            Func::Sin => Some(x.sin()),
            Func::Cos => Some(x.cos()),
            Func::Tan => Some(x.tan()),
            Func::Exp => Some(x.exp()),
            Func::Ln if x > T::zero() => Some(x.ln()),
            Func::Sqrt if x >= T::zero() => Some(x.sqrt()),
            Func::Ln | Func::Sqrt => None,
        }
    }
}

/// Scalar expression tree over [`Var`]s.
///
/// Powers carry a constant exponent. Integer exponents evaluate by repeated
/// multiplication; any other exponent needs a positive base.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(&'static str),
    #[error("{what} in `{expr}`")]
    Domain { what: &'static str, expr: String },
}

fn domain(what: &'static str, e: &Expr) -> EvalError {
    EvalError::Domain {
        what,
        expr: e.to_string(),
    }
}

/// Variable bindings for evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Env<T> {
    slots: [Option<T>; 10],
}

impl<T: Copy> Default for Env<T> {
    fn default() -> Self {
        Env { slots: [None; 10] }
    }
}

impl<T: Copy> Env<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Environment binding only `t`.
    pub fn at_t(t: T) -> Self {
        Self::new().with(Var::T, t)
    }

    #[must_use]
    pub fn with(mut self, var: Var, value: T) -> Self {
        self.slots[var.slot()] = Some(value);
        self
    }

    pub fn set(&mut self, var: Var, value: T) {
        self.slots[var.slot()] = Some(value);
    }

    #[inline]
    pub fn get(&self, var: Var) -> Option<T> {
        self.slots[var.slot()]
    }
}

impl<T: Copy> FromIterator<(Var, T)> for Env<T> {
    fn from_iter<I: IntoIterator<Item = (Var, T)>>(iter: I) -> Self {
        let mut env = Env::new();
        for (v, x) in iter {
            env.set(v, x);
        }
        env
    }
}

/// True when `e` is an integer that fits an `i32`.
pub(crate) fn int_exponent(e: f64) -> Option<i32> {
    if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
        Some(e as i32)
    } else {
        None
    }
}

impl Expr {
    pub fn num(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn tan(self) -> Expr {
        Expr::call(Func::Tan, self)
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::call(Func::Ln, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    pub fn pow(self, exponent: f64) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn recip(self) -> Expr {
        Expr::one() / self
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Evaluates the expression. Deterministic: the same tree and bindings
    /// always give the same bits.
    pub fn eval<T: Real>(&self, env: &Env<T>) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Const(c) => T::lit(*c),
            Expr::Var(v) => env.get(*v).ok_or(EvalError::Unbound(v.name()))?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => {
                let num = a.eval(env)?;
                let den = b.eval(env)?;
                if den == T::zero() {
                    return Err(domain("division by zero", self));
                }
                num / den
            }
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Pow(base, e) => {
                let x = base.eval(env)?;
                match int_exponent(*e) {
                    Some(n) => {
                        if n < 0 && x == T::zero() {
                            return Err(domain("division by zero", self));
                        }
                        x.powi(n)
                    }
                    None => {
                        if x <= T::zero() {
                            return Err(domain("non-integer power of non-positive base", self));
                        }
                        x.powf(T::lit(*e))
                    }
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(env)?;
                match f.apply(x) {
                    Some(y) => y,
                    None if *f == Func::Ln => return Err(domain("logarithm of non-positive value", self)),
                    None => return Err(domain("square root of negative value", self)),
                }
            }
        })
    }

    /// Evaluates an expression of `t` alone.
    #[inline]
    pub fn eval_t<T: Real>(&self, t: T) -> Result<T, EvalError> {
        self.eval(&Env::at_t(t))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on(var),
        }
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(var, with));
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) if *v == var => with.clone(),
            Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Pow(a, e) => Expr::Pow(sub(a), *e),
            Expr::Call(f, a) => Expr::Call(*f, sub(a)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => 1 + a.size() + b.size(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.size(),
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

/// Prints in the input grammar, fully parenthesized, with round-trip exact
/// numbers, so that parsing the output reproduces the same values.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_num(f, *c),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, e) => {
                write!(f, "({a} ^ ")?;
                write_num(f, *e)?;
                f.write_str(")")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
        impl<'a> ops::$trait<&'a Expr> for &'a Expr {
            type Output = Expr;
            fn $method(self, rhs: &'a Expr) -> Expr {
                Expr::$variant(Box::new(self.clone()), Box::new(rhs.clone()))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::Const(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::Var(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_basic_values() {
        let e = (Expr::t().pow(2.0) + 1.0).sqrt();
        assert_eq!(e.eval_t(2.0_f64).unwrap(), 5.0_f64.sqrt());
        let e = (-0.2 * Expr::t()).exp();
        assert_eq!(e.eval_t(0.0_f64).unwrap(), 1.0);
    }

    #[test]
    fn unbound_variable_is_reported() {
        let e = Expr::var(Var::X) + Expr::t();
        assert_eq!(e.eval_t(1.0_f64), Err(EvalError::Unbound("x")));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = Expr::one() / (Expr::t() - 1.0);
        match e.eval_t(1.0_f64) {
            Err(EvalError::Domain { what, expr }) => {
                assert_eq!(what, "division by zero");
                assert_eq!(expr, "(1 / (t - 1))");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expr::t().ln().eval_t(0.0_f64).is_err());
        assert!(Expr::t().sqrt().eval_t(-1.0_f64).is_err());
        assert!(Expr::t().pow(0.5).eval_t(0.0_f64).is_err());
        assert!(Expr::t().pow(-2.0).eval_t(0.0_f64).is_err());
        assert_eq!(Expr::t().pow(3.0).eval_t(-2.0_f64).unwrap(), -8.0);
    }

    #[test]
    fn substitution_and_free_vars() {
        let f = Expr::var(Var::U).pow(2.0);
        let g = f.substitute(Var::U, &(Expr::var(Var::Y) / Expr::var(Var::X)));
        let vars: Vec<_> = g.free_vars().into_iter().collect();
        assert_eq!(vars, vec![Var::X, Var::Y]);
        let env = Env::new().with(Var::X, 2.0_f64).with(Var::Y, 3.0);
        assert_eq!(g.eval(&env).unwrap(), 2.25);
    }

    #[test]
    fn f32_evaluation() {
        let e = Expr::t().sin();
        let v: f32 = e.eval_t(std::f32::consts::FRAC_PI_2).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }
}
