//! Cheap bottom-up constant folding with a handful of identity rules.

use super::ast::int_exponent;
use super::Expr;

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

fn is(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Const(x) if *x == c)
}

impl Expr {
    /// Folds constant subtrees and drops additive/multiplicative identities.
    /// Folding never produces a non-finite constant; such subtrees are kept so
    /// that evaluation reports the domain error.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
                    if let Some(e) = folded(x + y) {
                        return e;
                    }
                }
                if is(&a, 0.0) {
                    b
                } else if is(&b, 0.0) {
                    a
                } else if let Expr::Neg(nb) = b {
                    Expr::Sub(Box::new(a), nb)
                } else {
                    a + b
                }
            }
            Expr::Sub(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
                    if let Some(e) = folded(x - y) {
                        return e;
                    }
                }
                if is(&b, 0.0) {
                    a
                } else if is(&a, 0.0) {
                    negate(b)
                } else if a == b {
                    Expr::zero()
                } else if let Expr::Neg(nb) = b {
                    Expr::Add(Box::new(a), nb)
                } else {
                    a - b
                }
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
                    if let Some(e) = folded(x * y) {
                        return e;
                    }
                }
                if is(&a, 0.0) || is(&b, 0.0) {
                    Expr::zero()
                } else if is(&a, 1.0) {
                    b
                } else if is(&b, 1.0) {
                    a
                } else if is(&a, -1.0) {
                    negate(b)
                } else if is(&b, -1.0) {
                    negate(a)
                } else {
                    a * b
                }
            }
            Expr::Div(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
                    if *y != 0.0 {
                        if let Some(e) = folded(x / y) {
                            return e;
                        }
                    }
                }
                if is(&b, 1.0) {
                    a
                } else if is(&a, 0.0) && !is(&b, 0.0) {
                    Expr::zero()
                } else {
                    a / b
                }
            }
            Expr::Neg(a) => negate(a.simplify()),
            Expr::Pow(a, e) => {
                let a = a.simplify();
                if *e == 1.0 {
                    return a;
                }
                if *e == 0.0 {
                    return Expr::one();
                }
                if let Expr::Const(x) = a {
                    let v = match int_exponent(*e) {
                        Some(n) if !(n < 0 && x == 0.0) => Some(x.powi(n)),
                        Some(_) => None,
                        None if x > 0.0 => Some(x.powf(*e)),
                        None => None,
                    };
                    if let Some(e) = v.and_then(folded) {
                        return e;
                    }
                }
                a.pow(*e)
            }
            Expr::Call(f, a) => {
                let a = a.simplify();
                if let Expr::Const(x) = a {
                    if let Some(e) = f.apply(x).and_then(folded) {
                        return e;
                    }
                }
                Expr::call(*f, a)
            }
        }
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Const(x) => Expr::Const(-x),
        Expr::Neg(inner) => *inner,
        other => -other,
    }
}

#[cfg(test)]
mod tests {
    use crate::exprfn::parse;
    use crate::Expr;

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    #[test]
    fn folds_constants() {
        assert_eq!(s("1+2*3"), Expr::Const(7.0));
        assert_eq!(s("sin(0)+exp(0)"), Expr::Const(1.0));
        assert_eq!(s("2^-1"), Expr::Const(0.5));
    }

    #[test]
    fn removes_identities() {
        assert_eq!(s("0*t + 1*t"), Expr::t());
        assert_eq!(s("(t - 0)/1"), Expr::t());
        assert_eq!(s("t^1"), Expr::t());
        assert_eq!(s("t^0"), Expr::one());
        assert_eq!(s("--t"), Expr::t());
        assert_eq!(s("t - t"), Expr::zero());
    }

    #[test]
    fn keeps_domain_errors() {
        assert_eq!(s("1/0"), parse("1/0").unwrap());
        assert_eq!(s("ln(0)"), parse("ln(0)").unwrap());
        assert!(s("sqrt(-1)").eval_t(0.0_f64).is_err());
    }
}
