use super::{Expr, Func, Var};

impl Expr {
    /// Exact symbolic derivative with respect to `var`, constant folded.
    pub fn differentiate(&self, var: Var) -> Expr {
        self.derive(var).simplify()
    }

    fn derive(&self, var: Var) -> Expr {
        if !self.depends_on(var) {
            return Expr::zero();
        }
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => a.derive(var) + b.derive(var),
            Expr::Sub(a, b) => a.derive(var) - b.derive(var),
            Expr::Mul(a, b) => a.derive(var) * (**b).clone() + (**a).clone() * b.derive(var),
            Expr::Div(a, b) => {
                if !b.depends_on(var) {
                    a.derive(var) / (**b).clone()
                } else {
                    (a.derive(var) * (**b).clone() - (**a).clone() * b.derive(var)) / (**b).clone().pow(2.0)
                }
            }
            Expr::Neg(a) => -a.derive(var),
            Expr::Pow(a, e) => *e * (**a).clone().pow(e - 1.0) * a.derive(var),
            Expr::Call(f, a) => {
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => u.cos(),
                    Func::Cos => -u.sin(),
                    Func::Tan => 1.0 + u.tan().pow(2.0),
                    Func::Exp => u.exp(),
                    Func::Ln => u.recip(),
                    Func::Sqrt => 0.5 / u.sqrt(),
                };
                outer * a.derive(var)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::exprfn::parse;
    use crate::{Expr, Var};

    fn d(text: &str) -> Expr {
        parse(text).unwrap().differentiate(Var::T)
    }

    #[test]
    fn square_at_three() {
        assert_eq!(d("t^2").eval_t(3.0_f64).unwrap(), 6.0);
    }

    #[test]
    fn exponential() {
        let de = d("exp(0.2*t)");
        let expected = parse("0.2*exp(0.2*t)").unwrap();
        for &t in &[0.0_f64, 0.7, 3.0] {
            assert_eq!(de.eval_t(t).unwrap(), expected.eval_t(t).unwrap());
        }
        assert_eq!(de.normalize(), expected.normalize());
    }

    #[test]
    fn sine() {
        assert_eq!(d("sin(t)"), parse("cos(t)").unwrap());
    }

    #[test]
    fn constants_vanish() {
        assert_eq!(d("sin(x) + 3"), Expr::zero());
        assert_eq!(parse("x*t").unwrap().differentiate(Var::X), Expr::t());
    }

    #[test]
    fn quotient_and_roots() {
        let e = d("sqrt(t)/(1+t)");
        let t = 2.0_f64;
        let expected = 0.5 / t.sqrt() / (1.0 + t) - t.sqrt() / (1.0 + t).powi(2);
        assert!((e.eval_t(t).unwrap() - expected).abs() < 1e-15);
        let e = d("ln(t)*tan(t)");
        let expected = t.tan() / t + t.ln() / t.cos().powi(2);
        assert!((e.eval_t(t).unwrap() - expected).abs() < 1e-14);
    }
}
