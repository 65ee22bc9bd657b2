//! Canonical form for expressions: a sum of monomials with real coefficients,
//! where a monomial is a product of atoms raised to integer powers.
//!
//! Atoms are variables, function calls and non-integer powers (each with a
//! canonical argument), and reciprocals of multi-term sums. Products of sums
//! are distributed, products of exponentials merge into one exponential and
//! powers of a single exponential move into its argument.
//! Two expressions that are equal as Laurent polynomials in
//! those atoms normalize to the same tree, which is what the Lie bracket
//! identities need. This is not a general simplifier: `sin(t)^2 + cos(t)^2`
//! stays as it is.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::ast::int_exponent;
use super::{Expr, Func, Var};

/// Positive integer powers of sums up to this degree are expanded.
const MAX_EXPANSION: i32 = 8;

#[derive(Clone, Copy, Debug)]
struct Coef(f64);

impl PartialEq for Coef {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for Coef {}
impl PartialOrd for Coef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Coef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Var(Var),
    Call(Func, Sum),
    RealPow(Sum, Coef),
    Group(Sum),
}

type Mono = BTreeMap<Atom, i32>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Sum {
    terms: BTreeMap<Mono, Coef>,
}

impl Sum {
    fn constant(c: f64) -> Sum {
        let mut s = Sum::default();
        s.push(Mono::new(), c);
        s
    }

    fn atom(a: Atom) -> Sum {
        let mut m = Mono::new();
        m.insert(a, 1);
        let mut s = Sum::default();
        s.push(m, 1.0);
        s
    }

    fn push(&mut self, m: Mono, c: f64) {
        if c == 0.0 {
            return;
        }
        let (m, k) = fold_exponentials(m);
        let c = c * k;
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                o.get_mut().0 += c;
                if o.get().0 == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(Coef(c));
            }
        }
    }

    fn as_const(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_empty().then_some(c.0)
            }
            _ => None,
        }
    }

    fn single(&self) -> Option<(&Mono, f64)> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            Some((m, c.0))
        } else {
            None
        }
    }

    fn add(mut self, other: &Sum) -> Sum {
        for (m, c) in &other.terms {
            self.push(m.clone(), c.0);
        }
        self
    }

    fn scale(&self, k: f64) -> Sum {
        let mut out = Sum::default();
        for (m, c) in &self.terms {
            out.push(m.clone(), c.0 * k);
        }
        out
    }

    fn mul(&self, other: &Sum) -> Sum {
        let mut out = Sum::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.push(mono_mul(ma, mb), ca.0 * cb.0);
            }
        }
        out
    }

    fn powi(&self, n: i32) -> Sum {
        if n == 0 {
            return Sum::constant(1.0);
        }
        if let Some((m, c)) = self.single() {
            let mut mm = Mono::new();
            for (a, e) in m {
                mm.insert(a.clone(), e * n);
            }
            let mut s = Sum::default();
            s.push(mm, c.powi(n));
            return s;
        }
        if self.terms.is_empty() {
            return if n > 0 {
                Sum::default()
            } else {
                Sum::atom(Atom::Group(Sum::default())).powi_group(n)
            };
        }
        if (1..=MAX_EXPANSION).contains(&n) {
            let mut acc = self.clone();
            for _ in 1..n {
                acc = acc.mul(self);
            }
            return acc;
        }
        // c * s' with the leading coefficient of s' equal to one
        let lead = self.terms.values().next().unwrap().0;
        let monic = self.scale(1.0 / lead);
        Sum::atom(Atom::Group(monic)).powi_group(n).scale(lead.powi(n))
    }

    fn powi_group(&self, n: i32) -> Sum {
        let (m, c) = self.single().expect("group atom is a single term");
        let mut mm = Mono::new();
        for (a, e) in m {
            mm.insert(a.clone(), e * n);
        }
        let mut s = Sum::default();
        s.push(mm, c);
        s
    }

    fn from_expr(e: &Expr) -> Sum {
        match e {
            Expr::Const(c) => Sum::constant(*c),
            Expr::Var(v) => Sum::atom(Atom::Var(*v)),
            Expr::Add(a, b) => Sum::from_expr(a).add(&Sum::from_expr(b)),
            Expr::Sub(a, b) => Sum::from_expr(a).add(&Sum::from_expr(b).scale(-1.0)),
            Expr::Mul(a, b) => Sum::from_expr(a).mul(&Sum::from_expr(b)),
            Expr::Div(a, b) => Sum::from_expr(a).mul(&Sum::from_expr(b).powi(-1)),
            Expr::Neg(a) => Sum::from_expr(a).scale(-1.0),
            Expr::Pow(a, p) => {
                let base = Sum::from_expr(a);
                if let Some(n) = int_exponent(*p) {
                    return base.powi(n);
                }
                if let Some(c) = base.as_const() {
                    if c > 0.0 {
                        return Sum::constant(c.powf(*p));
                    }
                }
                if let Some(s) = exp_power(&base, *p) {
                    return s;
                }
                Sum::atom(Atom::RealPow(base, Coef(*p)))
            }
            Expr::Call(f, a) => {
                let arg = Sum::from_expr(a);
                if let Some(c) = arg.as_const() {
                    if let Some(v) = f.apply(c).filter(|v| v.is_finite()) {
                        return Sum::constant(v);
                    }
                }
                if *f == Func::Sqrt {
                    if let Some(s) = exp_power(&arg, 0.5) {
                        return s;
                    }
                }
                Sum::atom(Atom::Call(*f, arg))
            }
        }
    }

    fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (m, c) in &self.terms {
            let c = c.0;
            let magnitude = if acc.is_some() { c.abs() } else { c };
            let term = term_expr(m, magnitude);
            acc = Some(match acc {
                None => term,
                Some(prev) if c < 0.0 => prev - term,
                Some(prev) => prev + term,
            });
        }
        acc.unwrap_or(Expr::Const(0.0))
    }
}

/// Merges every `exp` factor of a monomial into a single `exp` of the summed
/// argument; a constant argument becomes a coefficient.
fn fold_exponentials(m: Mono) -> (Mono, f64) {
    let is_exp = |a: &Atom| matches!(a, Atom::Call(Func::Exp, _));
    let mut exps = m.iter().filter(|(a, _)| is_exp(a));
    match (exps.next(), exps.next()) {
        (None, _) => return (m, 1.0),
        (Some((_, 1)), None) => return (m, 1.0),
        _ => {}
    }
    let mut arg = Sum::default();
    let mut out = Mono::new();
    for (a, e) in m {
        match a {
            Atom::Call(Func::Exp, s) => arg = arg.add(&s.scale(e as f64)),
            other => {
                out.insert(other, e);
            }
        }
    }
    if let Some(c) = arg.as_const() {
        let k = c.exp();
        if k.is_finite() && k != 0.0 {
            return (out, k);
        }
    }
    out.insert(Atom::Call(Func::Exp, arg), 1);
    (out, 1.0)
}

/// `(c e^s)^p = c^p e^{p s}` for a positive coefficient `c`.
fn exp_power(base: &Sum, p: f64) -> Option<Sum> {
    let (m, c) = base.single()?;
    let mut atoms = m.iter();
    match (atoms.next(), atoms.next()) {
        (Some((Atom::Call(Func::Exp, arg), 1)), None) if c > 0.0 => {
            let mut out = Sum::default();
            out.push(Mono::from([(Atom::Call(Func::Exp, arg.scale(p)), 1)]), c.powf(p));
            Some(out)
        }
        _ => None,
    }
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = a.clone();
    for (atom, e) in b {
        let slot = out.entry(atom.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            out.remove(atom);
        }
    }
    out
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Var(v) => Expr::Var(*v),
        Atom::Call(f, s) => Expr::call(*f, s.to_expr()),
        Atom::RealPow(s, p) => s.to_expr().pow(p.0),
        Atom::Group(s) => s.to_expr(),
    }
}

fn term_expr(m: &Mono, c: f64) -> Expr {
    let mut prod: Option<Expr> = None;
    for (a, e) in m {
        let base = atom_expr(a);
        let factor = if *e == 1 { base } else { base.pow(*e as f64) };
        prod = Some(match prod {
            None => factor,
            Some(p) => p * factor,
        });
    }
    match prod {
        None => Expr::Const(c),
        Some(p) if c == 1.0 => p,
        Some(p) if c == -1.0 => -p,
        Some(p) => Expr::Const(c) * p,
    }
}

impl Expr {
    /// Canonical form; see the module documentation.
    pub fn normalize(&self) -> Expr {
        Sum::from_expr(self).to_expr()
    }

    /// True when both expressions share a canonical form.
    pub fn equivalent(&self, other: &Expr) -> bool {
        Sum::from_expr(self) == Sum::from_expr(other)
    }

    /// True when the expression normalizes to the constant zero.
    pub fn is_identically_zero(&self) -> bool {
        Sum::from_expr(self).terms.is_empty()
    }
}
