use std::fmt;

use crate::error::{Error, Result};
use crate::exprfn::{Env, Expr, Var};

/// Vector field `sum_i comps[i] * d/d vars[i]` with symbolic components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVectorField {
    vars: Vec<Var>,
    comps: Vec<Expr>,
}

impl PolyVectorField {
    pub fn new(vars: Vec<Var>, comps: Vec<Expr>) -> Result<Self> {
        if vars.len() != comps.len() {
            return Err(Error::Precondition(format!(
                "{} variables but {} components",
                vars.len(),
                comps.len()
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Precondition(format!("variable `{}` listed twice", v.name())));
            }
        }
        Ok(PolyVectorField { vars, comps })
    }

    /// Field with the given nonzero components; the rest are zero.
    pub fn sparse(vars: &[Var], comps: &[(Var, Expr)]) -> Self {
        let mut out = vec![Expr::zero(); vars.len()];
        for (v, e) in comps {
            let i = vars.iter().position(|w| w == v).expect("component variable is listed");
            out[i] = e.clone();
        }
        PolyVectorField {
            vars: vars.to_vec(),
            comps: out,
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, v: Var) -> Option<&Expr> {
        self.vars.iter().position(|&w| w == v).map(|i| &self.comps[i])
    }

    fn check_shared(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::Precondition("vector fields use different variable lists".into()));
        }
        Ok(())
    }

    /// Directional derivative `(self . grad) e`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (v, c) in self.vars.iter().zip(&self.comps) {
            acc = acc + c.clone() * e.differentiate(*v);
        }
        acc.simplify()
    }

    /// Lie bracket `(V . grad) W - (W . grad) V`, componentwise.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_shared(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(v, w)| (self.apply(w) - other.apply(v)).simplify())
            .collect();
        Ok(PolyVectorField {
            vars: self.vars.clone(),
            comps,
        })
    }

    pub fn scale(&self, k: f64) -> Self {
        PolyVectorField {
            vars: self.vars.clone(),
            comps: self
                .comps
                .iter()
                .map(|c| (Expr::num(k) * c.clone()).simplify())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shared(other)?;
        Ok(PolyVectorField {
            vars: self.vars.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| (a.clone() + b.clone()).simplify())
                .collect(),
        })
    }

    /// Every component in canonical form, so that equal fields compare equal
    /// as trees.
    pub fn normalized(&self) -> Self {
        PolyVectorField {
            vars: self.vars.clone(),
            comps: self.comps.iter().map(Expr::normalize).collect(),
        }
    }

    /// Symbolic equality of fields.
    pub fn lie_eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.comps.iter().zip(&other.comps).all(|(a, b)| a.equivalent(b))
    }

    pub fn eval(&self, env: &Env<f64>) -> Result<Vec<f64>> {
        Ok(self.comps.iter().map(|c| c.eval(env)).collect::<Result<_, _>>()?)
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in self.vars.iter().zip(&self.comps) {
            if c.is_identically_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c} d/d{}", v.name())?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Structure constants `c[a][b][g]` with `[X_a, X_b] = sum_g c[a][b][g] X_g`.
///
/// The coefficients are fitted on sample points, snapped to multiples of
/// 1/1024 and then verified symbolically; an error means the basis does not
/// close with constant coefficients.
pub fn structure_constants(basis: &[PolyVectorField]) -> Result<Vec<Vec<Vec<f64>>>> {
    let r = basis.len();
    if r == 0 {
        return Ok(Vec::new());
    }
    for b in &basis[1..] {
        basis[0].check_shared(b)?;
    }
    let vars = basis[0].vars().to_vec();
    let envs: Vec<Env<f64>> = (0..24)
        .map(|i| {
            vars.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let phase = ((i * vars.len() + j) as f64 * 0.618_033_988_749_895).fract();
                    (v, 0.6 + 0.8 * phase)
                })
                .chain(std::iter::once((Var::T, 0.3)))
                .collect()
        })
        .collect();
    let sample = |f: &PolyVectorField| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for env in &envs {
            out.extend(f.eval(env)?);
        }
        Ok(out)
    };
    let columns: Vec<Vec<f64>> = basis.iter().map(sample).collect::<Result<_>>()?;
    let mut table = vec![vec![vec![0.0; r]; r]; r];
    for a in 0..r {
        for b in 0..r {
            let br = basis[a].bracket(&basis[b])?;
            let rhs = sample(&br)?;
            let coef = least_squares(&columns, &rhs)
                .ok_or_else(|| Error::Degenerate("basis fields are linearly dependent".into()))?;
            let coef: Vec<f64> = coef.iter().map(|c| (c * 1024.0).round() / 1024.0).collect();
            let mut combo = basis[0].scale(coef[0]);
            for g in 1..r {
                combo = combo.add(&basis[g].scale(coef[g]))?;
            }
            if !combo.lie_eq(&br) {
                return Err(Error::Degenerate(format!(
                    "bracket [{a}, {b}] is not a constant combination of the basis"
                )));
            }
            table[a][b] = coef;
        }
    }
    Ok(table)
}

fn least_squares(columns: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let r = columns.len();
    let mut m = vec![vec![0.0; r + 1]; r];
    for i in 0..r {
        for j in 0..r {
            m[i][j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
        m[i][r] = columns[i].iter().zip(rhs).map(|(a, b)| a * b).sum();
    }
    for col in 0..r {
        let piv = (col..r).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        let pivot = m[col].clone();
        for (row, line) in m.iter_mut().enumerate() {
            if row != col {
                let f = line[col] / pivot[col];
                for (v, p) in line.iter_mut().zip(&pivot).skip(col) {
                    *v -= f * p;
                }
            }
        }
    }
    Some((0..r).map(|i| m[i][r] / m[i][i]).collect())
}

fn v(var: Var) -> Expr {
    Expr::var(var)
}

/// `Y0 = d/dx`, `Y1 = x d/dx`, `Y2 = x^2 d/dx`: the Riccati generators.
pub fn riccati_generators() -> [PolyVectorField; 3] {
    let vars = [Var::X];
    [
        PolyVectorField::sparse(&vars, &[(Var::X, Expr::one())]),
        PolyVectorField::sparse(&vars, &[(Var::X, v(Var::X))]),
        PolyVectorField::sparse(&vars, &[(Var::X, v(Var::X).pow(2.0))]),
    ]
}

/// `X0 = p d/dx`, `X1 = (x d/dx - p d/dp)/2`, `X2 = -x d/dp` on phase space.
pub fn oscillator_generators() -> [PolyVectorField; 3] {
    let vars = [Var::X, Var::P];
    [
        PolyVectorField::sparse(&vars, &[(Var::X, v(Var::P))]),
        PolyVectorField::sparse(&vars, &[(Var::X, 0.5 * v(Var::X)), (Var::P, -0.5 * v(Var::P))]),
        PolyVectorField::sparse(&vars, &[(Var::P, -v(Var::X))]),
    ]
}

/// `L1 = x d/dv`, `L2 = v d/dx + k/x^3 d/dv`, `L3 = (x d/dx - v d/dv)/2`.
pub fn pinney_generators(k: f64) -> [PolyVectorField; 3] {
    let vars = [Var::X, Var::V];
    [
        PolyVectorField::sparse(&vars, &[(Var::V, v(Var::X))]),
        PolyVectorField::sparse(&vars, &[(Var::X, v(Var::V)), (Var::V, k * v(Var::X).pow(-3.0))]),
        PolyVectorField::sparse(&vars, &[(Var::X, 0.5 * v(Var::X)), (Var::V, -0.5 * v(Var::V))]),
    ]
}

const PLANE: [Var; 4] = [Var::X, Var::Y, Var::Vx, Var::Vy];
const SPACE: [Var; 6] = [Var::X, Var::Y, Var::Z, Var::Vx, Var::Vy, Var::Vz];

fn dilation(vars: &[Var]) -> PolyVectorField {
    let comps: Vec<(Var, Expr)> = vars
        .iter()
        .map(|&w| {
            let sign = if matches!(w, Var::Vx | Var::Vy | Var::Vz) {
                -0.5
            } else {
                0.5
            };
            (w, sign * v(w))
        })
        .collect();
    PolyVectorField::sparse(vars, &comps)
}

/// Generators of the oscillator/Pinney pair: `x'' = -w^2 x`,
/// `y'' = -w^2 y + k/y^3`.
pub fn ermakov_generators(k: f64) -> [PolyVectorField; 3] {
    [
        PolyVectorField::sparse(&PLANE, &[(Var::Vx, v(Var::X)), (Var::Vy, v(Var::Y))]),
        PolyVectorField::sparse(
            &PLANE,
            &[
                (Var::X, v(Var::Vx)),
                (Var::Y, v(Var::Vy)),
                (Var::Vy, k * v(Var::Y).pow(-3.0)),
            ],
        ),
        dilation(&PLANE),
    ]
}

/// `N1, N2, N3` for `x'' = f(y/x)/x^3 - w^2 x`, `y'' = g(y/x)/y^3 - w^2 y`,
/// with `f` and `g` written in the variable `u`.
pub fn generalized_ermakov_generators(f: &Expr, g: &Expr) -> [PolyVectorField; 3] {
    let ratio = v(Var::Y) / v(Var::X);
    let fx = f.substitute(Var::U, &ratio) * v(Var::X).pow(-3.0);
    let gy = g.substitute(Var::U, &ratio) * v(Var::Y).pow(-3.0);
    [
        PolyVectorField::sparse(&PLANE, &[(Var::Vx, v(Var::X)), (Var::Vy, v(Var::Y))]),
        PolyVectorField::sparse(
            &PLANE,
            &[(Var::X, v(Var::Vx)), (Var::Y, v(Var::Vy)), (Var::Vx, fx), (Var::Vy, gy)],
        ),
        dilation(&PLANE),
    ]
}

/// `N1, N2, N3` for a Pinney equation in `x` with constant `k` driven
/// together with two oscillators `y`, `z`.
pub fn pinney_triple_generators(k: f64) -> [PolyVectorField; 3] {
    [
        PolyVectorField::sparse(
            &SPACE,
            &[(Var::Vx, v(Var::X)), (Var::Vy, v(Var::Y)), (Var::Vz, v(Var::Z))],
        ),
        PolyVectorField::sparse(
            &SPACE,
            &[
                (Var::X, v(Var::Vx)),
                (Var::Y, v(Var::Vy)),
                (Var::Z, v(Var::Vz)),
                (Var::Vx, k * v(Var::X).pow(-3.0)),
            ],
        ),
        dilation(&SPACE),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::parse;

    fn br(a: &PolyVectorField, b: &PolyVectorField) -> PolyVectorField {
        a.bracket(b).unwrap().normalized()
    }

    #[test]
    fn riccati_table() {
        let [y0, y1, y2] = riccati_generators();
        assert_eq!(br(&y0, &y1), y0.normalized());
        assert_eq!(br(&y2, &y1), y2.scale(-1.0).normalized());
        assert_eq!(br(&y2, &y0), y1.scale(-2.0).normalized());
    }

    #[test]
    fn pinney_table() {
        let [l1, l2, l3] = pinney_generators(1.0);
        assert_eq!(br(&l1, &l2), l3.scale(2.0).normalized());
        assert_eq!(br(&l3, &l1), l1.normalized());
        assert_eq!(br(&l3, &l2), l2.scale(-1.0).normalized());
    }

    #[test]
    fn generalized_ermakov_with_nontrivial_functions() {
        let f = parse("sin(u) + u^2").unwrap();
        let g = parse("exp(u)/(1+u^2)").unwrap();
        let [n1, n2, n3] = generalized_ermakov_generators(&f, &g);
        assert!(n1.bracket(&n2).unwrap().lie_eq(&n3.scale(2.0)));
        assert!(n3.bracket(&n1).unwrap().lie_eq(&n1));
        assert!(n3.bracket(&n2).unwrap().lie_eq(&n2.scale(-1.0)));
    }

    #[test]
    fn structure_constants_of_oscillator_realization() {
        let c = structure_constants(&oscillator_generators()).unwrap();
        assert_eq!(c[0][1], vec![1.0, 0.0, 0.0]);
        assert_eq!(c[2][1], vec![0.0, 0.0, -1.0]);
        assert_eq!(c[2][0], vec![0.0, -2.0, 0.0]);
        assert_eq!(c[1][1], vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn non_closing_basis_is_rejected() {
        let vars = [Var::X];
        let basis = [
            PolyVectorField::sparse(&vars, &[(Var::X, Expr::one())]),
            PolyVectorField::sparse(&vars, &[(Var::X, v(Var::X).pow(3.0))]),
        ];
        assert!(structure_constants(&basis).is_err());
    }

    #[test]
    fn mismatched_variables() {
        let [y0, ..] = riccati_generators();
        let [x0, ..] = oscillator_generators();
        assert!(y0.bracket(&x0).is_err());
        assert!(PolyVectorField::new(vec![Var::X, Var::X], vec![Expr::one(), Expr::one()]).is_err());
    }

    #[test]
    fn display() {
        let [_, l2, _] = pinney_generators(2.0);
        assert_eq!(l2.to_string(), "v d/dx + (2 * (x ^ (-3))) d/dv");
    }
}
