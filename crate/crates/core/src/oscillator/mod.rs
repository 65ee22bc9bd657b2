//! Time-dependent harmonic oscillators `H = p^2/(2 m(t)) + m(t) w^2(t) x^2 / 2`
//! as Lie systems on SL(2,R), with the Caldirola–Kanai reduction, the two
//! solvable frequency families and the linear superposition rules.

mod ck;
mod families;
mod superpose;

use crate::error::{Error, Result};
use crate::exprfn::{Expr, Var};
use crate::numerics::RhsError;
use crate::sl2::Sl2Coeffs;
use crate::Real;

pub use ck::{audit_ck_diagonal, reduce_ck_autonomous, CkAudit, CkReduction};
pub use families::{quartic_reduction_solve, solvable_frequency_family, QuarticReduction};
pub use superpose::{
    linear_superposition, partial_superposition, partial_superposition_with, solve_wronskian_system,
    wronskian_invariants, CubicHermite,
};

/// Position and momentum (or velocity, when `m = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState<T> {
    pub x: T,
    pub p: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(x: T, p: T) -> Self {
        PhaseState { x, p }
    }

    pub fn to_array(self) -> [T; 2] {
        [self.x, self.p]
    }
}

/// Where an [`OscillatorSpec`] came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Generic,
    CaldirolaKanai {
        m0: f64,
        mu: f64,
        omega0: f64,
    },
    /// `m = 1`, `w^2 = F(t) omega0^2`.
    TdFrequency {
        f: Expr,
        omega0: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSpec {
    pub m: Expr,
    pub omega2: Expr,
    pub preset: Preset,
}

fn time_only(e: &Expr, what: &str) -> Result<()> {
    match e.free_vars().into_iter().find(|v| *v != Var::T) {
        Some(v) => Err(Error::Precondition(format!(
            "{what} may only depend on t, found {}",
            v.name()
        ))),
        None => Ok(()),
    }
}

impl OscillatorSpec {
    pub fn new(m: Expr, omega2: Expr) -> Result<Self> {
        time_only(&m, "mass")?;
        time_only(&omega2, "omega2")?;
        if m.as_const().is_some_and(|c| !(c > 0.0)) {
            return Err(Error::Precondition(format!("mass must be positive, got {m}")));
        }
        Ok(OscillatorSpec {
            m,
            omega2,
            preset: Preset::Generic,
        })
    }

    /// `m(t) = m0 e^{mu t}` with constant frequency `omega0`.
    pub fn caldirola_kanai(m0: f64, mu: f64, omega0: f64) -> Result<Self> {
        if !(m0 > 0.0) || !(omega0 > 0.0) || !mu.is_finite() {
            return Err(Error::Precondition(format!(
                "Caldirola-Kanai needs m0 > 0 and omega0 > 0, got m0={m0}, omega0={omega0}, mu={mu}"
            )));
        }
        let m = Expr::num(m0) * (Expr::num(mu) * Expr::t()).exp();
        Ok(OscillatorSpec {
            m: m.normalize(),
            omega2: Expr::num(omega0 * omega0),
            preset: Preset::CaldirolaKanai { m0, mu, omega0 },
        })
    }

    pub fn td_frequency(f: Expr, omega0: f64) -> Result<Self> {
        time_only(&f, "F")?;
        Ok(OscillatorSpec {
            m: Expr::one(),
            omega2: (f.clone() * Expr::num(omega0 * omega0)).normalize(),
            preset: Preset::TdFrequency { f, omega0 },
        })
    }

    /// Checks `m > 0` on the given points.
    pub fn check_mass<T: Real>(&self, grid: &[T]) -> Result<()> {
        for &t in grid {
            let m: T = self.m.eval_t(t)?;
            if !(m > T::zero()) {
                return Err(Error::Precondition(format!("mass {m} is not positive at t = {t}")));
            }
        }
        Ok(())
    }

    /// `(1/m, 0, m w^2)`.
    pub fn to_sl2_coeffs(&self) -> Sl2Coeffs {
        let b0 = self.m.clone().recip().normalize();
        let b2 = (self.m.clone() * self.omega2.clone()).normalize();
        Sl2Coeffs::new(b0, Expr::zero(), b2).expect("validated on construction")
    }

    /// Hamilton's equations `x' = p/m`, `p' = -m w^2 x` on `(x, p)`.
    pub fn hamilton_rhs<T: Real>(&self) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> {
        let c = self.to_sl2_coeffs();
        move |t, y, dy| {
            let [b0, _, b2] = c.eval(t)?;
            dy[0] = b0 * y[1];
            dy[1] = -b2 * y[0];
            Ok(())
        }
    }
}

/// The linear action of the coefficients on `(x, p)`:
/// `x' = b1 x/2 + b0 p`, `p' = -b2 x - b1 p/2`.
pub fn linear_rhs<T: Real>(c: &Sl2Coeffs) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
    move |t, y, dy| {
        let [b0, b1, b2] = c.eval(t)?;
        let h = b1 / T::lit(2.0);
        dy[0] = h * y[0] + b0 * y[1];
        dy[1] = -b2 * y[0] - h * y[1];
        Ok(())
    }
}
