use super::{OscillatorSpec, PhaseState};
use crate::error::{Error, Result};
use crate::exprfn::Expr;
use crate::numerics::quad;
use crate::Real;

/// The oscillator with `F(t) = 1/(-K omega0 t + K')^2`, which passes the
/// integrability criterion with constant `K` (sign-flipped where the base is
/// negative).
pub fn solvable_frequency_family(k: f64, k_prime: f64, omega0: f64, t_span: (f64, f64)) -> Result<OscillatorSpec> {
    let base = |t: f64| -k * omega0 * t + k_prime;
    let (a, b) = (base(t_span.0), base(t_span.1));
    if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return Err(Error::Precondition(format!(
            "F has a pole at t = {} inside [{}, {}]",
            k_prime / (k * omega0),
            t_span.0,
            t_span.1
        )));
    }
    let base = Expr::num(-k * omega0) * Expr::t() + Expr::num(k_prime);
    OscillatorSpec::td_frequency(base.pow(-2.0).normalize(), omega0)
}

/// Oscillator with `F(t) = V(t)^-4`, `V = u1 t + u0`, solved in closed form
/// after `x' = x/V`, `p' = -u1 x + V p` and `tau = integral of V^-2 from 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticReduction<T> {
    pub u0: T,
    pub u1: T,
    pub omega0: T,
}

impl<T: Real> QuarticReduction<T> {
    pub fn new(u0: T, u1: T, omega0: T) -> Result<Self> {
        if u0 == T::zero() || !(omega0 > T::zero()) {
            return Err(Error::Precondition(format!(
                "need u0 != 0 and omega0 > 0, got u0={u0}, omega0={omega0}"
            )));
        }
        Ok(QuarticReduction { u0, u1, omega0 })
    }

    pub fn v(&self, t: T) -> T {
        self.u1 * t + self.u0
    }

    /// The oscillator `x' = p`, `p' = -omega0^2 V^-4 x`.
    pub fn spec(&self) -> OscillatorSpec {
        let v = Expr::num(self.u1.as_f64()) * Expr::t() + Expr::num(self.u0.as_f64());
        OscillatorSpec::td_frequency(v.pow(-4.0).normalize(), self.omega0.as_f64()).expect("time-only F")
    }

    fn check_pole(&self, t: T) -> Result<()> {
        let (a, b) = (self.v(T::zero()), self.v(t));
        if b == T::zero() || a.signum() != b.signum() {
            return Err(Error::Precondition(format!("V = u1 t + u0 vanishes between 0 and {t}")));
        }
        Ok(())
    }

    /// `tau(t)` by quadrature.
    pub fn tau(&self, t: T, tol: T) -> Result<T> {
        self.check_pole(t)?;
        if self.u1 == T::zero() {
            return Ok(t / (self.u0 * self.u0));
        }
        Ok(quad(|s| Ok(self.v(s).powi(-2)), T::zero(), t, tol)?)
    }

    /// `tau(t) = t / (u0 (u1 t + u0))`.
    pub fn tau_closed(&self, t: T) -> T {
        t / (self.u0 * self.v(t))
    }

    pub fn state(&self, s0: PhaseState<T>, t: T, tol: T) -> Result<PhaseState<T>> {
        let tau = self.tau(t, tol)?;
        let (v0, v) = (self.u0, self.v(t));
        let w = self.omega0;
        let (xr, pr) = (s0.x / v0, -self.u1 * s0.x + v0 * s0.p);
        let (sin, cos) = (w * tau).sin_cos();
        let x_red = cos * xr + sin / w * pr;
        let p_red = -w * sin * xr + cos * pr;
        let x = v * x_red;
        Ok(PhaseState::new(x, (p_red + self.u1 * x) / v))
    }
}

/// Position at `t` from `(x0, p0)` at `t = 0`.
pub fn quartic_reduction_solve<T: Real>(q: &QuarticReduction<T>, x0: T, p0: T, t: T, tol: T) -> Result<T> {
    Ok(q.state(PhaseState::new(x0, p0), t, tol)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linspace;
    use crate::numerics::{integrate_ode, IntegratorConfig};
    use crate::riccati::check_integrability;

    #[test]
    fn family_members() {
        let s = solvable_frequency_family(0.0, 1.0, 1.0, (0.0, 5.0)).unwrap();
        assert!(s.to_sl2_coeffs().is_constant());
        let s = solvable_frequency_family(-1.0, 1.0, 1.0, (0.0, 5.0)).unwrap();
        for &t in &[0.0_f64, 2.0, 5.0] {
            let f: f64 = s.omega2.eval_t(t).unwrap();
            assert!((f - (1.0 + t).powi(-2)).abs() < 1e-15);
        }
        assert!(solvable_frequency_family(1.0, 1.0, 1.0, (0.0, 5.0)).is_err());
    }

    #[test]
    fn family_round_trip() {
        let grid = linspace(0.0, 5.0, 200);
        for &(k, kp, w) in &[(-1.0, 1.0, 1.0), (0.3, 2.0, 0.5), (-2.5, 0.7, 3.0)] {
            let s = solvable_frequency_family(k, kp, w, (0.0, 5.0)).unwrap();
            let r = check_integrability(&s.to_sl2_coeffs(), &grid, 1e-9).unwrap();
            assert!((r.k - k).abs() < 1e-8, "{} vs {k}", r.k);
        }
    }

    #[test]
    fn quartic_limits() {
        let q = QuarticReduction::new(1.0, 0.0, 1.0).unwrap();
        for &t in &[0.0_f64, 0.3, 2.0] {
            assert_eq!(
                quartic_reduction_solve(&q, 0.4, -1.2, t, 1e-12).unwrap(),
                t.cos() * 0.4 - t.sin() * 1.2
            );
        }
        let q = QuarticReduction::new(1.5, -0.2, 2.0).unwrap();
        assert_eq!(quartic_reduction_solve(&q, 0.7, 3.0, 0.0, 1e-12).unwrap(), 0.7);
        assert!((q.tau(3.0_f64, 1e-13).unwrap() - q.tau_closed(3.0)).abs() < 1e-12);
        assert!(q.tau(10.0, 1e-12).is_err());
    }

    #[test]
    fn quartic_matches_numeric_oracle() {
        let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-14);
        for &(u0, u1, w, x0, p0) in &[
            (1.0, 1.0, 1.0, 1.0, 0.0),
            (2.0, 0.5, 1.3, -0.3, 0.8),
            (-1.0, -0.4, 0.7, 1.0, 1.0),
        ] {
            let q = QuarticReduction::new(u0, u1, w).unwrap();
            let times = linspace(0.0, 2.0, 21);
            let traj = integrate_ode(q.spec().hamilton_rhs(), &[x0, p0], (0.0, 2.0), &times, &cfg).unwrap();
            for (i, &t) in times.iter().enumerate() {
                let s: PhaseState<f64> = q.state(PhaseState::new(x0, p0), t, 1e-13).unwrap();
                let want = traj.state(i);
                assert!((s.x - want[0]).abs() < 1e-8 && (s.p - want[1]).abs() < 1e-8, "t={t}");
            }
        }
    }
}
