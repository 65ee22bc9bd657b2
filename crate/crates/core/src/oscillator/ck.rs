use super::{OscillatorSpec, PhaseState};
use crate::error::{Error, Result};
use crate::exprfn::Env;
use crate::numerics::{constancy, integrate_ode, IntegratorConfig};
use crate::riccati::{check_integrability, IntegrabilityReport};
use crate::sl2::{gauge_transform, GaugeCurve, Mat2, Sl2Coeffs};
use crate::{linspace, Real};

const GRID_POINTS: usize = 200;
const GRID_END: f64 = 10.0;

/// Caldirola–Kanai oscillator mapped to an autonomous linear system by the
/// scaling `x' = sqrt(G) x`, `p' = p / sqrt(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CkReduction {
    pub m0: f64,
    pub mu: f64,
    pub omega0: f64,
    pub report: IntegrabilityReport<f64>,
    pub gauge: GaugeCurve,
    pub transformed: Sl2Coeffs,
    /// Generator of the reduced system, read off `transformed`.
    pub matrix: Mat2<f64>,
    /// The competing candidate `[[mu, omega0], [-omega0, -mu]]`.
    pub alternate: Mat2<f64>,
}

pub fn reduce_ck_autonomous(m0: f64, mu: f64, omega0: f64) -> Result<CkReduction> {
    let spec = OscillatorSpec::caldirola_kanai(m0, mu, omega0)?;
    let coeffs = spec.to_sl2_coeffs();
    let grid = linspace(0.0, GRID_END, GRID_POINTS);
    let report = check_integrability(&coeffs, &grid, 1e-9)?;
    assert!(
        (report.k - mu / omega0).abs() <= 1e-9 * (1.0 + (mu / omega0).abs()),
        "Caldirola-Kanai must pass the criterion with K = mu/omega0"
    );
    let gauge = report.gauge();
    let raw = gauge_transform(&coeffs, &gauge);
    let transformed = Sl2Coeffs::new(raw.b(0).normalize(), raw.b(1).normalize(), raw.b(2).normalize())?;
    let mut means = [0.0; 3];
    for (i, mean) in means.iter_mut().enumerate() {
        let samples = grid
            .iter()
            .map(|&t| transformed.b(i).eval(&Env::at_t(t)))
            .collect::<std::result::Result<Vec<f64>, _>>()?;
        let r = constancy(&samples, 1e-9)?;
        if !r.is_constant {
            return Err(Error::Degenerate(format!(
                "transformed coefficient b{i} = {} is not constant",
                transformed.b(i)
            )));
        }
        *mean = r.mean;
    }
    let [b0, b1, b2] = means;
    Ok(CkReduction {
        m0,
        mu,
        omega0,
        matrix: Mat2::new(b1 / 2.0, b0, -b2, -b1 / 2.0),
        alternate: Mat2::new(mu, omega0, -omega0, -mu),
        report,
        gauge,
        transformed,
    })
}

impl CkReduction {
    /// `sqrt(G(t)) = sqrt(m0 omega0) e^{mu t / 2}`.
    pub fn sqrt_scaling<T: Real>(&self, t: T) -> T {
        T::lit(self.m0 * self.omega0).sqrt() * (T::lit(self.mu / 2.0) * t).exp()
    }

    pub fn solve<T: Real>(&self, s0: PhaseState<T>, t: T) -> PhaseState<T> {
        self.solve_with(&self.matrix, s0, t)
    }

    /// Maps `s0` forward, runs `exp(t a)` in the reduced variables and maps back.
    pub fn solve_with<T: Real>(&self, a: &Mat2<f64>, s0: PhaseState<T>, t: T) -> PhaseState<T> {
        let g0 = self.sqrt_scaling(T::zero());
        let (xr, pr) = a.cast::<T>().expm(t).apply(s0.x * g0, s0.p / g0);
        let g = self.sqrt_scaling(t);
        PhaseState::new(xr / g, pr * g)
    }
}

/// Outcome of comparing the two candidate reduced matrices against direct
/// integration of Hamilton's equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkAudit {
    /// Diagonal entry of the matrix derived through the gauge action.
    pub derived_diagonal: f64,
    pub derived_error: f64,
    pub alternate_diagonal: f64,
    pub alternate_error: f64,
}

impl CkAudit {
    /// The diagonal whose solution agrees with the direct integration.
    pub fn matching_diagonal(&self, tol: f64) -> Option<f64> {
        match (self.derived_error <= tol, self.alternate_error <= tol) {
            (true, false) => Some(self.derived_diagonal),
            (false, true) => Some(self.alternate_diagonal),
            (true, true) if self.derived_diagonal == self.alternate_diagonal => Some(self.derived_diagonal),
            _ => None,
        }
    }
}

/// Largest error relative to `max(1, |reference|)` of both candidate reduced
/// systems on `n` samples of `[0, t_end]`.
pub fn audit_ck_diagonal(
    red: &CkReduction,
    s0: PhaseState<f64>,
    t_end: f64,
    n: usize,
    cfg: &IntegratorConfig<f64>,
) -> Result<CkAudit> {
    let spec = OscillatorSpec::caldirola_kanai(red.m0, red.mu, red.omega0)?;
    let times = linspace(0.0, t_end, n);
    let traj = integrate_ode(spec.hamilton_rhs(), &s0.to_array(), (0.0, t_end), &times, cfg)?;
    if traj.len() != times.len() {
        return Err(Error::BlowUp { lo: 0.0, hi: t_end });
    }
    let error_of = |a: &Mat2<f64>| {
        let mut worst: f64 = 0.0;
        for (i, &t) in traj.times().iter().enumerate() {
            let s = red.solve_with(a, s0, t).to_array();
            for (got, want) in s.iter().zip(traj.state(i)) {
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            }
        }
        worst
    };
    Ok(CkAudit {
        derived_diagonal: red.matrix.a,
        derived_error: error_of(&red.matrix),
        alternate_diagonal: red.alternate.a,
        alternate_error: error_of(&red.alternate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undamped_is_a_rotation() {
        let r = reduce_ck_autonomous(2.0, 0.0, 1.5).unwrap();
        assert_eq!(r.matrix.a, 0.0);
        assert!((r.matrix.b - 1.5).abs() < 1e-14 && (r.matrix.c + 1.5).abs() < 1e-14);
        assert!((r.sqrt_scaling(0.7_f64) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn damped_reduction_is_constant() {
        let r = reduce_ck_autonomous(1.0, 0.2, 1.0).unwrap();
        assert!(r.transformed.is_constant(), "{:?}", r.transformed);
        let [b0, b1, b2]: [f64; 3] = r.transformed.eval(3.0).unwrap();
        assert!((b0 - 1.0).abs() < 1e-14 && (b1 - 0.2).abs() < 1e-14 && (b2 - 1.0).abs() < 1e-14);
        assert!((r.matrix.a - 0.1).abs() < 1e-14);
    }

    #[test]
    fn reduced_solution_matches_direct_integration() {
        let r = reduce_ck_autonomous(1.3, 0.2, 0.8).unwrap();
        let cfg = IntegratorConfig::with_tolerances(1e-11, 1e-13);
        let audit = audit_ck_diagonal(&r, PhaseState::new(1.0, -0.5), 10.0, 101, &cfg).unwrap();
        assert!(audit.derived_error < 1e-6, "{audit:?}");
        assert!(audit.alternate_error > 1e-2, "{audit:?}");
        let d = audit.matching_diagonal(1e-6).unwrap();
        assert!((d - 0.1).abs() < 1e-14);
    }
}
