//! Riccati equations `x' = b0(t) + b1(t) x + b2(t) x^2`: numerical solution
//! through poles, the cross-ratio superposition rule, reduction by a known
//! particular solution and the scaling criterion for integrability.

mod criterion;
mod reduce;
mod superpose;

use crate::error::{Error, Result};
use crate::numerics::{check_samples, Dopri5, EventKind, IntegratorConfig, RhsError, Trajectory};
use crate::sl2::{fundamental_solution, ExtReal, Sl2Coeffs};
use crate::Real;

pub use criterion::{
    check_integrability, solve_constant_riccati, solve_via_criterion, verify_report, IntegrabilityReport,
    SolvableTarget,
};
pub use reduce::{linear_inhomogeneous_solve, reduce_with_particular, solve_bernoulli_reduced};
pub use superpose::{cross_ratio, map_points, superpose_cross_ratio};

/// Magnitude at which the numerical solver swaps `x` for `w = 1/x` (and back).
pub const CHART_SWITCH: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiProblem<T> {
    pub coeffs: Sl2Coeffs,
    pub x0: ExtReal<T>,
    pub t0: T,
    pub t1: T,
}

impl<T: Real> RiccatiProblem<T> {
    pub fn new(coeffs: Sl2Coeffs, x0: impl Into<ExtReal<T>>, t0: T, t1: T) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::Precondition(format!("empty interval [{t0}, {t1}]")));
        }
        Ok(RiccatiProblem {
            coeffs,
            x0: x0.into(),
            t0,
            t1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// The affine coordinate `x`.
    Near,
    /// The coordinate `w = 1/x` around infinity.
    Far,
}

fn from_chart<T: Real>(chart: Chart, u: T) -> T {
    match chart {
        Chart::Near => u,
        Chart::Far if u == T::zero() => T::infinity(),
        Chart::Far => u.recip(),
    }
}

/// Integrates the Riccati equation on the projective line.
///
/// Whenever the active coordinate exceeds [`CHART_SWITCH`] in magnitude the
/// solver continues in the reciprocal coordinate (`w' = -b2 - b1 w - b0 w^2`
/// for `w = 1/x`), recording a chart-switch event. Passing through infinity
/// records a blow-up event at the located pole, and samples taken exactly there
/// hold `+inf`.
pub fn solve_numeric<T: Real>(
    p: &RiccatiProblem<T>,
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    check_samples((p.t0, p.t1), sample_times)?;
    cfg.validate()?;
    let switch = T::lit(CHART_SWITCH);
    let (mut chart, mut u) = match p.x0 {
        ExtReal::Finite(x) if x.abs() <= switch => (Chart::Near, x),
        ExtReal::Finite(x) => (Chart::Far, x.recip()),
        ExtReal::Infinity => (Chart::Far, T::zero()),
    };
    let mut traj = Trajectory::new(1);
    let mut idx = 0;
    let mut t = p.t0;
    if chart == Chart::Far && u == T::zero() {
        traj.push_event(t, EventKind::BlowUp);
    }
    while idx < sample_times.len() && sample_times[idx] == t {
        traj.push(t, &[from_chart(chart, u)]);
        idx += 1;
    }
    let t_end = sample_times.last().copied().unwrap_or(p.t1);
    let c = &p.coeffs;
    let mut steps = 0;
    while t < t_end {
        let rhs = move |t: T, y: &[T], dy: &mut [T]| -> Result<(), RhsError> {
            let [b0, b1, b2] = c.eval(t)?;
            let w = y[0];
            dy[0] = match chart {
                Chart::Near => b0 + w * (b1 + b2 * w),
                Chart::Far => -(b2 + w * (b1 + b0 * w)),
            };
            Ok(())
        };
        let mut local = *cfg;
        local.max_steps = cfg.max_steps.saturating_sub(steps).max(1);
        if chart == Chart::Far {
            // |w| is tiny right after a switch; keep its relative accuracy
            local.atol = cfg.atol / switch;
        }
        let mut st = Dopri5::new(rhs, t, &[u], local)?;
        let mut buf = [T::zero()];
        loop {
            let before = st.y()[0];
            st.step(t_end)?;
            let after = st.y()[0];
            while idx < sample_times.len() && sample_times[idx] <= st.t() {
                st.dense(sample_times[idx], &mut buf);
                traj.push(sample_times[idx], &[from_chart(chart, buf[0])]);
                idx += 1;
            }
            if chart == Chart::Far && before != T::zero() && (after == T::zero() || before.signum() != after.signum()) {
                traj.push_event(locate_zero(&st, before), EventKind::BlowUp);
            }
            if after.abs() > switch {
                chart = match chart {
                    Chart::Near => Chart::Far,
                    Chart::Far => Chart::Near,
                };
                u = after.recip();
                t = st.t();
                traj.push_event(t, EventKind::ChartSwitch);
                break;
            }
            if st.t() >= t_end {
                t = st.t();
                break;
            }
        }
        steps += st.steps();
    }
    Ok(traj)
}

/// Bisection for the sign change of the dense output over the last step.
fn locate_zero<T, F>(st: &Dopri5<T, F>, before: T) -> T
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), RhsError>,
{
    let (mut lo, mut hi) = (st.t_prev(), st.t());
    let mut buf = [T::zero()];
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if !(mid > lo && mid < hi) {
            break;
        }
        st.dense(mid, &mut buf);
        if buf[0] == T::zero() {
            return mid;
        }
        if buf[0].signum() == before.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Solution through the Möbius action of the fundamental solution on `x0`.
pub fn solve_numeric_mobius<T: Real>(
    p: &RiccatiProblem<T>,
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let curve = fundamental_solution(&p.coeffs, (p.t0, p.t1), sample_times, cfg)?;
    let mut traj = Trajectory::new(1);
    for (t, m) in curve.times.iter().zip(&curve.mats) {
        traj.push(*t, &[m.mobius(p.x0).to_real()]);
    }
    Ok(traj)
}
