//! Explicit Runge–Kutta integration: the Dormand–Prince 5(4) pair with step
//! rejection and a quartic continuous extension, plus fixed-step RK4 for
//! cross-checks.

use thiserror::Error;

use super::{NumericError, Trajectory};
use crate::exprfn::EvalError;
use crate::Real;

/// Failure reported by a right-hand side.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct RhsError(pub String);

impl From<EvalError> for RhsError {
    fn from(e: EvalError) -> Self {
        RhsError(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub h_max: T,
    pub max_steps: usize,
    /// Any state component above this magnitude halts the run with a blow-up
    /// event.
    pub blow_up: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            rtol: T::lit(1e-9),
            atol: T::lit(1e-12),
            h_init: T::lit(1e-3),
            h_max: T::one(),
            max_steps: 1_000_000,
            blow_up: T::lit(1e8),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(rtol: T, atol: T) -> Self {
        IntegratorConfig {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        let bad = |msg: &str| Err(NumericError::InvalidConfig(msg.to_string()));
        if !(self.rtol > T::zero()) || !(self.atol > T::zero()) {
            return bad("tolerances must be positive");
        }
        if !(self.h_init > T::zero()) || !(self.h_init <= self.h_max) {
            return bad("need 0 < h_init <= h_max");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        if !(self.blow_up > T::zero()) {
            return bad("blow-up threshold must be positive");
        }
        Ok(())
    }
}

struct Tableau<T> {
    c: [T; 6],
    a: [[T; 6]; 6],
    b: [T; 6],
    e: [T; 7],
    d: [T; 7],
}

impl<T: Real> Tableau<T> {
    fn dopri5() -> Self {
        let l = T::lit;
        let z = T::zero();
        Tableau {
            c: [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), T::one()],
            a: [
                [z; 6],
                [l(0.2), z, z, z, z, z],
                [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
                [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
                [
                    l(19372.0 / 6561.0),
                    l(-25360.0 / 2187.0),
                    l(64448.0 / 6561.0),
                    l(-212.0 / 729.0),
                    z,
                    z,
                ],
                [
                    l(9017.0 / 3168.0),
                    l(-355.0 / 33.0),
                    l(46732.0 / 5247.0),
                    l(49.0 / 176.0),
                    l(-5103.0 / 18656.0),
                    z,
                ],
            ],
            b: [
                l(35.0 / 384.0),
                z,
                l(500.0 / 1113.0),
                l(125.0 / 192.0),
                l(-2187.0 / 6784.0),
                l(11.0 / 84.0),
            ],
            e: [
                l(71.0 / 57600.0),
                z,
                l(-71.0 / 16695.0),
                l(71.0 / 1920.0),
                l(-17253.0 / 339200.0),
                l(22.0 / 525.0),
                l(-1.0 / 40.0),
            ],
            d: [
                l(-12715105075.0 / 11282082432.0),
                z,
                l(87487479700.0 / 32700410799.0),
                l(-10690763975.0 / 1880347072.0),
                l(701980252875.0 / 199316789632.0),
                l(-1453857185.0 / 822651844.0),
                l(69997945.0 / 29380423.0),
            ],
        }
    }
}

/// Dormand–Prince 5(4) stepper with dense output over the last accepted step.
pub struct Dopri5<T, F> {
    rhs: F,
    cfg: IntegratorConfig<T>,
    tab: Tableau<T>,
    t: T,
    y: Vec<T>,
    f: Vec<T>,
    h: T,
    t_prev: T,
    y_prev: Vec<T>,
    h_last: T,
    rcont: [Vec<T>; 5],
    k: [Vec<T>; 7],
    scratch: Vec<T>,
    y_new: Vec<T>,
    steps: usize,
}

impl<T, F> Dopri5<T, F>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), RhsError>,
{
    pub fn new(mut rhs: F, t0: T, y0: &[T], cfg: IntegratorConfig<T>) -> Result<Self, NumericError> {
        cfg.validate()?;
        let n = y0.len();
        let mut f = vec![T::zero(); n];
        rhs(t0, y0, &mut f).map_err(|e| NumericError::Rhs {
            t: t0.as_f64(),
            message: e.0,
        })?;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::Rhs {
                t: t0.as_f64(),
                message: "non-finite derivative at the initial point".into(),
            });
        }
        let zeros = || vec![T::zero(); n];
        Ok(Dopri5 {
            rhs,
            tab: Tableau::dopri5(),
            t: t0,
            y: y0.to_vec(),
            f,
            h: cfg.h_init,
            t_prev: t0,
            y_prev: y0.to_vec(),
            h_last: T::zero(),
            rcont: [zeros(), zeros(), zeros(), zeros(), zeros()],
            k: [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()],
            scratch: zeros(),
            y_new: zeros(),
            steps: 0,
            cfg,
        })
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn t_prev(&self) -> T {
        self.t_prev
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Takes one accepted step forward without passing `t_limit`.
    pub fn step(&mut self, t_limit: T) -> Result<(), NumericError> {
        let eps = T::epsilon();
        let mut rejected = false;
        loop {
            if self.steps >= self.cfg.max_steps {
                return Err(NumericError::StepBudget { t: self.t.as_f64() });
            }
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.cfg.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let h_floor = T::lit(16.0) * eps * self.t.abs().max(T::one());
            if h < h_floor && !last {
                return Err(NumericError::StepUnderflow { t: self.t.as_f64() });
            }
            self.steps += 1;

            match self.attempt(h) {
                Ok(err) if err <= T::one() => {
                    let t_new = if last { t_limit } else { self.t + h };
                    self.accept(h, t_new);
                    let mut fac = if err == T::zero() {
                        T::lit(5.0)
                    } else {
                        T::lit(0.9) * err.powf(T::lit(-0.2))
                    };
                    fac = fac.min(T::lit(5.0)).max(T::lit(0.2));
                    if rejected {
                        fac = fac.min(T::one());
                    }
                    if !last || self.h > h {
                        self.h = h * fac;
                    }
                    return Ok(());
                }
                Ok(err) => {
                    let fac = if err.is_finite() {
                        (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2))
                    } else {
                        T::lit(0.2)
                    };
                    self.h = h * fac;
                    rejected = true;
                }
                Err(e) => {
                    // Trial stages may overshoot into a singular region.
                    self.h = h * T::lit(0.25);
                    rejected = true;
                    if self.h < h_floor {
                        return Err(NumericError::Rhs {
                            t: self.t.as_f64(),
                            message: e.0,
                        });
                    }
                }
            }
        }
    }

    /// Computes the stages for step `h` and returns the scaled error norm.
    fn attempt(&mut self, h: T) -> Result<T, RhsError> {
        let n = self.y.len();
        let t = self.t;
        self.k[0].copy_from_slice(&self.f);
        for s in 1..6 {
            for i in 0..n {
                let mut acc = T::zero();
                for j in 0..s {
                    acc = acc + self.tab.a[s][j] * self.k[j][i];
                }
                self.scratch[i] = self.y[i] + h * acc;
            }
            let (_, tail) = self.k.split_at_mut(s);
            (self.rhs)(t + self.tab.c[s] * h, &self.scratch, &mut tail[0])?;
        }
        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..6 {
                acc = acc + self.tab.b[j] * self.k[j][i];
            }
            self.y_new[i] = self.y[i] + h * acc;
        }
        (self.rhs)(t + h, &self.y_new, &mut self.k[6])?;
        let mut err = T::zero();
        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..7 {
                acc = acc + self.tab.e[j] * self.k[j][i];
            }
            let scale = self.cfg.atol + self.cfg.rtol * self.y[i].abs().max(self.y_new[i].abs());
            let r = (h * acc).abs() / scale;
            if !r.is_finite() || !self.y_new[i].is_finite() {
                return Ok(T::infinity());
            }
            err = err.max(r);
        }
        Ok(err)
    }

    fn accept(&mut self, h: T, t_new: T) {
        let n = self.y.len();
        let d = &self.tab.d;
        for i in 0..n {
            let ydiff = self.y_new[i] - self.y[i];
            let bspl = h * self.k[0][i] - ydiff;
            self.rcont[0][i] = self.y[i];
            self.rcont[1][i] = ydiff;
            self.rcont[2][i] = bspl;
            self.rcont[3][i] = ydiff - h * self.k[6][i] - bspl;
            let mut acc = T::zero();
            for (dj, kj) in d.iter().zip(&self.k) {
                acc = acc + *dj * kj[i];
            }
            self.rcont[4][i] = h * acc;
        }
        std::mem::swap(&mut self.y_prev, &mut self.y);
        self.y.copy_from_slice(&self.y_new);
        self.f.copy_from_slice(&self.k[6]);
        self.t_prev = self.t;
        self.t = t_new;
        self.h_last = h;
    }

    /// Dense output on `[t_prev, t]`. Reproduces the stepper states exactly at
    /// both ends of the step.
    pub fn dense(&self, t: T, out: &mut [T]) {
        if t == self.t {
            out.copy_from_slice(&self.y);
            return;
        }
        if t == self.t_prev {
            out.copy_from_slice(&self.y_prev);
            return;
        }
        let theta = (t - self.t_prev) / self.h_last;
        let theta1 = T::one() - theta;
        for (i, o) in out.iter_mut().enumerate() {
            let r = |k: usize| self.rcont[k][i];
            *o = r(0) + theta * (r(1) + theta1 * (r(2) + theta * (r(3) + theta1 * r(4))));
        }
    }
}

/// Integrates `rhs` from `y0` over `t_span`, sampling at `sample_times`.
///
/// Halts with a blow-up event when a component exceeds `cfg.blow_up`; the
/// returned trajectory then stops at the last sample before the halt.
pub fn integrate_ode<T, F>(
    rhs: F,
    y0: &[T],
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>, NumericError>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), RhsError>,
{
    integrate_ode_guarded(rhs, y0, t_span, sample_times, cfg, |_, _| false)
}

/// Like [`integrate_ode`], additionally halting with a domain event as soon as
/// `guard` returns true for an accepted state.
pub fn integrate_ode_guarded<T, F, G>(
    rhs: F,
    y0: &[T],
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
    mut guard: G,
) -> Result<Trajectory<T>, NumericError>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), RhsError>,
    G: FnMut(T, &[T]) -> bool,
{
    let (t0, t1) = t_span;
    check_samples(t_span, sample_times)?;
    let mut traj = Trajectory::new(y0.len());
    let mut stepper = Dopri5::new(rhs, t0, y0, *cfg)?;
    let mut idx = 0;
    while idx < sample_times.len() && sample_times[idx] == t0 {
        traj.push(t0, y0);
        idx += 1;
    }
    let t_end = sample_times.last().copied().unwrap_or(t1);
    let mut buf = vec![T::zero(); y0.len()];
    while stepper.t() < t_end {
        stepper.step(t_end)?;
        while idx < sample_times.len() && sample_times[idx] <= stepper.t() {
            stepper.dense(sample_times[idx], &mut buf);
            traj.push(sample_times[idx], &buf);
            idx += 1;
        }
        let y = stepper.y();
        if y.iter().any(|v| !(v.abs() <= cfg.blow_up)) {
            traj.push_event(stepper.t(), super::EventKind::BlowUp);
            return Ok(traj);
        }
        if guard(stepper.t(), y) {
            traj.push_event(stepper.t(), super::EventKind::Domain);
            return Ok(traj);
        }
    }
    Ok(traj)
}

pub(crate) fn check_samples<T: Real>(t_span: (T, T), sample_times: &[T]) -> Result<(), NumericError> {
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(NumericError::InvalidConfig(format!(
            "empty or reversed time span [{t0}, {t1}]"
        )));
    }
    for w in sample_times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(NumericError::InvalidConfig(
                "sample times must be strictly increasing".into(),
            ));
        }
    }
    if let (Some(&a), Some(&b)) = (sample_times.first(), sample_times.last()) {
        if a < t0 || b > t1 {
            return Err(NumericError::InvalidConfig(format!(
                "sample times [{a}, {b}] leave the span [{t0}, {t1}]"
            )));
        }
    }
    Ok(())
}

/// Classical fixed-step RK4 from `t0` to `t1`; returns the final state.
pub fn rk4_fixed<T, F>(mut rhs: F, y0: &[T], t0: T, t1: T, steps: usize) -> Result<Vec<T>, NumericError>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), RhsError>,
{
    let n = y0.len();
    let steps = steps.max(1);
    let h = (t1 - t0) / T::lit(steps as f64);
    let half = T::lit(0.5);
    let sixth = T::lit(1.0 / 6.0);
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
    );
    let wrap = |t: T| {
        move |e: RhsError| NumericError::Rhs {
            t: t.as_f64(),
            message: e.0,
        }
    };
    for s in 0..steps {
        let t = t0 + h * T::lit(s as f64);
        rhs(t, &y, &mut k1).map_err(wrap(t))?;
        for i in 0..n {
            tmp[i] = y[i] + half * h * k1[i];
        }
        rhs(t + half * h, &tmp, &mut k2).map_err(wrap(t))?;
        for i in 0..n {
            tmp[i] = y[i] + half * h * k2[i];
        }
        rhs(t + half * h, &tmp, &mut k3).map_err(wrap(t))?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(t + h, &tmp, &mut k4).map_err(wrap(t))?;
        for i in 0..n {
            y[i] = y[i] + sixth * h * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::EventKind;

    fn growth(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsError> {
        dy[0] = y[0];
        Ok(())
    }

    fn spring(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsError> {
        dy[0] = y[1];
        dy[1] = -y[0];
        Ok(())
    }

    fn tangent(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), RhsError> {
        dy[0] = 1.0 + y[0] * y[0];
        Ok(())
    }

    #[test]
    fn exponential_growth() {
        let cfg = IntegratorConfig::default();
        let tr = integrate_ode(growth, &[1.0], (0.0, 1.0), &[0.0, 0.5, 1.0], &cfg).unwrap();
        assert_eq!(tr.len(), 3);
        assert!((tr.state(2)[0] - std::f64::consts::E).abs() < 1e-8);
        assert!((tr.state(1)[0] - 0.5_f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_half_period() {
        let cfg = IntegratorConfig::default();
        let pi = std::f64::consts::PI;
        let tr = integrate_ode(spring, &[1.0, 0.0], (0.0, pi), &[pi], &cfg).unwrap();
        let s = tr.state(0);
        assert!((s[0] + 1.0).abs() < 1e-8 && s[1].abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn separable_tangent() {
        let cfg = IntegratorConfig::default();
        let tr = integrate_ode(tangent, &[0.0], (0.0, 1.0), &[1.0], &cfg).unwrap();
        assert!((tr.state(0)[0] - 1.557_407_724_654_902).abs() < 1e-8);
    }

    #[test]
    fn blow_up_halts_with_event() {
        let sq = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0] * y[0];
            Ok(())
        };
        let grid = crate::linspace(0.0, 2.0, 21);
        let tr = integrate_ode(sq, &[1.0], (0.0, 2.0), &grid, &IntegratorConfig::default()).unwrap();
        let ev = tr.events();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::BlowUp);
        assert!((ev[0].t - 1.0).abs() < 1e-6);
        assert!(tr.times().last().unwrap() < &1.0);
    }

    #[test]
    fn dense_output_matches_endpoints_exactly() {
        let mut st = Dopri5::new(spring, 0.0, &[1.0, 0.0], IntegratorConfig::default()).unwrap();
        let mut buf = [0.0; 2];
        for _ in 0..20 {
            st.step(10.0).unwrap();
            st.dense(st.t(), &mut buf);
            assert_eq!(&buf, st.y());
        }
        st.dense(st.t_prev(), &mut buf);
        let mid = 0.5 * (st.t_prev() + st.t());
        st.dense(mid, &mut buf);
        assert!((buf[0] - mid.cos()).abs() < 1e-8);
    }

    #[test]
    fn halving_rtol_does_not_increase_error() {
        let mut prev = f64::INFINITY;
        for k in 0..6 {
            let rtol = 1e-5 / 2f64.powi(k);
            let cfg = IntegratorConfig::with_tolerances(rtol, 1e-14);
            let tr = integrate_ode(tangent, &[0.0], (0.0, 1.0), &[1.0], &cfg).unwrap();
            let err = (tr.state(0)[0] - 1f64.tan()).abs();
            assert!(err <= prev * 1.01, "rtol {rtol}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn step_budget_is_enforced() {
        let cfg = IntegratorConfig {
            max_steps: 5,
            ..IntegratorConfig::default()
        };
        let err = integrate_ode(spring, &[1.0, 0.0], (0.0, 100.0), &[100.0], &cfg).unwrap_err();
        assert!(matches!(err, NumericError::StepBudget { .. }));
    }

    #[test]
    fn rhs_failure_at_start_is_reported() {
        let bad = |_t: f64, _y: &[f64], _dy: &mut [f64]| Err(RhsError("nope".into()));
        let err = integrate_ode(bad, &[1.0], (0.0, 1.0), &[1.0], &IntegratorConfig::default()).unwrap_err();
        assert!(matches!(err, NumericError::Rhs { .. }));
    }

    #[test]
    fn invalid_configuration() {
        let cfg = IntegratorConfig {
            h_init: 2.0,
            h_max: 1.0,
            ..IntegratorConfig::default()
        };
        assert!(cfg.validate().is_err());
        let err = integrate_ode(growth, &[1.0], (0.0, 1.0), &[0.5, 0.2], &IntegratorConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn rk4_agrees_with_adaptive() {
        let y = rk4_fixed(tangent, &[0.0], 0.0, 1.0, 2000).unwrap();
        assert!((y[0] - 1f64.tan()).abs() < 1e-10);
    }

    #[test]
    fn single_precision() {
        let cfg = IntegratorConfig::<f32>::with_tolerances(1e-5, 1e-7);
        let f = |_t: f32, y: &[f32], dy: &mut [f32]| {
            dy[0] = y[0];
            Ok(())
        };
        let tr = integrate_ode(f, &[1.0f32], (0.0, 1.0), &[1.0], &cfg).unwrap();
        assert!((tr.state(0)[0] - std::f32::consts::E).abs() < 1e-4);
    }
}
