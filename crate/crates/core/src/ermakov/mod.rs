//! The Milne–Pinney equation `x'' = -w^2(t) x + k/x^3`, Ermakov systems
//! coupling it to harmonic oscillators, their first integrals and the
//! superposition rule expressing Pinney solutions through two oscillator
//! solutions.

mod invariants;
mod superpose;

use crate::error::{Error, Result};
use crate::exprfn::{Env, Expr, Var};
use crate::numerics::{integrate_ode_guarded, IntegratorConfig, RhsError, Trajectory};
use crate::Real;

pub use invariants::{ermakov_invariant, generalized_invariant, triple_invariants, TripleInvariants};
pub use superpose::{pinney_superposition, PinneySuperposition};

/// Integration of any system with a `1/x^3` term stops with a domain event
/// once that coordinate drops below this magnitude or changes sign.
pub const ZERO_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PinneySpec {
    pub k: f64,
    pub omega2: Expr,
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

fn u_only(e: &Expr, what: &str) -> Result<()> {
    match e.free_vars().into_iter().find(|v| *v != Var::U) {
        Some(v) => Err(Error::Precondition(format!(
            "{what} may only depend on u, found {}",
            v.name()
        ))),
        None => Ok(()),
    }
}

fn inv_cube<T: Real>(x: T, name: &str) -> Result<T, RhsError> {
    if x == T::zero() {
        return Err(RhsError(format!("{name} = 0 is outside the domain")));
    }
    Ok((x * x * x).recip())
}

impl PinneySpec {
    pub fn new(k: f64, omega2: Expr) -> Result<Self> {
        time_only(&omega2, "omega2")?;
        Ok(PinneySpec { k, omega2 })
    }

    /// `(x, v) -> (v, -w^2 x + k/x^3)`.
    pub fn rhs<T: Real>(&self) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
        let k = T::lit(self.k);
        move |t, s, ds| {
            let w2: T = self.omega2.eval_t(t)?;
            ds[0] = s[1];
            ds[1] = -w2 * s[0] + k * inv_cube(s[0], "x")?;
            Ok(())
        }
    }

    /// The oscillator `x` and the Pinney variable `y` on `(x, vx, y, vy)`.
    pub fn ermakov_rhs<T: Real>(&self) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
        let k = T::lit(self.k);
        move |t, s, ds| {
            let w2: T = self.omega2.eval_t(t)?;
            ds[0] = s[1];
            ds[1] = -w2 * s[0];
            ds[2] = s[3];
            ds[3] = -w2 * s[2] + k * inv_cube(s[2], "y")?;
            Ok(())
        }
    }

    /// The Pinney variable `x` with oscillators `y`, `z` on
    /// `(x, vx, y, vy, z, vz)`.
    pub fn triple_rhs<T: Real>(&self) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
        let k = T::lit(self.k);
        move |t, s, ds| {
            let w2: T = self.omega2.eval_t(t)?;
            ds[0] = s[1];
            ds[1] = -w2 * s[0] + k * inv_cube(s[0], "x")?;
            ds[2] = s[3];
            ds[3] = -w2 * s[2];
            ds[4] = s[5];
            ds[5] = -w2 * s[4];
            Ok(())
        }
    }
}

pub fn pinney_rhs<T: Real>(s: &PinneySpec) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
    s.rhs()
}

/// `x'' = f(y/x)/x^3 - w^2 x`, `y'' = g(y/x)/y^3 - w^2 y` with `f`, `g`
/// written in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedErmakovSpec {
    pub f: Expr,
    pub g: Expr,
    pub omega2: Expr,
    /// Lower limit `u*` of the integral in the invariant.
    pub base: f64,
}

impl GeneralizedErmakovSpec {
    pub fn new(f: Expr, g: Expr, omega2: Expr) -> Result<Self> {
        u_only(&f, "f")?;
        u_only(&g, "g")?;
        time_only(&omega2, "omega2")?;
        Ok(GeneralizedErmakovSpec {
            f,
            g,
            omega2,
            base: 1.0,
        })
    }

    pub fn with_base(mut self, base: f64) -> Self {
        self.base = base;
        self
    }

    /// On `(x, vx, y, vy)`.
    pub fn rhs<T: Real>(&self) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
        move |t, s, ds| {
            let w2: T = self.omega2.eval_t(t)?;
            let (ix, iy) = (inv_cube(s[0], "x")?, inv_cube(s[2], "y")?);
            let env = Env::new().with(Var::U, s[2] / s[0]);
            ds[0] = s[1];
            ds[1] = -w2 * s[0] + self.f.eval(&env)? * ix;
            ds[2] = s[3];
            ds[3] = -w2 * s[2] + self.g.eval(&env)? * iy;
            Ok(())
        }
    }
}

/// `(x, vx, y, vy)`; `z`, `vz` are used by the three-body system only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmakovState<T> {
    pub x: T,
    pub vx: T,
    pub y: T,
    pub vy: T,
    pub z: T,
    pub vz: T,
}

impl<T: Real> ErmakovState<T> {
    pub fn planar(x: T, vx: T, y: T, vy: T) -> Self {
        ErmakovState {
            x,
            vx,
            y,
            vy,
            z: T::zero(),
            vz: T::zero(),
        }
    }

    /// Reads `(x, vx, y, vy)` or `(x, vx, y, vy, z, vz)`.
    pub fn from_slice(s: &[T]) -> Result<Self> {
        match *s {
            [x, vx, y, vy] => Ok(Self::planar(x, vx, y, vy)),
            [x, vx, y, vy, z, vz] => Ok(ErmakovState { x, vx, y, vy, z, vz }),
            _ => Err(Error::Precondition(format!(
                "expected 4 or 6 components, got {}",
                s.len()
            ))),
        }
    }

    /// `x vy - y vx`.
    pub fn xi(&self) -> T {
        self.x * self.vy - self.y * self.vx
    }
}

fn guarded<T, F>(
    rhs: F,
    y0: &[T],
    watch: &[usize],
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), RhsError>,
{
    let eps = T::lit(ZERO_GUARD);
    if let Some(&i) = watch.iter().find(|&&i| !(y0[i].abs() >= eps)) {
        return Err(Error::Precondition(format!(
            "initial coordinate {i} is within {ZERO_GUARD} of zero"
        )));
    }
    // steps can jump over the zero, so a sign change also trips the guard
    let mut signs: Vec<T> = watch.iter().map(|&i| y0[i].signum()).collect();
    let guard = move |_: T, y: &[T]| {
        watch.iter().zip(signs.iter_mut()).any(|(&i, s)| {
            let hit = !(y[i].abs() >= eps) || y[i].signum() != *s;
            *s = y[i].signum();
            hit
        })
    };
    Ok(integrate_ode_guarded(rhs, y0, t_span, sample_times, cfg, guard)?)
}

/// Integrates the Pinney equation from `(x0, v0)`.
pub fn integrate_pinney<T: Real>(
    s: &PinneySpec,
    x0: [T; 2],
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    guarded(s.rhs(), &x0, &[0], t_span, sample_times, cfg)
}

pub fn integrate_ermakov<T: Real>(
    s: &PinneySpec,
    st: ErmakovState<T>,
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let y0 = [st.x, st.vx, st.y, st.vy];
    guarded(s.ermakov_rhs(), &y0, &[2], t_span, sample_times, cfg)
}

pub fn integrate_generalized<T: Real>(
    s: &GeneralizedErmakovSpec,
    st: ErmakovState<T>,
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let y0 = [st.x, st.vx, st.y, st.vy];
    guarded(s.rhs(), &y0, &[0, 2], t_span, sample_times, cfg)
}

pub fn integrate_triple<T: Real>(
    s: &PinneySpec,
    st: ErmakovState<T>,
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let y0 = [st.x, st.vx, st.y, st.vy, st.z, st.vz];
    guarded(s.triple_rhs(), &y0, &[0], t_span, sample_times, cfg)
}
