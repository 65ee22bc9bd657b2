use crate::error::{Error, Result};
use crate::exprfn::Expr;
use crate::numerics::{quad, NumericError, Trajectory};
use crate::{linspace, Real};

const ZERO_SCAN: usize = 256;

fn same_grid<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<()> {
    if a.times() != b.times() || a.dim() != b.dim() {
        return Err(Error::Precondition("trajectories do not share a sample grid".into()));
    }
    Ok(())
}

/// `k1 a + k2 b`, sample by sample.
pub fn linear_superposition<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>, k1: T, k2: T) -> Result<Trajectory<T>> {
    same_grid(a, b)?;
    let mut out = Trajectory::new(a.dim());
    let mut buf = vec![T::zero(); a.dim()];
    for (i, &t) in a.times().iter().enumerate() {
        for (o, (x, y)) in buf.iter_mut().zip(a.state(i).iter().zip(b.state(i))) {
            *o = k1 * *x + k2 * *y;
        }
        out.push(t, &buf);
    }
    Ok(out)
}

/// The Wronskian `x1 v2 - x2 v1` at every sample of two `(x, v)` trajectories.
pub fn wronskian_invariants<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<Vec<T>> {
    same_grid(a, b)?;
    if a.dim() != 2 {
        return Err(Error::Precondition(format!(
            "expected (x, v) states, got dimension {}",
            a.dim()
        )));
    }
    Ok((0..a.len())
        .map(|i| {
            let (s1, s2) = (a.state(i), b.state(i));
            s1[0] * s2[1] - s2[0] * s1[1]
        })
        .collect())
}

/// Recovers `(x, v)` from the invariants `f1 = x v1 - x1 v` and
/// `f2 = x v2 - x2 v` of two known solutions `(x1, v1)`, `(x2, v2)`.
pub fn solve_wronskian_system<T: Real>(s1: [T; 2], s2: [T; 2], f1: T, f2: T) -> Result<[T; 2]> {
    let [x1, v1] = s1;
    let [x2, v2] = s2;
    let w = x1 * v2 - x2 * v1;
    if w == T::zero() {
        return Err(Error::Degenerate("the two solutions are linearly dependent".into()));
    }
    Ok([(f2 * x1 - f1 * x2) / w, (f2 * v1 - f1 * v2) / w])
}

/// Piecewise cubic Hermite interpolant through samples of a function and its
/// derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite<T> {
    times: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> CubicHermite<T> {
    pub fn new(times: Vec<T>, values: Vec<T>, slopes: Vec<T>) -> Result<Self> {
        if times.len() < 2 || values.len() != times.len() || slopes.len() != times.len() {
            return Err(Error::Precondition(
                "need at least two samples with values and slopes".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("sample times must be strictly increasing".into()));
        }
        Ok(CubicHermite { times, values, slopes })
    }

    /// Uses component 0 as the value and component 1 as its derivative.
    pub fn from_trajectory(tr: &Trajectory<T>) -> Result<Self> {
        if tr.dim() < 2 {
            return Err(Error::Precondition("need (x, v) states".into()));
        }
        Self::new(tr.times().to_vec(), tr.component(0), tr.component(1))
    }

    pub fn span(&self) -> (T, T) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Clamps to the first or last piece outside the sampled span.
    pub fn eval(&self, t: T) -> T {
        let i = match self
            .times
            .binary_search_by(|s| s.partial_cmp(&t).expect("finite times"))
        {
            Ok(i) => return self.values[i],
            Err(i) => i.clamp(1, self.times.len() - 1) - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// `x2(t) = k' x1(t) + k x1(t) * integral of x1^-2 from t_base to t`, the
/// second solution built from one known solution `x1` of `x'' = -w^2(t) x`.
pub fn partial_superposition<T: Real>(x1: &Expr, k: T, k_prime: T, t_base: T, t: T, tol: T) -> Result<T> {
    let mut first_err = None;
    let out = partial_superposition_with(
        |s| match x1.eval_t(s) {
            Ok(v) => v,
            Err(e) => {
                first_err.get_or_insert(e);
                T::nan()
            }
        },
        k,
        k_prime,
        t_base,
        t,
        tol,
    );
    match first_err {
        Some(e) => Err(e.into()),
        None => out,
    }
}

/// [`partial_superposition`] with `x1` given as a function, such as a
/// [`CubicHermite`] interpolant of a numerical solution.
pub fn partial_superposition_with<T: Real, F: FnMut(T) -> T>(
    mut x1: F,
    k: T,
    k_prime: T,
    t_base: T,
    t: T,
    tol: T,
) -> Result<T> {
    let xt = x1(t);
    if k == T::zero() {
        return Ok(k_prime * xt);
    }
    let scan = linspace(t_base, t, ZERO_SCAN);
    let mut prev = x1(t_base);
    for &s in &scan {
        let v = x1(s);
        if !v.is_finite() || v == T::zero() || v.signum() != prev.signum() {
            return Err(Error::Degenerate(format!(
                "x1 vanishes near t = {s}, the quadrature is singular"
            )));
        }
        prev = v;
    }
    let integral = quad(
        |s| {
            let v = x1(s);
            let r = (v * v).recip();
            if r.is_finite() {
                Ok(r)
            } else {
                Err(NumericError::NonFinite { at: s.as_f64() })
            }
        },
        t_base,
        t,
        tol,
    )?;
    Ok(k_prime * xt + k * xt * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::parse;

    fn sampled(f: impl Fn(f64) -> [f64; 2], times: &[f64]) -> Trajectory<f64> {
        let mut tr = Trajectory::new(2);
        for &t in times {
            tr.push(t, &f(t));
        }
        tr
    }

    #[test]
    fn linear_rule() {
        let times = linspace(0.0, 3.0, 31);
        let c = sampled(|t| [t.cos(), -t.sin()], &times);
        let s = sampled(|t| [t.sin(), t.cos()], &times);
        assert_eq!(linear_superposition(&c, &s, 1.0, 0.0).unwrap(), c);
        let sum = linear_superposition(&c, &s, 1.0, 1.0).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let want = 2f64.sqrt() * (t - std::f64::consts::FRAC_PI_4).cos();
            assert!((sum.state(i)[0] - want).abs() < 1e-15);
        }
        let short = sampled(|t| [t, 1.0], &times[..5]);
        assert!(linear_superposition(&c, &short, 1.0, 1.0).is_err());
    }

    #[test]
    fn wronskians() {
        let times = linspace(0.0, 3.0, 31);
        let c = sampled(|t| [t.cos(), -t.sin()], &times);
        let s = sampled(|t| [t.sin(), t.cos()], &times);
        assert!(wronskian_invariants(&c, &s)
            .unwrap()
            .iter()
            .all(|w| (w - 1.0).abs() < 1e-15));
        let c2 = linear_superposition(&c, &c, 2.0, 0.0).unwrap();
        assert!(wronskian_invariants(&c, &c2).unwrap().iter().all(|w| w.abs() < 1e-15));
    }

    #[test]
    fn wronskian_system_inverts_the_invariants() {
        let (s1, s2, x): ([f64; 2], [f64; 2], [f64; 2]) = ([0.3, -1.0], [1.2, 0.4], [-0.7, 2.0]);
        let f1 = x[0] * s1[1] - s1[0] * x[1];
        let f2 = x[0] * s2[1] - s2[0] * x[1];
        let got = solve_wronskian_system(s1, s2, f1, f2).unwrap();
        assert!((got[0] - x[0]).abs() < 1e-14 && (got[1] - x[1]).abs() < 1e-14);
        assert!(solve_wronskian_system([1.0, 2.0], [2.0, 4.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let times = vec![0.0, 0.5, 1.3, 2.0];
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let h = CubicHermite::new(
            times.clone(),
            times.iter().map(|&t| f(t)).collect(),
            times.iter().map(|&t| df(t)).collect(),
        )
        .unwrap();
        for &t in &[0.1, 0.5, 0.77, 1.9] {
            assert!((h.eval(t) - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn partial_rule() {
        let x1 = parse("cos(t)").unwrap();
        for &t in &[0.0, 0.5, 1.2] {
            let x2 = partial_superposition(&x1, 1.0, 0.0, 0.0, t, 1e-12).unwrap();
            assert!((x2 - f64::sin(t)).abs() < 1e-10);
            assert_eq!(
                partial_superposition(&x1, 0.0, 2.0, 0.0, t, 1e-12).unwrap(),
                2.0 * t.cos()
            );
        }
        assert!(matches!(
            partial_superposition(&x1, 1.0, 0.0, 0.0, 2.0, 1e-12),
            Err(Error::Degenerate(_))
        ));
    }
}
