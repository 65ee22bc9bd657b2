use std::fmt;
use std::ops::Mul;

use crate::Real;

/// Real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(p: T, q: T) -> Self {
        Mat2::new(p, T::zero(), T::zero(), q)
    }

    pub fn from_array(m: [T; 4]) -> Self {
        Mat2::new(m[0], m[1], m[2], m[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> T {
        self.a + self.d
    }

    pub fn scale(&self, k: T) -> Self {
        Mat2::new(self.a * k, self.b * k, self.c * k, self.d * k)
    }

    /// `None` when the matrix is singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let r = det.recip();
        Some(Mat2::new(self.d * r, -self.b * r, -self.c * r, self.a * r))
    }

    /// Divides by `sqrt(|det|)`, which leaves the Möbius action unchanged.
    pub fn renormalized(&self) -> Self {
        let det = self.det().abs();
        if det == T::zero() {
            return *self;
        }
        self.scale(det.sqrt().recip())
    }

    /// Linear action on the plane.
    pub fn apply(&self, x: T, y: T) -> (T, T) {
        (self.a * x + self.b * y, self.c * x + self.d * y)
    }

    /// Fractional linear action on the projective line.
    pub fn mobius(&self, x: ExtReal<T>) -> ExtReal<T> {
        match x {
            ExtReal::Finite(x) => {
                let num = self.a * x + self.b;
                let den = self.c * x + self.d;
                if den == T::zero() {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(num / den)
                }
            }
            ExtReal::Infinity if self.c == T::zero() => ExtReal::Infinity,
            ExtReal::Infinity => ExtReal::Finite(self.a / self.c),
        }
    }

    /// `exp(tau * self)`.
    pub fn expm(&self, tau: T) -> Self {
        let half_tr = self.trace() / T::lit(2.0);
        let shifted = Mat2::new(self.a - half_tr, self.b, self.c, self.d - half_tr);
        shifted.expm_traceless(tau).scale((half_tr * tau).exp())
    }

    /// `exp(tau * self)` for traceless `self`, via `A^2 = -det(A) I`.
    fn expm_traceless(&self, tau: T) -> Self {
        let q = -self.det();
        let (p, r) = if q > T::zero() {
            let s = q.sqrt();
            ((s * tau).cosh(), (s * tau).sinh() / s)
        } else if q < T::zero() {
            let w = (-q).sqrt();
            ((w * tau).cos(), (w * tau).sin() / w)
        } else {
            (T::one(), tau)
        };
        Mat2::identity().scale(p).add(&self.scale(r))
    }

    /// A positive multiple of `exp(tau * self)` for traceless `self`, finite
    /// for every `tau`. Only its Möbius action is meaningful.
    pub fn expm_projective(&self, tau: T) -> Self {
        let q = -self.det();
        if q > T::zero() {
            // (I + sA/s)/2 + E (I - sA/s)/2 with E = exp(-2|s tau|)
            let s = q.sqrt();
            let sigma = if tau < T::zero() { -T::one() } else { T::one() };
            let e = (T::lit(-2.0) * (s * tau).abs()).exp();
            let dir = self.scale(sigma / s);
            let id = Mat2::identity();
            id.add(&dir).add(&id.sub(&dir).scale(e)).scale(T::lit(0.5))
        } else {
            self.expm_traceless(tau)
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, o: &Self) -> T {
        let d = self.sub(o);
        d.a.abs().max(d.b.abs()).max(d.c.abs()).max(d.d.abs())
    }

    pub fn max_abs(&self) -> T {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn cast<U: Real>(&self) -> Mat2<U> {
        Mat2::new(
            U::lit(self.a.as_f64()),
            U::lit(self.b.as_f64()),
            U::lit(self.c.as_f64()),
            U::lit(self.d.as_f64()),
        )
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Mat2<T>;

    fn mul(self, o: Mat2<T>) -> Mat2<T> {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<T: Real> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Point of the real projective line: a real number or the single infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> ExtReal<T> {
    /// Maps both infinities to [`ExtReal::Infinity`]; NaN stays finite-tagged.
    pub fn from_real(x: T) -> Self {
        if x.is_infinite() {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(x)
        }
    }

    /// Infinity becomes `+inf`.
    pub fn to_real(self) -> T {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinity => T::infinity(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinity => None,
        }
    }

    /// Chordal distance on the projective line, at most 1. Infinity is close
    /// to large numbers of either sign.
    pub fn chordal_distance(self, other: Self) -> T {
        let one = T::one();
        match (self, other) {
            (ExtReal::Infinity, ExtReal::Infinity) => T::zero(),
            (ExtReal::Finite(x), ExtReal::Infinity) | (ExtReal::Infinity, ExtReal::Finite(x)) => {
                (one + x * x).sqrt().recip()
            }
            (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() / ((one + x * x).sqrt() * (one + y * y).sqrt()),
        }
    }
}

impl<T: Real> From<T> for ExtReal<T> {
    fn from(x: T) -> Self {
        ExtReal::from_real(x)
    }
}

impl<T: Real> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Mat2<f64>;

    fn close(a: &M, b: &M, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn mobius_conventions() {
        let x = ExtReal::Finite(7.0);
        assert_eq!(M::identity().mobius(x), x);
        assert_eq!(
            M::new(1.0, 1.0, 0.0, 1.0).mobius(ExtReal::Finite(0.0)),
            ExtReal::Finite(1.0)
        );
        let rot = M::new(0.0, 1.0, -1.0, 0.0);
        assert_eq!(rot.mobius(ExtReal::Infinity), ExtReal::Finite(0.0));
        // the pole -d/c goes to infinity
        let m = M::new(2.0, 1.0, 1.0, 3.0);
        assert_eq!(m.mobius(ExtReal::Finite(-3.0)), ExtReal::Infinity);
        assert_eq!(M::identity().mobius(ExtReal::Infinity), ExtReal::Infinity);
    }

    #[test]
    fn mobius_is_a_group_action() {
        let g = M::new(2.0, 1.0, 1.0, 1.0);
        let h = M::new(1.0, -3.0, 0.5, -0.5);
        for &x in &[0.0, 1.3, -4.0] {
            let x = ExtReal::Finite(x);
            let lhs = (g * h).mobius(x);
            let rhs = g.mobius(h.mobius(x));
            assert!(lhs.chordal_distance(rhs) < 1e-14);
        }
    }

    #[test]
    fn inverse_and_renormalization() {
        let m = M::new(3.0, 1.0, 2.0, 4.0);
        assert!(close(&(m * m.inverse().unwrap()), &M::identity(), 1e-15));
        assert!((m.renormalized().det() - 1.0).abs() < 1e-15);
        assert!(M::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }

    #[test]
    fn exponentials() {
        let t = 0.7_f64;
        let rot = M::new(0.0, 1.0, -1.0, 0.0).expm(t);
        assert!(close(&rot, &M::new(t.cos(), t.sin(), -t.sin(), t.cos()), 1e-15));
        let nil = M::new(0.0, 1.0, 0.0, 0.0).expm(t);
        assert_eq!(nil, M::new(1.0, t, 0.0, 1.0));
        let hyp = M::new(0.5, 0.0, 0.0, -0.5).expm(t);
        assert!(close(&hyp, &M::diag((t / 2.0).exp(), (-t / 2.0).exp()), 1e-15));
        let general = M::new(1.0, 0.0, 0.0, 2.0).expm(t);
        assert!(close(&general, &M::diag(t.exp(), (2.0 * t).exp()), 1e-14));
    }

    #[test]
    fn projective_exponential_survives_huge_times() {
        let a = M::new(0.5, 0.0, 0.0, -0.5);
        let m = a.expm_projective(300.0);
        assert!(m.max_abs().is_finite());
        assert_eq!(m.mobius(ExtReal::Finite(0.0)), ExtReal::Finite(0.0));
        let y = m.mobius(ExtReal::Finite(1.0)).finite().unwrap();
        assert!((y.ln() - 300.0).abs() < 1e-9);
        let exact = a.expm(0.8);
        let proj = a.expm_projective(0.8);
        for &x in &[-2.0, 0.3, 5.0] {
            let (u, v) = (exact.mobius(ExtReal::Finite(x)), proj.mobius(ExtReal::Finite(x)));
            assert!(u.chordal_distance(v) < 1e-15);
        }
    }
}
