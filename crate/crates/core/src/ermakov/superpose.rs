use super::{triple_invariants, ErmakovState, TripleInvariants};
use crate::error::{Error, Result};
use crate::Real;

/// Relative size below which a negative discriminant or radicand is rounding.
const CLAMP: f64 = 1e-10;

fn clamp_nonneg<T: Real>(v: T, scale: T, what: &str) -> Result<T> {
    if v >= T::zero() {
        Ok(v)
    } else if -v <= T::lit(CLAMP) * scale {
        Ok(T::zero())
    } else {
        Err(Error::Degenerate(format!("{what} is negative ({v})")))
    }
}

/// `x = (sqrt(2)/W) (I2 y^2 + I1 z^2 + sign sqrt(4 I1 I2 - k W^2) y z)^(1/2)`.
pub fn pinney_superposition<T: Real>(y: T, z: T, i1: T, i2: T, w: T, k: T, sign: T) -> Result<T> {
    if w == T::zero() {
        return Err(Error::Degenerate(
            "W = 0: the oscillator solutions are dependent".into(),
        ));
    }
    let four = T::lit(4.0);
    let disc = four * i1 * i2 - k * w * w;
    let disc = clamp_nonneg(
        disc,
        four * (i1 * i2).abs() + (k * w * w).abs(),
        "discriminant 4 I1 I2 - k W^2",
    )?;
    let a = i2 * y * y + i1 * z * z;
    let b = sign.signum() * disc.sqrt() * y * z;
    let rad = clamp_nonneg(a + b, a.abs() + b.abs(), "radicand")?;
    Ok(T::lit(2.0).sqrt() / w * rad.sqrt())
}

/// The superposition rule with its constants and branch fixed by initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinneySuperposition<T> {
    pub inv: TripleInvariants<T>,
    pub k: T,
    /// The `+1` or `-1` in front of the discriminant.
    pub sign: T,
    /// `+1`, or `-1` when the formula's sign (that of `W`) is opposite to `x`.
    pub orient: T,
}

impl<T: Real> PinneySuperposition<T> {
    /// Constants from the state `(x, vx, y, vy, z, vz)` at the initial time,
    /// `x` being the Pinney solution and `y`, `z` the oscillator seeds.
    ///
    /// The branch is the one reproducing `x`; when both do (`y z = 0`) the
    /// one reproducing `vx` wins, and `+` when that ties too.
    pub fn from_initial(st: &ErmakovState<T>, k: T) -> Result<Self> {
        let inv = triple_invariants(st, k)?;
        let orient = if (st.x > T::zero()) == (inv.w > T::zero()) {
            T::one()
        } else {
            -T::one()
        };
        let mut best: Option<(T, T, T)> = None;
        for sign in [T::one(), -T::one()] {
            let cand = PinneySuperposition { inv, k, sign, orient };
            let x = cand.eval(st.y, st.z)?;
            let v = cand.velocity(x, st.y, st.vy, st.z, st.vz)?;
            let dx = (x - st.x).abs() / st.x.abs().max(T::one());
            let dv = (v - st.vx).abs() / st.vx.abs().max(T::one());
            let tie = T::lit(1e-9);
            best = match best {
                None => Some((sign, dx, dv)),
                Some((s, bx, bv)) => {
                    let better = if (dx - bx).abs() > tie { dx < bx } else { dv + tie < bv };
                    if better {
                        Some((sign, dx, dv))
                    } else {
                        Some((s, bx, bv))
                    }
                }
            };
        }
        let (sign, _, _) = best.expect("two candidates");
        Ok(PinneySuperposition { inv, k, sign, orient })
    }

    pub fn eval(&self, y: T, z: T) -> Result<T> {
        let TripleInvariants { i1, i2, w } = self.inv;
        Ok(self.orient * pinney_superposition(y, z, i1, i2, w, self.k, self.sign)?)
    }

    /// `x'` from `x` and the seeds, differentiating `x^2 W^2 / 2`.
    pub fn velocity(&self, x: T, y: T, vy: T, z: T, vz: T) -> Result<T> {
        if x == T::zero() {
            return Err(Error::Degenerate("x = 0".into()));
        }
        let TripleInvariants { i1, i2, w } = self.inv;
        let two = T::lit(2.0);
        let disc = (T::lit(4.0) * i1 * i2 - self.k * w * w).max(T::zero());
        let d = two * i2 * y * vy + two * i1 * z * vz + self.sign * disc.sqrt() * (vy * z + y * vz);
        Ok(d / (w * w * x))
    }

    /// `4 I1 I2 - k W^2`.
    pub fn discriminant(&self) -> T {
        T::lit(4.0) * self.inv.i1 * self.inv.i2 - self.k * self.inv.w * self.inv.w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_from_sine_and_cosine() {
        for &t in &[0.0_f64, 0.4, 2.0, 7.0] {
            for sign in [1.0, -1.0] {
                let x = pinney_superposition(t.cos(), t.sin(), 0.5, 0.5, 1.0, 1.0, sign).unwrap();
                assert!((x - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn collapses_when_y_vanishes() {
        let (i1, i2, w, k) = (0.8_f64, 0.3, 1.2, 0.5);
        let x = pinney_superposition(0.0, -1.7, i1, i2, w, k, 1.0).unwrap();
        assert!((x - (2.0 * i1).sqrt() * 1.7 / w).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(pinney_superposition(1.0, 1.0, 0.5, 0.5, 0.0, 1.0, 1.0).is_err());
        assert!(pinney_superposition(1.0, 1.0, 0.1, 0.1, 1.0, 1.0, 1.0).is_err());
        let tiny = pinney_superposition(1.0_f64, 0.0, 0.5, 0.5, 1.0, 1.0 + 1e-13, 1.0).unwrap();
        assert!((tiny - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_follows_initial_data() {
        // seeds y = cos, z = sin at t = 0 and an arbitrary Pinney state
        for &(x0, v0) in &[(1.3_f64, 0.4), (0.7, -0.9), (-1.1, 0.2)] {
            let st = ErmakovState::from_slice(&[x0, v0, 1.0, 0.0, 0.0, 1.0]).unwrap();
            let rule = PinneySuperposition::from_initial(&st, 1.0).unwrap();
            let x = rule.eval(1.0, 0.0).unwrap();
            assert!((x - x0).abs() < 1e-14);
            let v = rule.velocity(x, 1.0, 0.0, 0.0, 1.0).unwrap();
            assert!((v - v0).abs() < 1e-14, "{v} vs {v0}");
        }
    }
}
