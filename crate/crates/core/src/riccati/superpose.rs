use crate::error::{Error, Result};
use crate::sl2::{ExtReal, Mat2};
use crate::Real;

/// The Möbius transformation sending `x1, x2, x3` to `0, inf, 1`.
pub fn map_points<T: Real>(x1: ExtReal<T>, x2: ExtReal<T>, x3: ExtReal<T>) -> Result<Mat2<T>> {
    if x1 == x2 || x1 == x3 || x2 == x3 {
        return Err(Error::Degenerate(format!("points {x1}, {x2}, {x3} are not distinct")));
    }
    let (one, zero) = (T::one(), T::zero());
    let m = match (x1, x2, x3) {
        (ExtReal::Infinity, ExtReal::Finite(b), ExtReal::Finite(c)) => Mat2::new(zero, c - b, one, -b),
        (ExtReal::Finite(a), ExtReal::Infinity, ExtReal::Finite(c)) => Mat2::new(one, -a, zero, c - a),
        (ExtReal::Finite(a), ExtReal::Finite(b), ExtReal::Infinity) => Mat2::new(one, -a, one, -b),
        (ExtReal::Finite(a), ExtReal::Finite(b), ExtReal::Finite(c)) => {
            Mat2::new(c - b, -a * (c - b), c - a, -b * (c - a))
        }
        _ => unreachable!("at most one point is infinite"),
    };
    Ok(m)
}

/// The cross ratio `(x - x1)/(x - x2) : (x3 - x1)/(x3 - x2)`.
pub fn cross_ratio<T: Real>(x: ExtReal<T>, x1: ExtReal<T>, x2: ExtReal<T>, x3: ExtReal<T>) -> Result<T> {
    match map_points(x1, x2, x3)?.mobius(x) {
        ExtReal::Finite(k) => Ok(k),
        ExtReal::Infinity => Err(Error::Degenerate("x coincides with x2".into())),
    }
}

/// The point with cross ratio `k` relative to `x1, x2, x3`; an infinite `k`
/// gives `x2`.
pub fn superpose_cross_ratio<T: Real>(x1: ExtReal<T>, x2: ExtReal<T>, x3: ExtReal<T>, k: T) -> Result<ExtReal<T>> {
    let m = map_points(x1, x2, x3)?;
    if m.det() == T::zero() {
        return Err(Error::Degenerate("points too close to separate".into()));
    }
    // the adjugate acts like the inverse on the projective line
    let adj = Mat2::new(m.d, -m.b, -m.c, m.a);
    Ok(adj.mobius(ExtReal::from_real(k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: f64) -> ExtReal<f64> {
        ExtReal::Finite(x)
    }

    #[test]
    fn special_values() {
        let (a, b, c) = (f(0.5), f(-2.0), f(3.0));
        let x1 = superpose_cross_ratio(a, b, c, 0.0).unwrap().finite().unwrap();
        assert!((x1 - 0.5).abs() < 1e-15);
        let x3 = superpose_cross_ratio(a, b, c, 1.0).unwrap().finite().unwrap();
        assert!((x3 - 3.0).abs() < 1e-15);
        assert_eq!(cross_ratio(a, a, b, c).unwrap(), 0.0);
        assert!((cross_ratio(c, a, b, c).unwrap() - 1.0).abs() < 1e-15);
        let x2 = superpose_cross_ratio(a, b, c, f64::INFINITY).unwrap().finite().unwrap();
        assert!((x2 + 2.0).abs() < 1e-15);
    }

    #[test]
    fn matches_the_textbook_formula() {
        let (x, a, b, c) = (1.7, 0.2, -1.1, 4.0);
        let direct = ((x - a) / (x - b)) / ((c - a) / (c - b));
        let k = cross_ratio(f(x), f(a), f(b), f(c)).unwrap();
        assert!((k - direct).abs() < 1e-14);
        let back = superpose_cross_ratio(f(a), f(b), f(c), k).unwrap().finite().unwrap();
        assert!((back - x).abs() < 1e-13);
    }

    #[test]
    fn infinite_points() {
        let inf = ExtReal::Infinity;
        for pts in [(inf, f(1.0), f(2.0)), (f(1.0), inf, f(2.0)), (f(1.0), f(2.0), inf)] {
            let (a, b, c) = pts;
            let m = map_points(a, b, c).unwrap();
            assert_eq!(m.mobius(a), f(0.0));
            assert_eq!(m.mobius(b), inf);
            assert_eq!(m.mobius(c), f(1.0));
            let x = superpose_cross_ratio(a, b, c, 2.5).unwrap();
            assert!((cross_ratio(x, a, b, c).unwrap() - 2.5).abs() < 1e-14);
        }
        assert_eq!(superpose_cross_ratio(f(1.0), inf, f(2.0), 0.0).unwrap(), f(1.0));
    }

    #[test]
    fn degenerate_triples() {
        assert!(matches!(map_points(f(1.0), f(1.0), f(2.0)), Err(Error::Degenerate(_))));
        assert!(cross_ratio(f(-2.0), f(0.5), f(-2.0), f(3.0)).is_err());
    }
}
