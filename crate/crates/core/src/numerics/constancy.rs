use super::NumericError;
use crate::Real;

/// Relative tolerance used when a caller does not pick one.
pub const DEFAULT_CONSTANCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstancyReport<T> {
    pub is_constant: bool,
    pub mean: T,
    pub max_deviation: T,
}

impl<T: Real> ConstancyReport<T> {
    pub fn to_f64(&self) -> ConstancyReport<f64> {
        ConstancyReport {
            is_constant: self.is_constant,
            mean: self.mean.as_f64(),
            max_deviation: self.max_deviation.as_f64(),
        }
    }
}

/// Decides whether the samples are constant up to `tol * (1 + |mean|)`.
pub fn constancy<T: Real>(samples: &[T], tol: T) -> Result<ConstancyReport<T>, NumericError> {
    if samples.len() < 2 {
        return Err(NumericError::TooFewSamples(samples.len()));
    }
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(NumericError::NonFinite { at: i as f64 });
    }
    let n = T::lit(samples.len() as f64);
    let mean = samples.iter().fold(T::zero(), |acc, &s| acc + s) / n;
    let max_deviation = samples.iter().fold(T::zero(), |acc, &s| acc.max((s - mean).abs()));
    Ok(ConstancyReport {
        is_constant: max_deviation <= tol * (T::one() + mean.abs()),
        mean,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_samples() {
        let r = constancy(&[1.0, 1.0, 1.0], 1e-9).unwrap();
        assert!(r.is_constant);
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn small_drift_is_detected() {
        let r = constancy(&[1.0_f64, 1.001], 1e-6).unwrap();
        assert!(!r.is_constant);
        assert!((r.max_deviation - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn bad_input() {
        assert!(matches!(constancy(&[1.0], 1e-6), Err(NumericError::TooFewSamples(1))));
        assert!(matches!(
            constancy(&[1.0, f64::NAN], 1e-6),
            Err(NumericError::NonFinite { .. })
        ));
    }
}
