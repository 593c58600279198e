use std::cmp::Ordering;

use crate::error::{CurError, Result};
use crate::linalg::decomp::{singular_values, zero_threshold};
use crate::linalg::DenseMatrix;

/// Volume (product of singular values) kept as a sum of logarithms.
///
/// Products of a few dozen singular values overflow or underflow `f64`, so
/// every comparison here works on `log_value` and nothing is exponentiated
/// except by [`LogVolume::value`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVolume {
    pub is_zero: bool,
    pub log_value: f64,
}

impl LogVolume {
    pub const ZERO: LogVolume = LogVolume {
        is_zero: true,
        log_value: f64::NEG_INFINITY,
    };

    pub fn from_log(log_value: f64) -> Self {
        if log_value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogVolume {
                is_zero: false,
                log_value,
            }
        }
    }

    /// Product of the given singular values; any value at or below `cutoff`
    /// makes the volume zero.
    pub fn from_singular_values(values: &[f64], cutoff: f64) -> Self {
        if values.iter().any(|&s| s <= cutoff) {
            return Self::ZERO;
        }
        LogVolume {
            is_zero: false,
            log_value: values.iter().map(|s| s.ln()).sum(),
        }
    }

    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_value.exp()
        }
    }

    /// `ln(self / other)`; `+inf` / `-inf` when exactly one side is zero and
    /// `0` when both are.
    pub fn log_ratio(&self, other: &LogVolume) -> f64 {
        match (self.is_zero, other.is_zero) {
            (true, true) => 0.0,
            (true, false) => f64::NEG_INFINITY,
            (false, true) => f64::INFINITY,
            (false, false) => self.log_value - other.log_value,
        }
    }

    /// `self > (1 + eps) * other`, tested as a log difference.
    pub fn exceeds(&self, other: &LogVolume, eps: f64) -> bool {
        if self.is_zero {
            return false;
        }
        self.log_ratio(other) > eps.ln_1p()
    }

    pub fn product(&self, other: &LogVolume) -> LogVolume {
        if self.is_zero || other.is_zero {
            Self::ZERO
        } else {
            LogVolume {
                is_zero: false,
                log_value: self.log_value + other.log_value,
            }
        }
    }
}

impl PartialOrd for LogVolume {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero, other.is_zero) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => self.log_value.partial_cmp(&other.log_value),
        }
    }
}

/// `v2(M)`: product of all `min(k, l)` singular values.
pub fn volume(m: &DenseMatrix) -> Result<LogVolume> {
    let s = singular_values(m)?;
    Ok(from_leading(m, &s, s.len()))
}

/// `v2,r(M)`: product of the `r` largest singular values.
pub fn projective_volume(m: &DenseMatrix, r: usize) -> Result<LogVolume> {
    let full = m.rows().min(m.cols());
    if r == 0 || r > full {
        return Err(CurError::InvalidArgument(format!(
            "projective rank {r} outside 1..={full}"
        )));
    }
    let s = singular_values(m)?;
    Ok(from_leading(m, &s, r))
}

fn from_leading(m: &DenseMatrix, s: &[f64], r: usize) -> LogVolume {
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return if r == 0 {
            LogVolume::from_log(0.0)
        } else {
            LogVolume::ZERO
        };
    }
    LogVolume::from_singular_values(&s[..r], zero_threshold(m.rows(), m.cols(), top))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian;
    use crate::linalg::singular_values;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn volume_examples() {
        assert!((volume(&DenseMatrix::identity(2)).unwrap().value() - 1.0).abs() < 1e-14);
        assert!((volume(&DenseMatrix::from_diag(&[3.0, 2.0])).unwrap().value() - 6.0).abs() < 1e-13);
        let ones = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(volume(&ones).unwrap().is_zero);
    }

    #[test]
    fn projective_examples() {
        let d = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
        assert!((projective_volume(&d, 1).unwrap().value() - 3.0).abs() < 1e-13);
        let full = projective_volume(&d, 3).unwrap();
        assert!((full.value() - 6.0).abs() < 1e-13);
        assert!((full.log_value - volume(&d).unwrap().log_value).abs() < 1e-14);
        assert!(projective_volume(&d, 0).is_err());
        assert!(projective_volume(&d, 4).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_gaussian(5, 4, &mut rng);
        let s = singular_values(&a).unwrap();
        let pv = projective_volume(&a, 2).unwrap();
        assert!((pv.log_value - (s[0] * s[1]).ln()).abs() < 1e-12);
    }

    #[test]
    fn ratios_never_exponentiate() {
        let big = LogVolume::from_log(900.0);
        let bigger = LogVolume::from_log(900.0 + 0.2f64.ln_1p());
        assert!(bigger.exceeds(&big, 0.1));
        assert!(!bigger.exceeds(&big, 0.3));
        assert_eq!(LogVolume::ZERO.log_ratio(&big), f64::NEG_INFINITY);
        assert_eq!(big.log_ratio(&LogVolume::ZERO), f64::INFINITY);
        assert!(LogVolume::ZERO < big);
    }
}
