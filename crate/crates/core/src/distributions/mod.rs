//! The Gompertz law and the non-Gompertz alternatives used in power studies.

mod alternatives;
mod gompertz;

pub use alternatives::AlternativeSpec;
pub use gompertz::GompertzParams;

use crate::error::{GofError, Result};
use crate::scalar::Real;

/// A univariate law on the positive half-line, evaluated in `f64`.
pub trait Density {
    fn pdf(&self, x: f64) -> f64;

    /// Natural log of the density; `-inf` outside the support.
    fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    fn cdf(&self, x: f64) -> f64;

    /// Right end of the support (`f64::INFINITY` when unbounded).
    fn upper_bound(&self) -> f64 {
        f64::INFINITY
    }
}

/// A nonempty collection of strictly positive, finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    values: Vec<T>,
}

impl<T: Real> Sample<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(GofError::Domain("sample must contain at least one value".into()));
        }
        if let Some((i, x)) = values.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > T::zero())) {
            return Err(GofError::Domain(format!(
                "observation {} is {x}; all observations must be positive and finite",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_positive(values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|x| x.is_finite() && *x > T::zero()));
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ascending copy of the observations.
    pub fn sorted(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("sample values are finite"));
        v
    }

    /// The sample multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.values.iter().map(|&x| x * factor).collect())
    }

    pub fn mean(&self) -> T {
        crate::scalar::compensated_sum(self.values.iter().copied()) / T::of_usize(self.values.len())
    }
}

impl<T: Real> TryFrom<Vec<T>> for Sample<T> {
    type Error = GofError;

    fn try_from(values: Vec<T>) -> Result<Self> {
        Self::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_and_nonfinite() {
        assert!(Sample::new(vec![1.0, 0.0]).is_err());
        assert!(Sample::new(vec![1.0, -2.0]).is_err());
        assert!(Sample::new(vec![f64::NAN]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
        assert!(Sample::<f64>::new(vec![]).is_err());
        assert!(Sample::new(vec![3.0f32]).is_ok());
    }

    #[test]
    fn sorted_and_scaled() {
        let s = Sample::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.sorted(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.scaled(0.5).unwrap().values(), &[1.5, 0.5, 1.0]);
        assert_eq!(s.mean(), 2.0);
    }
}
