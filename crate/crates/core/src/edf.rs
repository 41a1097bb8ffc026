//! Classical EDF statistics on probability-integral transforms of the
//! rescaled data.

use crate::error::{GofError, Result};
use crate::scalar::{CompensatedSum, Real};

/// Sorted transforms `U_(j) = F(Y_(j); η̂, 1)` kept away from 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfInput<T> {
    u: Vec<T>,
    ln_u: Vec<T>,
    ln_sf: Vec<T>,
    clipped: usize,
    saturated: bool,
}

/// Lower clipping bound for `U`.
pub fn clip_epsilon<T: Real>() -> T {
    T::of(1e-15).max(T::epsilon())
}

impl<T: Real> EdfInput<T> {
    /// From transforms in `[0, 1]`. Values landing on 0 or 1 are clipped and
    /// make [`ad_statistic`] fail.
    pub fn new(mut u: Vec<T>) -> Result<Self> {
        if u.is_empty() {
            return Err(GofError::Domain("EDF statistic needs at least one value".into()));
        }
        if let Some(bad) = u.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(GofError::Domain(format!("transform {bad} is outside [0, 1]")));
        }
        u.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let saturated = u[0] == T::zero() || u[u.len() - 1] == T::one();
        let (u, clipped) = clip_all(u);
        let ln_u = u.iter().map(|v| v.ln()).collect();
        let ln_sf = u.iter().map(|v| (-*v).ln_1p()).collect();
        Ok(Self { u, ln_u, ln_sf, clipped, saturated })
    }

    /// From rescaled observations under GO(η̂, 1). Logarithms are taken from
    /// the cumulative hazard directly, so they stay exact where `U` rounds to 1.
    pub fn from_rescaled(values: &[T], eta_hat: T) -> Result<Self> {
        if values.is_empty() {
            return Err(GofError::Domain("EDF statistic needs at least one value".into()));
        }
        if !(eta_hat.is_finite() && eta_hat > T::zero()) {
            return Err(GofError::InvalidParameter(format!("shape estimate must be positive, got {eta_hat}")));
        }
        if let Some(bad) = values.iter().find(|y| !(y.is_finite() && **y > T::zero())) {
            return Err(GofError::Domain(format!("rescaled observations must be positive, got {bad}")));
        }
        let mut hazard: Vec<T> = values.iter().map(|&y| eta_hat * y.exp_m1()).collect();
        hazard.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        let raw: Vec<T> = hazard.iter().map(|&h| -(-h).exp_m1()).collect();
        let ln_u = hazard.iter().map(|&h| (-(-h).exp_m1()).ln()).collect();
        let ln_sf = hazard.iter().map(|&h| -h).collect();
        let (u, clipped) = clip_all(raw);
        Ok(Self { u, ln_u, ln_sf, clipped, saturated: false })
    }

    pub(crate) fn from_sorted_rescaled(sorted: &[T], eta_hat: T) -> Self {
        let hazard = sorted.iter().map(|&y| eta_hat * y.exp_m1());
        let mut u = Vec::with_capacity(sorted.len());
        let mut ln_u = Vec::with_capacity(sorted.len());
        let mut ln_sf = Vec::with_capacity(sorted.len());
        for h in hazard {
            let v = -(-h).exp_m1();
            u.push(v);
            ln_u.push(v.ln());
            ln_sf.push(-h);
        }
        let (u, clipped) = clip_all(u);
        Self { u, ln_u, ln_sf, clipped, saturated: false }
    }

    pub fn values(&self) -> &[T] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Number of transforms moved onto the clipping bounds.
    pub fn clipped(&self) -> usize {
        self.clipped
    }
}

fn clip_all<T: Real>(mut u: Vec<T>) -> (Vec<T>, usize) {
    let eps = clip_epsilon::<T>();
    let (lo, hi) = (eps, T::one() - eps);
    let mut clipped = 0;
    for v in &mut u {
        if *v < lo {
            *v = lo;
            clipped += 1;
        } else if *v > hi {
            *v = hi;
            clipped += 1;
        }
    }
    (u, clipped)
}

/// Kolmogorov-Smirnov distance.
pub fn ks_statistic<T: Real>(input: &EdfInput<T>) -> T {
    let n = T::of_usize(input.len());
    input.u.iter().enumerate().fold(T::zero(), |acc, (j, &u)| {
        let above = T::of_usize(j + 1) / n - u;
        let below = u - T::of_usize(j) / n;
        acc.max(above).max(below)
    })
}

/// Cramér-von Mises statistic.
pub fn cm_statistic<T: Real>(input: &EdfInput<T>) -> T {
    let n = T::of_usize(input.len());
    let two_n = n + n;
    let mut acc = CompensatedSum::new();
    acc.add(T::one() / (T::of(12.0) * n));
    for (j, &u) in input.u.iter().enumerate() {
        let d = u - T::of_usize(2 * j + 1) / two_n;
        acc.add(d * d);
    }
    acc.value()
}

/// Anderson-Darling statistic.
pub fn ad_statistic<T: Real>(input: &EdfInput<T>) -> Result<T> {
    if input.saturated {
        return Err(GofError::Overflow("transform at 0 or 1; Anderson-Darling is undefined".into()));
    }
    let n = input.len();
    let mut acc = CompensatedSum::new();
    for j in 0..n {
        let term = input.ln_u[j] + input.ln_sf[n - 1 - j];
        acc.add(T::of_usize(2 * j + 1) * term);
    }
    let nt = T::of_usize(n);
    let value = -nt - acc.value() / nt;
    if !value.is_finite() {
        return Err(GofError::Overflow("Anderson-Darling statistic is not finite".into()));
    }
    Ok(value)
}

/// Watson statistic: Cramér-von Mises centred by the mean transform.
pub fn watson_statistic<T: Real>(input: &EdfInput<T>) -> T {
    let n = T::of_usize(input.len());
    let mean = input.u.iter().copied().sum::<T>() / n;
    let centre = mean - T::of(0.5);
    cm_statistic(input) - n * centre * centre
}
