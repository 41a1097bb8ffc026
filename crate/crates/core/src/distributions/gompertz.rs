use rand::RngCore;

use super::{Density, Sample};
use crate::error::{GofError, Result};
use crate::rng::{open_unit, stream};
use crate::scalar::Real;

/// Gompertz law GO(η, b) with density `bη·exp(η + bx − η·e^{bx})` on `x ≥ 0`.
///
/// `eta` is the shape and `b` the rate; `b·X` is GO(η, 1) whenever X is GO(η, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzParams<T> {
    eta: T,
    b: T,
}

impl<T: Real> GompertzParams<T> {
    pub fn new(eta: T, b: T) -> Result<Self> {
        if !(eta.is_finite() && eta > T::zero()) {
            return Err(GofError::InvalidParameter(format!("Gompertz shape must be positive, got {eta}")));
        }
        if !(b.is_finite() && b > T::zero()) {
            return Err(GofError::InvalidParameter(format!("Gompertz rate must be positive, got {b}")));
        }
        Ok(Self { eta, b })
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn pdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        let bx = self.b * x;
        self.b * self.eta * (bx - self.eta * bx.exp_m1()).exp()
    }

    pub fn ln_pdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::neg_infinity();
        }
        let bx = self.b * x;
        (self.b * self.eta).ln() + bx - self.eta * bx.exp_m1()
    }

    /// Cumulative hazard `η(e^{bx} − 1)`.
    pub fn cumulative_hazard(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        self.eta * (self.b * x).exp_m1()
    }

    pub fn cdf(&self, x: T) -> T {
        -(-self.cumulative_hazard(x)).exp_m1()
    }

    pub fn sf(&self, x: T) -> T {
        (-self.cumulative_hazard(x)).exp()
    }

    /// Inverse of the CDF, `ln(1 − ln(1−u)/η) / b`.
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(GofError::Domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    fn quantile_unchecked(&self, u: T) -> T {
        (-(-u).ln_1p() / self.eta).ln_1p() / self.b
    }

    /// `n` draws by inverse transform on the seed's primary stream.
    pub fn sample(&self, n: usize, seed: u64) -> Sample<T> {
        self.sample_with(&mut stream(seed, 0), n)
    }

    pub fn sample_with<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Sample<T> {
        assert!(n >= 1, "sample size must be at least 1");
        let below_one = T::one() - T::epsilon();
        let values = (0..n)
            .map(|_| {
                let u = T::of(open_unit(rng)).min(below_one).max(T::min_positive_value());
                let x = self.quantile_unchecked(u);
                // Tiny draws may underflow to 0 in low precision.
                if x > T::zero() {
                    x
                } else {
                    T::min_positive_value()
                }
            })
            .collect();
        Sample::from_positive(values)
    }
}

impl Density for GompertzParams<f64> {
    fn pdf(&self, x: f64) -> f64 {
        GompertzParams::pdf(self, x)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        GompertzParams::ln_pdf(self, x)
    }

    fn cdf(&self, x: f64) -> f64 {
        GompertzParams::cdf(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn go(eta: f64, b: f64) -> GompertzParams<f64> {
        GompertzParams::new(eta, b).unwrap()
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(GompertzParams::new(0.0, 1.0).is_err());
        assert!(GompertzParams::new(1.0, -1.0).is_err());
        assert!(GompertzParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn pdf_examples() {
        assert_eq!(go(1.0, 1.0).pdf(0.0), 1.0);
        assert_eq!(go(2.0, 3.0).pdf(-0.1), 0.0);
        // Central difference of the CDF at 1.7.
        let p = go(0.5, 1.0);
        let h = 1e-5;
        let fd = (p.cdf(1.7 + h) - p.cdf(1.7 - h)) / (2.0 * h);
        assert!((p.pdf(1.7) - fd).abs() < 1e-6);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(go(3.0, 0.2).cdf(0.0), 0.0);
        assert_eq!(go(3.0, 0.2).cdf(-1.0), 0.0);
        assert!((go(1.0, 1.0).cdf(LN_2) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn cdf_matches_monte_carlo_proportion() {
        let p = go(2.0, 0.5);
        let n = 1_000_000;
        let s = p.sample(n, 2024);
        let prop = s.values().iter().filter(|&&x| x <= 4.0).count() as f64 / n as f64;
        let target = p.cdf(4.0);
        let se = (target * (1.0 - target) / n as f64).sqrt();
        assert!((prop - target).abs() < 3.0 * se, "{prop} vs {target}");
    }

    #[test]
    fn quantile_examples() {
        let p = go(1.0, 1.0);
        assert!((p.quantile(1.0 - (-1.0f64).exp()).unwrap() - LN_2).abs() < 1e-15);
        assert!(p.quantile(1e-300).unwrap() < 1e-290);
        let q = go(3.0, 2.0);
        assert!((q.cdf(q.quantile(0.7).unwrap()) - 0.7).abs() < 1e-12);
        assert!(p.quantile(0.0).is_err());
        assert!(p.quantile(1.0).is_err());
        assert!(p.quantile(f64::NAN).is_err());
    }

    #[test]
    fn sample_is_deterministic_and_scales_with_rate() {
        let a = go(1.0, 1.0).sample(1, 99);
        let b = go(1.0, 1.0).sample(1, 99);
        assert_eq!(a, b);
        let unit = go(1.0, 1.0).sample(500, 7);
        let half = go(1.0, 2.0).sample(500, 7);
        for (x, y) in unit.values().iter().zip(half.values()) {
            assert_eq!(*y, *x / 2.0);
        }
    }

    #[test]
    fn sample_edf_is_close_to_cdf() {
        let p = go(1.0, 1.0);
        let n = 100_000;
        let xs = p.sample(n, 7).sorted();
        let sup = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = p.cdf(x);
                ((i + 1) as f64 / n as f64 - f).abs().max((f - i as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.01, "sup distance {sup}");
    }

    #[test]
    fn cdf_limit_and_f32_agreement() {
        for &(eta, b) in &[(0.5, 0.5), (1.0, 1.0), (4.0, 2.0)] {
            assert!((1.0 - go(eta, b).cdf(100.0 / b)).abs() < 1e-12);
            let single = GompertzParams::new(eta as f32, b as f32).unwrap();
            assert!((single.cdf(1.0) as f64 - go(eta, b).cdf(1.0)).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_scale_family(eta in 0.05f64..8.0, b in 0.05f64..8.0, x in 0.0f64..5.0, dx in 0.0f64..1.0) {
            let p = go(eta, b);
            prop_assert!(p.cdf(x) <= p.cdf(x + dx));
            prop_assert_eq!(p.cdf(x), go(eta, 1.0).cdf(b * x));
        }

        #[test]
        fn quantile_inverts_cdf(eta in 0.05f64..8.0, b in 0.05f64..8.0, seed in any::<u64>()) {
            let p = go(eta, b);
            for &x in p.sample(20, seed).values() {
                let back = p.quantile(p.cdf(x)).unwrap();
                prop_assert!((back - x).abs() <= 1e-10 * x.max(1e-3 / b), "{} vs {}", back, x);
            }
        }

        #[test]
        fn pdf_is_derivative_of_cdf(eta in 0.1f64..5.0, b in 0.1f64..3.0, t in 0.01f64..0.99) {
            let p = go(eta, b);
            let x = p.quantile(t).unwrap();
            let h = 1e-6 / b;
            let fd = (p.cdf(x + h) - p.cdf(x - h)) / (2.0 * h);
            prop_assert!((p.pdf(x) - fd).abs() < 1e-6);
        }
    }
}
