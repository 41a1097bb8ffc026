//! The characterisation-based weighted L² statistic.
//!
//! For rescaled data `Y_j = b̂·X_j` and shape estimate `η̂`,
//!
//! ```text
//! V_n(s) = (1/n)·Σ_j (η̂·e^{Y_j} − 1)·min(Y_j, s) − (1/n)·#{Y_j ≤ s},
//! T_n    = n·∫_0^∞ V_n(s)²·e^{−a·s} ds.
//! ```
//!
//! `V_n` is affine between consecutive order statistics, so `T_n` is a sum
//! of closed-form pieces ([`t_statistic_quadrature`]). [`t_statistic_closed_form`]
//! evaluates the equivalent pairwise double sum in linear time via prefix sums.

use crate::distributions::{Density, GompertzParams};
use crate::error::{GofError, Result};
use crate::estimation::RescaledSample;
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::scalar::{CompensatedSum, Real};

/// Rescaled values above this overflow `e^{Y}` in `f64`.
pub const MAX_RESCALED: f64 = 700.0;

/// Tuning parameter `a` of the weight `e^{−a·s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParam<T>(T);

impl<T: Real> WeightParam<T> {
    pub fn new(a: T) -> Result<Self> {
        if a.is_finite() && a > T::zero() {
            Ok(Self(a))
        } else {
            Err(GofError::InvalidParameter(format!("weight parameter must be positive, got {a}")))
        }
    }

    pub fn a(&self) -> T {
        self.0
    }
}

/// Sorted rescaled observations with the shape estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticInput<T> {
    sorted: Vec<T>,
    eta_hat: T,
}

impl<T: Real> StatisticInput<T> {
    pub fn new(mut values: Vec<T>, eta_hat: T) -> Result<Self> {
        if values.is_empty() {
            return Err(GofError::Domain("statistic needs at least one observation".into()));
        }
        if !(eta_hat.is_finite() && eta_hat > T::zero()) {
            return Err(GofError::InvalidParameter(format!("shape estimate must be positive, got {eta_hat}")));
        }
        if let Some(y) = values.iter().find(|y| !(y.is_finite() && **y > T::zero())) {
            return Err(GofError::Domain(format!("rescaled observations must be positive, got {y}")));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let largest = values[values.len() - 1];
        if largest > T::of(MAX_RESCALED) || !(eta_hat * largest.exp()).is_finite() {
            return Err(GofError::Overflow(format!("rescaled observation {largest} overflows e^Y")));
        }
        Ok(Self { sorted: values, eta_hat })
    }

    pub fn from_rescaled(rescaled: &RescaledSample<T>) -> Result<Self> {
        Self::new(rescaled.values().to_vec(), rescaled.fit().eta_hat)
    }

    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }

    pub fn eta_hat(&self) -> T {
        self.eta_hat
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    fn weights(&self) -> impl Iterator<Item = T> + '_ {
        self.sorted.iter().map(move |&y| self.eta_hat * y.exp() - T::one())
    }
}

/// Empirical process `V_n(s)` for `s > 0`.
pub fn v_process<T: Real>(input: &StatisticInput<T>, s: T) -> T {
    let mut acc = CompensatedSum::new();
    for (&y, g) in input.sorted.iter().zip(input.weights()) {
        acc.add(g * y.min(s));
        if y <= s {
            acc.add(-T::one());
        }
    }
    acc.value() / T::of_usize(input.len())
}

/// `∫_lo^{lo+width} (c + β(s − lo))² e^{−a s} ds` divided by `e^{−a·lo}`.
#[inline]
fn affine_square_piece<T: Real>(c: T, slope: T, a: T, width: T) -> T {
    let two = T::of(2.0);
    let p0 = c * c / a + two * slope * c / (a * a) + two * slope * slope / (a * a * a);
    if width.is_infinite() {
        return p0;
    }
    let grow = (two * c * slope * width + slope * slope * width * width) / a + two * slope * slope * width / (a * a);
    -(-a * width).exp_m1() * p0 - (-a * width).exp() * grow
}

/// `T_n` as the exact sum of the piecewise integrals between order statistics.
pub fn t_statistic_quadrature<T: Real>(input: &StatisticInput<T>, w: WeightParam<T>) -> T {
    let a = w.a();
    let n = input.len();
    let nt = T::of_usize(n);
    let g: Vec<T> = input.weights().collect();
    // tail[k] = Σ_{j ≥ k} G_j (0-based), the slope of V on the k-th interval times n.
    let mut tail = vec![T::zero(); n + 1];
    let mut acc = CompensatedSum::new();
    for k in (0..n).rev() {
        acc.add(g[k]);
        tail[k] = acc.value();
    }
    let mut head = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    let mut lo = T::zero();
    for k in 0..=n {
        let hi = if k < n { input.sorted[k] } else { T::infinity() };
        // On [Y_(k), Y_(k+1)): n·V(s) = Σ_{j≤k} G_j Y_j − k + s·Σ_{j>k} G_j.
        let slope = tail[k] / nt;
        let level = (head.value() - T::of_usize(k)) / nt + slope * lo;
        if hi > lo {
            total.add((-a * lo).exp() * affine_square_piece(level, slope, a, hi - lo));
        }
        if k < n {
            head.add(g[k] * input.sorted[k]);
            lo = hi;
        }
    }
    nt * total.value()
}

/// `T_n` from the integration-free pairwise representation.
///
/// With order statistics `Y_(j)`, `G_j = η̂·e^{Y_(j)} − 1` and `E_j = e^{−a·Y_(j)}`:
///
/// ```text
/// T_n = (2/n)·Σ_{1≤i<j≤n} [ G_j/a³·E_i·(−a·G_i·Y_i − 2G_i − a²·Y_i − a)
///                          + 1/a²·E_j·(−G_i·G_j·Y_i − a·G_i·Y_i + G_j + a)
///                          + 2·G_i·G_j/a³ ]
///     + (1/n)·Σ_j 1/a³·[ E_j·(−2a·G_j²·Y_j − 2G_j² − 2a²·G_j·Y_j + a²) + 2G_j² ]
/// ```
///
/// The inner sums over `i < j` factor into running prefix sums.
pub fn t_statistic_closed_form<T: Real>(input: &StatisticInput<T>, w: WeightParam<T>) -> T {
    let a = w.a();
    let (a2, a3) = (a * a, a * a * a);
    let two = T::of(2.0);
    let mut cross = CompensatedSum::new();
    let mut diag = CompensatedSum::new();
    // Prefix sums over i < j.
    let mut pre_e = CompensatedSum::new(); // Σ E_i(−aG_iY_i − 2G_i − a²Y_i − a)
    let mut pre_gy = CompensatedSum::new(); // Σ G_i Y_i
    let mut pre_g = CompensatedSum::new(); // Σ G_i
    for (j, (&y, g)) in input.sorted.iter().zip(input.weights()).enumerate() {
        let e = (-a * y).exp();
        let before = T::of_usize(j);
        cross.add(g / a3 * pre_e.value());
        cross.add(e / a2 * (before * (g + a) - (g + a) * pre_gy.value()));
        cross.add(two * g / a3 * pre_g.value());
        diag.add((e * (-two * a * g * g * y - two * g * g - two * a2 * g * y + a2) + two * g * g) / a3);
        pre_e.add(e * (-a * g * y - two * g - a2 * y - a));
        pre_gy.add(g * y);
        pre_g.add(g);
    }
    let n = T::of_usize(input.len());
    (two * cross.value() + diag.value()) / n
}

/// Plug-in estimate `T_n / n` of the limit of the normalised statistic.
pub fn delta_estimate<T: Real>(input: &StatisticInput<T>, w: WeightParam<T>) -> T {
    t_statistic_quadrature(input, w) / T::of_usize(input.len())
}

/// Stein transform `E[(η·b·e^{bX} − b)·min(X, s)]` of a law, for `s > 0`.
///
/// Equals the CDF of X at every `s` exactly when X is GO(η, b). Errors with
/// [`GofError::MomentCondition`] when the expectation does not converge.
pub fn stein_transform<D: Density + ?Sized>(density: &D, params: &GompertzParams<f64>, s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(GofError::Domain("transform argument is NaN".into()));
    }
    if s <= 0.0 {
        return Ok(0.0);
    }
    let (eta, b) = (params.eta(), params.b());
    // (ηb·e^{bx} − b)·f(x), with the exponential folded into the log-density.
    let tilted = |x: f64| {
        let ln_f = density.ln_pdf(x);
        if ln_f == f64::NEG_INFINITY {
            return 0.0;
        }
        b * (eta * (b * x + ln_f).exp() - ln_f.exp())
    };
    let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 4000 };
    let upper = density.upper_bound();
    let inner_end = s.min(upper);
    let inner = integrate(|x| tilted(x) * x, 0.0, inner_end, tol)?.value;
    let outer = if s >= upper {
        0.0
    } else if upper.is_finite() {
        integrate(tilted, s, upper, tol)?.value
    } else {
        integrate_to_infinity(tilted, s, tol)?.value
    };
    let value = inner + s * outer;
    if !value.is_finite() {
        return Err(GofError::MomentCondition(format!("transform is not finite at s = {s}")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::AlternativeSpec;
    use crate::estimation::{fit_mle, rescale};
    use crate::Sample;
    use proptest::prelude::*;

    fn input(ys: &[f64], eta: f64) -> StatisticInput<f64> {
        StatisticInput::new(ys.to_vec(), eta).unwrap()
    }

    fn w(a: f64) -> WeightParam<f64> {
        WeightParam::new(a).unwrap()
    }

    /// Adaptive numerical integration of n·V²·e^{−as} between breakpoints.
    fn numeric_oracle(inp: &StatisticInput<f64>, a: f64) -> f64 {
        let tol = Tolerance { abs: 1e-14, rel: 1e-13, max_intervals: 4000 };
        let f = |s: f64| v_process(inp, s).powi(2) * (-a * s).exp();
        let mut edges = vec![0.0];
        edges.extend_from_slice(inp.sorted());
        let mut total = 0.0;
        for pair in edges.windows(2) {
            total += integrate(f, pair[0], pair[1], tol).unwrap().value;
        }
        total += integrate_to_infinity(f, *edges.last().unwrap(), tol).unwrap().value;
        inp.len() as f64 * total
    }

    #[test]
    fn weight_must_be_positive() {
        assert!(WeightParam::new(0.0).is_err());
        assert!(WeightParam::new(-1.0).is_err());
        assert!(WeightParam::new(f64::INFINITY).is_err());
    }

    #[test]
    fn input_validation() {
        assert!(StatisticInput::new(vec![1.0], 0.0).is_err());
        assert!(StatisticInput::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(StatisticInput::<f64>::new(vec![], 1.0).is_err());
        assert!(matches!(StatisticInput::new(vec![701.0], 1.0), Err(GofError::Overflow(_))));
    }

    #[test]
    fn v_process_examples() {
        let one = input(&[1.0], (-1.0f64).exp());
        assert!((v_process(&one, 2.0) + 1.0).abs() < 1e-15);
        let inp = input(&[0.4, 1.3, 2.2], 0.8);
        assert!(v_process(&inp, 1e-12).abs() < 1e-11);
        let tail: f64 = inp.sorted().iter().map(|&y| (0.8 * y.exp() - 1.0) * y).sum::<f64>() / 3.0 - 1.0;
        assert!((v_process(&inp, 2.5) - tail).abs() < 1e-14);
        assert!((v_process(&inp, 40.0) - tail).abs() < 1e-14);
    }

    #[test]
    fn v_process_jumps_by_one_over_n() {
        let inp = input(&[0.4, 1.3, 2.2, 3.0], 0.8);
        for &y in inp.sorted() {
            let left = v_process(&inp, y * (1.0 - 1e-12));
            assert!((v_process(&inp, y) - left + 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn single_observation_matches_hand_integration() {
        for &(y, eta, a) in &[(0.7, 1.3, 1.0), (2.0, 0.2, 0.25), (0.05, 4.0, 10.0)] {
            let g: f64 = eta * f64::exp(y) - 1.0;
            let e = (-a * y).exp();
            let head = g * g * (2.0 / a.powi(3) - e * (y * y / a + 2.0 * y / (a * a) + 2.0 / a.powi(3)));
            let tail = (g * y - 1.0).powi(2) * e / a;
            let expected = head + tail;
            let inp = input(&[y], eta);
            assert!((t_statistic_quadrature(&inp, w(a)) - expected).abs() <= 1e-12 * expected);
            assert!((t_statistic_closed_form(&inp, w(a)) - expected).abs() <= 1e-10 * expected);
            assert!((numeric_oracle(&inp, a) - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn piecewise_integral_matches_numeric_quadrature() {
        for (seed, &(n, a)) in [(5, 0.25), (20, 1.0), (50, 5.0), (2, 10.0)].iter().enumerate() {
            let eta = 0.5 + seed as f64;
            let ys = GompertzParams::<f64>::new(eta, 1.0).unwrap().sample(n, seed as u64);
            let inp = input(ys.values(), eta);
            let exact = t_statistic_quadrature(&inp, w(a));
            let numeric = numeric_oracle(&inp, a);
            assert!((exact - numeric).abs() <= 1e-10 * exact.max(1e-3), "{exact} vs {numeric}");
        }
    }

    #[test]
    fn closed_form_matches_piecewise_on_gompertz_samples() {
        for &n in &[2usize, 5, 20, 50] {
            for &a in &[0.25, 1.0, 5.0] {
                let ys = GompertzParams::<f64>::new(1.0, 1.0).unwrap().sample(n, 31 * n as u64);
                let fit = fit_mle(&ys).unwrap();
                let inp = StatisticInput::from_rescaled(&rescale(&ys, &fit)).unwrap();
                let (c, q) = (t_statistic_closed_form(&inp, w(a)), t_statistic_quadrature(&inp, w(a)));
                assert!((c - q).abs() <= 1e-8 * q, "n={n} a={a}: {c} vs {q}");
            }
        }
    }

    #[test]
    fn delta_is_statistic_over_n() {
        let inp = input(&[0.3, 0.9, 1.4, 2.0], 0.6);
        assert_eq!(delta_estimate(&inp, w(1.5)), t_statistic_quadrature(&inp, w(1.5)) / 4.0);
    }

    #[test]
    fn f32_statistic_tracks_f64() {
        let ys = [0.31, 0.77, 1.2, 1.9, 0.05];
        let a = t_statistic_quadrature(&input(&ys, 0.9), w(1.0));
        let ys32: Vec<f32> = ys.iter().map(|&y| y as f32).collect();
        let b = t_statistic_quadrature(&StatisticInput::new(ys32, 0.9f32).unwrap(), WeightParam::new(1.0f32).unwrap());
        assert!((a - b as f64).abs() < 1e-4 * a);
    }

    #[test]
    fn transform_of_matching_gompertz_is_its_cdf() {
        let p = GompertzParams::<f64>::new(2.0, 0.5).unwrap();
        assert_eq!(stein_transform(&p, &p, -1.0).unwrap(), 0.0);
        assert_eq!(stein_transform(&p, &p, 0.0).unwrap(), 0.0);
        for k in 1..=50 {
            let s = k as f64 * 0.1;
            let t = stein_transform(&p, &p, s).unwrap();
            assert!((t - p.cdf(s)).abs() < 1e-6, "s={s}: {t}");
        }
    }

    #[test]
    fn transform_of_bounded_support() {
        let uni = AlternativeSpec::Uniform { upper: 1.0 };
        let p = GompertzParams::<f64>::new(1.0, 0.5).unwrap();
        // Beyond the support, min(X, s) = X and the transform is constant.
        let a = stein_transform(&uni, &p, 1.5).unwrap();
        let b = stein_transform(&uni, &p, 3.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn divergent_transform_is_reported() {
        // E[e^X] is infinite for Exp(1).
        let exp = AlternativeSpec::Gamma { shape: 1.0 };
        let p = GompertzParams::<f64>::new(1.0, 1.0).unwrap();
        assert!(matches!(stein_transform(&exp, &p, 1.0), Err(GofError::MomentCondition(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn closed_form_equals_piecewise(n in 1usize..=50, a in 0.1f64..10.0, eta in 0.1f64..5.0, seed in any::<u64>()) {
            let ys = GompertzParams::<f64>::new(eta, 1.0).unwrap().sample(n, seed);
            let inp = input(ys.values(), eta);
            let q = t_statistic_quadrature(&inp, w(a));
            let c = t_statistic_closed_form(&inp, w(a));
            prop_assert!(q >= 0.0);
            prop_assert!((c - q).abs() <= 1e-8 * q, "{} vs {}", c, q);
        }

        #[test]
        fn statistic_is_scale_invariant(eta in 0.3f64..3.0, seed in any::<u64>(), beta in 0.05f64..20.0, a in 0.1f64..10.0) {
            let xs = GompertzParams::<f64>::new(eta, 1.0).unwrap().sample(40, seed);
            let base = fit_mle(&xs).unwrap();
            prop_assume!(!base.fallback_used);
            let scaled = Sample::new(xs.values().iter().map(|&x| x * beta).collect()).unwrap();
            let fit = fit_mle(&scaled).unwrap();
            let t0 = t_statistic_closed_form(&StatisticInput::from_rescaled(&rescale(&xs, &base)).unwrap(), w(a));
            let t1 = t_statistic_closed_form(&StatisticInput::from_rescaled(&rescale(&scaled, &fit)).unwrap(), w(a));
            prop_assert!((t0 - t1).abs() <= 1e-8 * t0.max(1e-12));
        }
    }
}
