//! Maximum-likelihood fitting of GO(η, b).
//!
//! The likelihood profiles out η: for a given rate `b` the maximiser is
//! `η(b) = 1 / (mean(e^{b·x}) − 1)`, and `b̂` solves the score equation
//!
//! ```text
//! h(b) = (mean(e^{b·x}) − 1)·(b·x̄ + 1) − b·mean(x·e^{b·x}) = 0.
//! ```
//!
//! Starting at a cumulative-hazard pilot, the solver doubles or halves `b`
//! until `h` changes sign from + to − within `b·x̄ ∈ [1e-4, 50]`, then runs
//! Newton-Raphson safeguarded by bisection inside that bracket. A fine scan
//! over the same range backs up searches cut short by overflow. Samples with
//! no positive root fall back to `b̂ = 0.001`.
//!
//! `h` depends on the data only through the products `b·x`, which makes
//! `b̂` scale equivariant and `η̂` scale invariant.

use crate::distributions::Sample;
use crate::error::{GofError, Result};
use crate::scalar::{compensated_sum, CompensatedSum, Real};

/// Rate used when the score equation has no positive root.
pub const FALLBACK_RATE: f64 = 0.001;
pub const MAX_NEWTON_ITERATIONS: usize = 100;
pub const SCORE_TOLERANCE: f64 = 1e-10;
const SCAN_POINTS: usize = 240;
const SCAN_RANGE: (f64, f64) = (1e-4, 50.0);
const PILOT_PERCENTILE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T> {
    pub eta_hat: T,
    pub b_hat: T,
    /// Pilot value of `b`, `None` when the pilot estimator failed.
    pub b_pilot: Option<T>,
    /// Newton (or scan-then-Newton) converged to a positive root of the score.
    pub converged: bool,
    /// No positive root was found and `b_hat` is the fixed fallback rate.
    pub fallback_used: bool,
    /// Score evaluations spent locating and refining the root.
    pub iterations: usize,
}

/// Observations multiplied by `b̂`, together with the fit that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSample<T> {
    values: Vec<T>,
    fit: FitResult<T>,
}

impl<T: Real> RescaledSample<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn fit(&self) -> &FitResult<T> {
        &self.fit
    }

    pub fn into_parts(self) -> (Vec<T>, FitResult<T>) {
        (self.values, self.fit)
    }
}

/// Nelson-Aalen cumulative hazard `Σ_{X(j) ≤ x} 1/(n−j+1)`.
pub fn nelson_aalen<T: Real>(sample: &Sample<T>, x: T) -> T {
    cumulative_hazard_sorted(&sample.sorted(), x)
}

fn cumulative_hazard_sorted<T: Real>(sorted: &[T], x: T) -> T {
    let n = sorted.len();
    let k = sorted.partition_point(|&v| v <= x);
    compensated_sum((0..k).map(|j| T::one() / T::of_usize(n - j)))
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
pub fn percentile_type7<T: Real>(sorted: &[T], q: f64) -> T {
    let n = sorted.len();
    assert!(n > 0, "percentile of an empty sample");
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = T::of(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Pilot rate `(2/z)·ln((Λ(z) − Λ(z/2)) / Λ(z/2))` for a cumulative hazard `Λ`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn pilot_from_cumulative_hazard<T: Real>(z: T, hazard: impl Fn(T) -> T) -> Result<T> {
    if !(z > T::zero()) {
        return Err(GofError::PilotFailed(format!("reference point must be positive, got {z}")));
    }
    let full = hazard(z);
    let half = hazard(z / T::of(2.0));
    let ratio = (full - half) / half;
    if !(half > T::zero()) || !(ratio > T::zero()) || !ratio.is_finite() {
        return Err(GofError::PilotFailed(format!(
            "cumulative hazard ratio is not positive (Λ(z) = {full}, Λ(z/2) = {half})"
        )));
    }
    Ok(T::of(2.0) / z * ratio.ln())
}

/// Cumulative-hazard pilot for `b` using the empirical 90th percentile.
pub fn pilot_scale<T: Real>(sample: &Sample<T>) -> Result<T> {
    pilot_sorted(&sample.sorted())
}

fn pilot_sorted<T: Real>(sorted: &[T]) -> Result<T> {
    if sorted.len() < 5 {
        return Err(GofError::Domain(format!("pilot estimator needs n >= 5, got {}", sorted.len())));
    }
    let z = percentile_type7(sorted, PILOT_PERCENTILE);
    pilot_from_cumulative_hazard(z, |x| cumulative_hazard_sorted(sorted, x))
}

/// Sample means of `e^{bx} − 1`, `x·e^{bx}` and `x²·e^{bx}`.
struct ExpMoments<T> {
    excess: T,
    first: T,
    second: T,
}

fn exp_moments<T: Real>(b: T, xs: &[T]) -> Result<ExpMoments<T>> {
    let mut excess = CompensatedSum::new();
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    for &x in xs {
        let em1 = (b * x).exp_m1();
        let e = em1 + T::one();
        excess.add(em1);
        first.add(x * e);
        second.add(x * x * e);
    }
    let n = T::of_usize(xs.len());
    let m = ExpMoments { excess: excess.value() / n, first: first.value() / n, second: second.value() / n };
    if !(m.excess.is_finite() && m.first.is_finite() && m.second.is_finite()) {
        return Err(GofError::Overflow(format!("e^(b x) overflows at b = {b}")));
    }
    Ok(m)
}

/// Score and its derivative in `b`, plus the magnitude of the score's terms.
fn score_parts<T: Real>(b: T, xs: &[T], mean: T) -> Result<(T, T, T)> {
    let m = exp_moments(b, xs)?;
    let lead = m.excess * (b * mean + T::one());
    let h = lead - b * m.first;
    let dh = m.first * b * mean + m.excess * mean - b * m.second;
    let scale = lead.abs().max((b * m.first).abs());
    Ok((h, dh, scale))
}

/// Score function `h(b)` whose positive root is the MLE of the rate.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn score_h<T: Real>(b: T, sample: &Sample<T>) -> Result<T> {
    if !(b > T::zero()) {
        return Err(GofError::Domain(format!("score needs b > 0, got {b}")));
    }
    score_parts(b, sample.values(), sample.mean()).map(|(h, _, _)| h)
}

fn score_tolerance<T: Real>(scale: T) -> T {
    T::of(SCORE_TOLERANCE).max(T::of(64.0) * T::epsilon() * scale)
}

struct NewtonRun<T> {
    root: Option<T>,
    iterations: usize,
}

enum Bracket<T> {
    /// `h(lo) > 0 >= h(hi)`.
    Found(T, T),
    NoRoot,
    /// The search overflowed before a sign change was seen.
    Inconclusive,
}

/// Walks geometrically from `start` until `h` changes sign from + to −,
/// staying inside the scan range `b·x̄ ∈ [1e-4, 50]`.
fn bracket_root<T: Real>(xs: &[T], mean: T, start: T, evaluations: &mut usize) -> Bracket<T> {
    let floor = T::of(SCAN_RANGE.0) / mean;
    let ceiling = T::of(SCAN_RANGE.1) / mean;
    let two = T::of(2.0);
    let mut b = start.max(floor).min(ceiling);
    *evaluations += 1;
    let Ok((h, _, _)) = score_parts(b, xs, mean) else { return Bracket::Inconclusive };
    if h > T::zero() {
        loop {
            if b >= ceiling {
                return Bracket::NoRoot;
            }
            let next = (b * two).min(ceiling);
            *evaluations += 1;
            match score_parts(next, xs, mean) {
                Ok((h, _, _)) if h > T::zero() => b = next,
                Ok(_) => return Bracket::Found(b, next),
                Err(_) => return Bracket::Inconclusive,
            }
        }
    }
    loop {
        // h ~ c·b² near 0: a negative score all the way down means no positive root.
        if b <= floor {
            return Bracket::NoRoot;
        }
        let next = (b / two).max(floor);
        *evaluations += 1;
        match score_parts(next, xs, mean) {
            Ok((h, _, _)) if h > T::zero() => return Bracket::Found(next, b),
            Ok(_) => b = next,
            Err(_) => return Bracket::Inconclusive,
        }
    }
}

/// Newton-Raphson safeguarded by bisection inside a sign-change bracket.
/// Converged means a small score and a relative step at round-off level.
fn bracketed_newton<T: Real>(xs: &[T], mean: T, mut lo: T, mut hi: T, start: T) -> NewtonRun<T> {
    let rel_step = T::of(1e-12).max(T::of(8.0) * T::epsilon());
    let two = T::of(2.0);
    let mut b = if start > lo && start < hi { start } else { (lo + hi) / two };
    let mut moved = T::infinity();
    for iteration in 1..=MAX_NEWTON_ITERATIONS {
        let Ok((h, dh, scale)) = score_parts(b, xs, mean) else {
            hi = b;
            b = (lo + hi) / two;
            continue;
        };
        if h == T::zero() || (h.abs() <= score_tolerance(scale) && moved <= rel_step * b) {
            return NewtonRun { root: Some(b), iterations: iteration };
        }
        if h > T::zero() {
            lo = b;
        } else {
            hi = b;
        }
        if hi - lo <= rel_step * hi {
            return NewtonRun { root: Some((lo + hi) / two), iterations: iteration };
        }
        let newton = if dh.is_finite() && dh < T::zero() { b - h / dh } else { T::nan() };
        let next = if newton > lo && newton < hi { newton } else { (lo + hi) / two };
        moved = (next - b).abs();
        b = next;
    }
    NewtonRun { root: None, iterations: MAX_NEWTON_ITERATIONS }
}

/// Scan `b·x̄` on a log grid for a downward sign change of `h`, then solve
/// inside the first bracket found.
fn scan_for_root<T: Real>(xs: &[T], mean: T) -> Option<NewtonRun<T>> {
    let (lo, hi) = SCAN_RANGE;
    let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let mut previous: Option<(T, T)> = None;
    for i in 0..SCAN_POINTS {
        let b = T::of(lo * ratio.powi(i as i32)) / mean;
        let Ok((h, _, _)) = score_parts(b, xs, mean) else { break };
        if let Some((b_prev, h_prev)) = previous {
            if h_prev > T::zero() && h <= T::zero() {
                return Some(bracketed_newton(xs, mean, b_prev, b, b));
            }
        }
        previous = Some((b, h));
    }
    None
}

/// Shape estimate `1 / (mean(e^{b̂x}) − 1)` for a given rate.
pub fn eta_for_rate<T: Real>(b: T, xs: &[T]) -> Result<T> {
    let excess = compensated_sum(xs.iter().map(|&x| (b * x).exp_m1())) / T::of_usize(xs.len());
    let eta = T::one() / excess;
    if !(eta.is_finite() && eta > T::zero()) {
        return Err(GofError::Overflow(format!("shape estimate is {eta} at b = {b}")));
    }
    Ok(eta)
}

/// Maximum-likelihood estimates of (η, b).
pub fn fit_mle<T: Real>(sample: &Sample<T>) -> Result<FitResult<T>> {
    fit_mle_sorted(&sample.sorted(), sample.mean())
}

pub(crate) fn fit_mle_sorted<T: Real>(sorted: &[T], mean: T) -> Result<FitResult<T>> {
    let n = sorted.len();
    if n < 2 {
        return Err(GofError::DegenerateSample(format!("at least 2 observations required, got {n}")));
    }
    if sorted[0] == sorted[n - 1] {
        return Err(GofError::DegenerateSample("all observations are identical".into()));
    }
    let pilot = pilot_sorted(sorted).ok();
    let start = pilot.filter(|p| *p > T::zero()).unwrap_or(T::one() / mean);
    let mut iterations = 0;
    let root = match bracket_root(sorted, mean, start, &mut iterations) {
        Bracket::Found(lo, hi) => {
            let run = bracketed_newton(sorted, mean, lo, hi, start);
            iterations += run.iterations;
            run.root
        }
        Bracket::NoRoot => None,
        Bracket::Inconclusive => scan_for_root(sorted, mean).and_then(|run| {
            iterations += run.iterations;
            run.root
        }),
    };
    let (b_hat, converged, fallback_used) = match root {
        Some(b) => (b, true, false),
        None => (T::of(FALLBACK_RATE), false, true),
    };
    let eta_hat = eta_for_rate(b_hat, sorted)?;
    Ok(FitResult { eta_hat, b_hat, b_pilot: pilot, converged, fallback_used, iterations })
}

/// `Y_j = b̂·X_j`, in the original order.
pub fn rescale<T: Real>(sample: &Sample<T>, fit: &FitResult<T>) -> RescaledSample<T> {
    RescaledSample { values: sample.values().iter().map(|&x| fit.b_hat * x).collect(), fit: *fit }
}
