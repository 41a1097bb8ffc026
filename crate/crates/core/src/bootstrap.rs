//! Parametric bootstrap for the composite Gompertz hypothesis.
//!
//! The data are fitted once, `B` samples of the same size are drawn from
//! GO(η̂, 1), each is refitted and rescaled by its own `b̂*`, and the
//! statistic of the data is compared with the empirical `(1 − α)`-quantile
//! of the bootstrap statistics. Replicate `j` draws from stream `j + 1` of
//! the seed, so results do not depend on scheduling or thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distributions::{GompertzParams, Sample};
use crate::edf::{ad_statistic, cm_statistic, ks_statistic, watson_statistic, EdfInput};
use crate::error::{GofError, Result};
use crate::estimation::{fit_mle_sorted, FitResult};
use crate::rng::stream;
use crate::scalar::Real;
use crate::stein::{t_statistic_quadrature, StatisticInput, WeightParam};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind<T> {
    Stein(WeightParam<T>),
    Ks,
    Ad,
    Cm,
    Wa,
}

impl<T: Real> TestKind<T> {
    pub fn stein(a: T) -> Result<Self> {
        WeightParam::new(a).map(Self::Stein)
    }

    /// Short lowercase name used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stein(_) => "stein",
            Self::Ks => "ks",
            Self::Ad => "ad",
            Self::Cm => "cm",
            Self::Wa => "wa",
        }
    }

    pub fn a(&self) -> Option<T> {
        match self {
            Self::Stein(w) => Some(w.a()),
            _ => None,
        }
    }

    fn needs_edf(&self) -> bool {
        !matches!(self, Self::Stein(_))
    }
}

impl<T: Real> fmt::Display for TestKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Stein(w) => write!(f, "stein(a={})", w.a()),
            other => f.write_str(&other.name().to_uppercase()),
        }
    }
}

impl<T: Real> FromStr for TestKind<T> {
    type Err = GofError;

    /// Accepts `ks`, `ad`, `cm`, `wa`, and `stein:<a>` / `stein(a=<a>)`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "ks" => return Ok(Self::Ks),
            "ad" => return Ok(Self::Ad),
            "cm" => return Ok(Self::Cm),
            "wa" | "watson" => return Ok(Self::Wa),
            _ => {}
        }
        let rest = lower.strip_prefix("stein").ok_or_else(|| GofError::Parse(format!("unknown test '{s}'")))?;
        let a = rest.trim_start_matches([':', '(', '=', ' ']).trim_start_matches("a=").trim_end_matches(')');
        let a: f64 = a.parse().map_err(|_| GofError::Parse(format!("test '{s}' needs a weight, e.g. stein:1")))?;
        Self::stein(T::of(a))
    }
}

/// Expands a comma list of test names, turning a bare `stein` into one test
/// per entry of `a_grid`.
pub fn expand_kinds<T: Real>(names: &str, a_grid: &[T]) -> Result<Vec<TestKind<T>>> {
    let mut kinds = Vec::new();
    for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name.eq_ignore_ascii_case("stein") {
            if a_grid.is_empty() {
                return Err(GofError::InvalidParameter("stein test requested with an empty a-grid".into()));
            }
            for &a in a_grid {
                kinds.push(TestKind::stein(a)?);
            }
        } else {
            kinds.push(name.parse()?);
        }
    }
    if kinds.is_empty() {
        return Err(GofError::InvalidParameter("no tests requested".into()));
    }
    Ok(kinds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome<T> {
    pub kind: TestKind<T>,
    pub statistic: T,
    pub p_value: f64,
    pub critical_value: T,
    pub alpha: f64,
    pub replications: usize,
    pub reject: bool,
    /// Share of bootstrap refits that ended on the fallback rate.
    pub not_found_frequency_bootstrap: f64,
    /// Replicates whose statistic could not be evaluated; counted as exceeding the data statistic.
    pub failed_replicates: usize,
    pub fit: FitResult<T>,
}

/// `inf{s : H(s) ≥ q}` for the empirical distribution `H` of `values`, i.e.
/// the `⌈q·B⌉`-th order statistic.
pub fn empirical_quantile<T: Real>(values: &[T], q: f64) -> Result<T> {
    if values.is_empty() {
        return Err(GofError::Domain("quantile of an empty set".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(GofError::Domain(format!("quantile level must lie in (0, 1], got {q}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(sorted[order_index(sorted.len(), q)])
}

/// Zero-based index of the `⌈q·B⌉`-th order statistic. Products such as
/// 0.95·500 that land a hair above an integer are not bumped up.
fn order_index(len: usize, q: f64) -> usize {
    let x = q * len as f64;
    let mut k = x.ceil();
    if k - x > 1.0 - 1e-9 * len as f64 {
        k -= 1.0;
    }
    (k as usize).clamp(1, len) - 1
}

/// Statistics of one rescaled, sorted sample for each requested test.
fn evaluate<T: Real>(sorted_y: Vec<T>, eta_hat: T, kinds: &[TestKind<T>]) -> Result<Vec<T>> {
    let edf = if kinds.iter().any(TestKind::needs_edf) {
        Some(EdfInput::from_sorted_rescaled(&sorted_y, eta_hat))
    } else {
        None
    };
    let stein = if kinds.iter().any(|k| !k.needs_edf()) { Some(StatisticInput::new(sorted_y, eta_hat)?) } else { None };
    kinds
        .iter()
        .map(|kind| {
            let edf = || edf.as_ref().expect("EDF input prepared");
            Ok(match kind {
                TestKind::Stein(w) => t_statistic_quadrature(stein.as_ref().expect("Stein input prepared"), *w),
                TestKind::Ks => ks_statistic(edf()),
                TestKind::Cm => cm_statistic(edf()),
                TestKind::Wa => watson_statistic(edf()),
                TestKind::Ad => ad_statistic(edf())?,
            })
        })
        .collect()
}

fn fit_sorted<T: Real>(sorted: &[T]) -> Result<FitResult<T>> {
    let mean = sorted.iter().copied().sum::<T>() / T::of_usize(sorted.len());
    fit_mle_sorted(sorted, mean)
}

fn rescaled<T: Real>(sorted: &[T], b_hat: T) -> Vec<T> {
    sorted.iter().map(|&x| b_hat * x).collect()
}

struct Replicate<T> {
    statistics: Option<Vec<T>>,
    fallback: bool,
}

fn replicate<T: Real>(null: &GompertzParams<T>, n: usize, seed: u64, j: usize, kinds: &[TestKind<T>]) -> Replicate<T> {
    let mut rng = stream(seed, j as u64 + 1);
    let mut xs = null.sample_with(&mut rng, n).into_values();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    match fit_sorted(&xs) {
        Ok(fit) => Replicate {
            statistics: evaluate(rescaled(&xs, fit.b_hat), fit.eta_hat, kinds).ok(),
            fallback: fit.fallback_used,
        },
        Err(_) => Replicate { statistics: None, fallback: false },
    }
}

/// Runs the bootstrap once and evaluates every test in `kinds` on the same
/// replicates.
pub fn bootstrap_tests<T: Real>(
    sample: &Sample<T>,
    kinds: &[TestKind<T>],
    replications: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<TestOutcome<T>>> {
    if replications == 0 {
        return Err(GofError::Domain("bootstrap needs at least one replication".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GofError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if kinds.is_empty() {
        return Err(GofError::InvalidParameter("no tests requested".into()));
    }
    let sorted = sample.sorted();
    let fit = fit_sorted(&sorted)?;
    let observed = evaluate(rescaled(&sorted, fit.b_hat), fit.eta_hat, kinds)?;
    let null = GompertzParams::new(fit.eta_hat, T::one())?;
    let n = sorted.len();
    let reps: Vec<Replicate<T>> =
        (0..replications).into_par_iter().map(|j| replicate(&null, n, seed, j, kinds)).collect();

    let fallback = reps.iter().filter(|r| r.fallback).count();
    let not_found = fallback as f64 / replications as f64;
    let failed = reps.iter().filter(|r| r.statistics.is_none()).count();
    let k = order_index(replications, 1.0 - alpha);
    kinds
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let statistic = observed[i];
            let mut stars: Vec<T> =
                reps.iter().map(|r| r.statistics.as_ref().map_or(T::infinity(), |s| s[i])).collect();
            stars.sort_by(|a, b| a.partial_cmp(b).expect("statistics are never NaN"));
            let critical_value = stars[k];
            let exceed = replications - stars.partition_point(|t| *t < statistic);
            Ok(TestOutcome {
                kind: *kind,
                statistic,
                p_value: exceed as f64 / replications as f64,
                critical_value,
                alpha,
                replications,
                reject: statistic > critical_value,
                not_found_frequency_bootstrap: not_found,
                failed_replicates: failed,
                fit,
            })
        })
        .collect()
}

/// Bootstrap test for a single statistic.
pub fn bootstrap_test<T: Real>(
    sample: &Sample<T>,
    kind: &TestKind<T>,
    replications: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestOutcome<T>> {
    let mut out = bootstrap_tests(sample, std::slice::from_ref(kind), replications, alpha, seed)?;
    Ok(out.remove(0))
}
