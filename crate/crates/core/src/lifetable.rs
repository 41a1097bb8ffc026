//! Life-table hazards, the implied age distribution, truncation, and
//! lifetime generation.
//!
//! A table lists one-year death probabilities `q(k)`, `k = 0..K`. The mass
//! function follows from `p(k) = S(k−1)·q(k)` with `S(k−1) = Π_{ℓ<k} (1 − q(ℓ))`,
//! normalised to sum to one.

use std::io::{Read, Write};
use std::path::Path;

use crate::distributions::Sample;
use crate::error::{GofError, Result};
use crate::rng::{open_unit, stream};
use crate::scalar::CompensatedSum;

#[derive(Debug, Clone, PartialEq)]
pub struct LifeTable {
    hazards: Vec<f64>,
}

impl LifeTable {
    pub fn new(hazards: Vec<f64>) -> Result<Self> {
        if hazards.is_empty() {
            return Err(GofError::InvalidParameter("life table has no rows".into()));
        }
        if let Some((k, q)) = hazards.iter().enumerate().find(|(_, q)| !(0.0..=1.0).contains(*q)) {
            return Err(GofError::InvalidParameter(format!("hazard at age {k} is {q}, outside [0, 1]")));
        }
        Ok(Self { hazards })
    }

    /// Reads `age,hazard` rows with consecutive ages from 0. A header line
    /// and `#` comments are allowed.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut hazards = Vec::new();
        for (line, record) in csv.records().enumerate() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() != 2 {
                return Err(GofError::Parse(format!("row {}: expected age,hazard", line + 1)));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            let (age, q) = match parsed {
                (Ok(age), Ok(q)) => (age, q),
                _ if line == 0 => continue,
                _ => return Err(GofError::Parse(format!("row {}: cannot parse '{}'", line + 1, record.as_slice()))),
            };
            if age != hazards.len() as f64 {
                return Err(GofError::Parse(format!("row {}: expected age {}, found {age}", line + 1, hazards.len())));
            }
            hazards.push(q);
        }
        Self::new(hazards)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn hazards(&self) -> &[f64] {
        &self.hazards
    }

    /// Largest age `K`.
    pub fn max_age(&self) -> usize {
        self.hazards.len() - 1
    }
}

/// Probability masses on ages `0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    masses: Vec<f64>,
}

impl Pmf {
    /// Normalises nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(GofError::InvalidParameter(format!("mass {w} is not a nonnegative number")));
        }
        let mut total = CompensatedSum::new();
        weights.iter().for_each(|&w| total.add(w));
        let total = total.value();
        if total <= 0.0 {
            return Err(GofError::Domain("masses sum to zero".into()));
        }
        Ok(Self { masses: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Writes `age,mass` rows with 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "age,mass")?;
        for (k, p) in self.masses.iter().enumerate() {
            writeln!(out, "{k},{p:.11e}")?;
        }
        Ok(())
    }
}

/// Normalised death-age distribution implied by the hazards.
pub fn hazard_to_pmf(table: &LifeTable) -> Result<Pmf> {
    let mut survival = 1.0;
    let mut raw = Vec::with_capacity(table.hazards.len());
    for &q in &table.hazards {
        raw.push(survival * q);
        survival *= 1.0 - q;
    }
    Pmf::from_weights(raw).map_err(|_| GofError::Domain("all hazards are zero; no mass to normalise".into()))
}

/// Hazards implied by a mass function, `q(k) = p(k) / Σ_{ℓ≥k} p(ℓ)`;
/// `None` where no mass remains.
pub fn recover_hazards(pmf: &Pmf) -> Vec<Option<f64>> {
    let mut tail = vec![0.0; pmf.len() + 1];
    let mut acc = CompensatedSum::new();
    for k in (0..pmf.len()).rev() {
        acc.add(pmf.masses[k]);
        tail[k] = acc.value();
    }
    pmf.masses.iter().zip(&tail).map(|(&p, &s)| (s > 0.0).then(|| (p / s).min(1.0))).collect()
}

/// Keeps ages strictly between `left` and `right` and renormalises.
/// `left = -1` means no left cut, `right = K + 1` no right cut.
pub fn truncate_pmf(pmf: &Pmf, left: i64, right: i64) -> Result<Pmf> {
    let k_max = pmf.len() as i64 - 1;
    if left < -1 || right > k_max + 1 || right - left < 2 {
        return Err(GofError::Domain(format!(
            "truncation bounds ({left}, {right}) must satisfy -1 <= L, L + 2 <= R <= {}",
            k_max + 1
        )));
    }
    let weights = pmf
        .masses
        .iter()
        .enumerate()
        .map(|(k, &p)| if (k as i64) > left && (k as i64) < right { p } else { 0.0 })
        .collect();
    Pmf::from_weights(weights)
        .map_err(|_| GofError::Domain(format!("no mass strictly between ages {left} and {right}")))
}

/// `n` independent integer ages drawn from the mass function.
pub fn sample_ages(pmf: &Pmf, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(GofError::Domain("sample size must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(pmf.len());
    let mut acc = CompensatedSum::new();
    for &p in &pmf.masses {
        acc.add(p);
        cumulative.push(acc.value());
    }
    let total = cumulative[cumulative.len() - 1];
    let last = pmf.masses.iter().rposition(|&p| p > 0.0).expect("normalised pmf has mass");
    let mut rng = stream(seed, 0);
    Ok((0..n)
        .map(|_| {
            let target = open_unit(&mut rng) * total;
            cumulative.partition_point(|&c| c < target).min(last)
        })
        .collect())
}

/// Lifetimes as reals: the sampled ages, optionally spread by `+U(0, 1)`.
/// Without jitter an age-0 draw cannot form a positive sample and is an error.
pub fn sample_lifetimes(pmf: &Pmf, n: usize, seed: u64, jitter: bool) -> Result<Sample<f64>> {
    let ages = sample_ages(pmf, n, seed)?;
    let values = if jitter {
        let mut rng = stream(seed, 1);
        ages.iter().map(|&k| k as f64 + open_unit(&mut rng)).collect()
    } else {
        ages.iter().map(|&k| k as f64).collect()
    };
    Sample::new(values).map_err(|_| {
        GofError::Domain("sampled age 0 is not a positive lifetime; truncate at L >= 0 or enable jitter".into())
    })
}
