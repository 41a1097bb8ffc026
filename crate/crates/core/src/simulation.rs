//! Monte-Carlo size and power studies.
//!
//! A study is a grid of cells `(scenario, n)`. Each cell simulates `M`
//! datasets and runs one shared bootstrap per dataset for all requested
//! tests. Dataset `m` of a cell uses the seed
//! `derive_seed(derive_seed(master, label_hash(cell label)), m)`: its data
//! come from stream 0 and its bootstrap replicates from the later streams,
//! so a cell's results do not depend on which other cells run or in what
//! order.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bootstrap::{bootstrap_tests, expand_kinds, TestKind};
use crate::distributions::AlternativeSpec;
use crate::error::{GofError, Result};
use crate::rng::{derive_seed, label_hash};

pub const PAPER_A_GRID: [f64; 10] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0];
pub const DESK_REPLICATIONS: usize = 1000;
pub const DESK_BOOTSTRAP: usize = 500;
pub const FULL_REPLICATIONS: usize = 10_000;
pub const FULL_BOOTSTRAP: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub scenarios: Vec<AlternativeSpec>,
    pub sample_sizes: Vec<usize>,
    pub kinds: Vec<TestKind<f64>>,
    pub alpha: f64,
    pub replications: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![AlternativeSpec::Gompertz { eta: 1.0, b: 1.0 }],
            sample_sizes: vec![50, 100],
            kinds: expand_kinds("stein,ad,ks,cm,wa", &PAPER_A_GRID).expect("static test list"),
            alpha: 0.05,
            replications: DESK_REPLICATIONS,
            bootstrap: DESK_BOOTSTRAP,
            seed: 1,
        }
    }
}

impl SimulationConfig {
    /// Every scenario and sample size of the published tables.
    pub fn paper_grid() -> Self {
        let labels = [
            "GO(0.5,1)",
            "GO(1,1)",
            "GO(2,1)",
            "GO(4,1)",
            "LN(0.5)",
            "LN(1)",
            "Gamma(1)",
            "Gamma(2)",
            "Gamma(3)",
            "IG(1,1)",
            "IG(1,3)",
            "W(0.5)",
            "W(3)",
            "U(0,5)",
            "Pow(1)",
            "Pow(2)",
            "Pow(4)",
            "SP(3)",
            "SP(5)",
            "SP(10)",
            "LF(3)",
            "LF(5)",
            "LF(10)",
            "Mix(0.1)",
            "Mix(0.25)",
            "Mix(0.5)",
            "Mix(0.75)",
        ];
        Self {
            scenarios: labels.iter().map(|l| l.parse().expect("static scenario")).collect(),
            sample_sizes: vec![20, 50, 100],
            ..Self::default()
        }
    }

    /// Switches to the published replication counts.
    pub fn full_scale(mut self) -> Self {
        self.replications = FULL_REPLICATIONS;
        self.bootstrap = FULL_BOOTSTRAP;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.sample_sizes.is_empty() || self.kinds.is_empty() {
            return Err(GofError::InvalidParameter("study needs scenarios, sample sizes and tests".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(GofError::InvalidParameter(format!("sample size {n} is below 2")));
        }
        if self.replications == 0 || self.bootstrap == 0 {
            return Err(GofError::InvalidParameter("replications and bootstrap size must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(GofError::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        self.scenarios.iter().try_for_each(AlternativeSpec::validate)
    }
}

impl FromStr for SimulationConfig {
    type Err = GofError;

    /// Flat `key = value` lines; `#` starts a comment. Keys: `scenarios`
    /// (separated by `;`), `n`, `a`, `tests`, `alpha`, `replications`,
    /// `bootstrap`, `seed`, `full_scale`, `grid = paper`.
    fn from_str(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut a_grid = PAPER_A_GRID.to_vec();
        let mut tests = "stein,ad,ks,cm,wa".to_string();
        let (mut replications, mut bootstrap, mut full) = (None, None, false);
        let mut scenarios = None;
        let mut sizes = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GofError::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            let bad = |what: &str| GofError::Parse(format!("line {}: invalid {what} '{value}'", lineno + 1));
            match key.as_str() {
                "grid" if value.eq_ignore_ascii_case("paper") => {
                    let paper = Self::paper_grid();
                    scenarios.get_or_insert(paper.scenarios);
                    sizes.get_or_insert(paper.sample_sizes);
                }
                "scenarios" | "scenario" => {
                    scenarios = Some(
                        value
                            .split(';')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(str::parse)
                            .collect::<Result<_>>()?,
                    )
                }
                "n" | "sample_sizes" => sizes = Some(parse_list(value).map_err(|_| bad("sample sizes"))?),
                "a" => a_grid = parse_list(value).map_err(|_| bad("a-grid"))?,
                "tests" | "test" => tests = value.to_string(),
                "alpha" => config.alpha = value.parse().map_err(|_| bad("alpha"))?,
                "replications" | "m" => replications = Some(value.parse().map_err(|_| bad("replications"))?),
                "bootstrap" | "b" => bootstrap = Some(value.parse().map_err(|_| bad("bootstrap size"))?),
                "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
                "full_scale" => full = value.parse().map_err(|_| bad("flag"))?,
                _ => return Err(GofError::Parse(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        if let Some(s) = scenarios {
            config.scenarios = s;
        }
        if let Some(n) = sizes {
            config.sample_sizes = n;
        }
        config.kinds = expand_kinds(&tests, &a_grid)?;
        if full {
            config = config.full_scale();
        }
        config.replications = replications.unwrap_or(config.replications);
        config.bootstrap = bootstrap.unwrap_or(config.bootstrap);
        config.validate()?;
        Ok(config)
    }
}

fn parse_list<V: FromStr>(value: &str) -> std::result::Result<Vec<V>, V::Err> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

/// One line of the report: a test in a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub n: usize,
    pub test: String,
    pub a: Option<f64>,
    pub rejection_rate: f64,
    /// Share of datasets whose own fit used the fallback rate.
    pub notfound_fit: f64,
    /// Share of bootstrap refits that used the fallback rate, over all datasets.
    pub notfound_boot: f64,
    /// Datasets on which the test could not be run; they count as non-rejections.
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationReport {
    pub rows: Vec<ReportRow>,
    pub replications: usize,
    pub bootstrap: usize,
    pub elapsed: Duration,
}

/// Progress of a finished cell, passed to the callback of [`run_study_with_progress`].
#[derive(Debug, Clone)]
pub struct CellProgress<'a> {
    pub index: usize,
    pub total: usize,
    pub scenario: &'a AlternativeSpec,
    pub n: usize,
    pub elapsed: Duration,
}

pub fn cell_label(scenario: &AlternativeSpec, n: usize) -> String {
    format!("{scenario}|n={n}")
}

struct Dataset {
    rejects: Option<Vec<bool>>,
    fit_fallback: bool,
    boot_fallback: f64,
}

fn run_dataset(config: &SimulationConfig, scenario: &AlternativeSpec, n: usize, seed: u64) -> Dataset {
    let outcomes = scenario
        .sample(n, seed)
        .and_then(|sample| bootstrap_tests(&sample, &config.kinds, config.bootstrap, config.alpha, seed));
    match outcomes {
        Ok(outs) => Dataset {
            fit_fallback: outs[0].fit.fallback_used,
            boot_fallback: outs[0].not_found_frequency_bootstrap,
            rejects: Some(outs.iter().map(|o| o.reject).collect()),
        },
        Err(_) => Dataset { rejects: None, fit_fallback: false, boot_fallback: 0.0 },
    }
}

/// Rows for one cell.
pub fn run_cell(config: &SimulationConfig, scenario: &AlternativeSpec, n: usize) -> Vec<ReportRow> {
    let cell_seed = derive_seed(config.seed, label_hash(&cell_label(scenario, n)));
    let datasets: Vec<Dataset> = (0..config.replications)
        .into_par_iter()
        .map(|m| run_dataset(config, scenario, n, derive_seed(cell_seed, m as u64)))
        .collect();
    let m = config.replications as f64;
    let errors = datasets.iter().filter(|d| d.rejects.is_none()).count();
    let notfound_fit = datasets.iter().filter(|d| d.fit_fallback).count() as f64 / m;
    let notfound_boot = datasets.iter().map(|d| d.boot_fallback).sum::<f64>() / m;
    config
        .kinds
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let rejections = datasets.iter().filter(|d| d.rejects.as_ref().is_some_and(|r| r[i])).count();
            ReportRow {
                scenario: scenario.to_string(),
                n,
                test: kind.name().to_string(),
                a: kind.a(),
                rejection_rate: rejections as f64 / m,
                notfound_fit,
                notfound_boot,
                errors,
            }
        })
        .collect()
}

pub fn run_study(config: &SimulationConfig) -> Result<SimulationReport> {
    run_study_with_progress(config, |_| {})
}

pub fn run_study_with_progress(
    config: &SimulationConfig,
    mut progress: impl FnMut(&CellProgress<'_>),
) -> Result<SimulationReport> {
    config.validate()?;
    let start = Instant::now();
    let total = config.scenarios.len() * config.sample_sizes.len();
    let mut rows = Vec::new();
    let mut index = 0;
    for scenario in &config.scenarios {
        for &n in &config.sample_sizes {
            rows.extend(run_cell(config, scenario, n));
            index += 1;
            progress(&CellProgress { index, total, scenario, n, elapsed: start.elapsed() });
        }
    }
    Ok(SimulationReport {
        rows,
        replications: config.replications,
        bootstrap: config.bootstrap,
        elapsed: start.elapsed(),
    })
}

pub const REPORT_HEADER: &str = "scenario,n,test,a,rejection_rate,notfound_fit,notfound_boot";

/// One CSV row per (scenario, n, test), rates with 4 decimals.
pub fn report_to_csv(report: &SimulationReport) -> String {
    let mut out = String::new();
    writeln!(out, "{REPORT_HEADER}").expect("writing to a String");
    for row in &report.rows {
        let a = row.a.map_or_else(|| "NA".to_string(), |a| a.to_string());
        writeln!(
            out,
            "\"{}\",{},{},{},{:.4},{:.4},{:.4}",
            row.scenario.replace('"', "\"\""),
            row.n,
            row.test,
            a,
            row.rejection_rate,
            row.notfound_fit,
            row.notfound_boot
        )
        .expect("writing to a String");
    }
    out
}

/// Parses the output of [`report_to_csv`].
pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != REPORT_HEADER {
        return Err(GofError::Parse(format!("unexpected report header '{}'", header.join(","))));
    }
    reader
        .records()
        .map(|record| {
            let record = record?;
            let num = |i: usize| {
                record[i].parse::<f64>().map_err(|_| GofError::Parse(format!("bad number '{}'", &record[i])))
            };
            Ok(ReportRow {
                scenario: record[0].to_string(),
                n: record[1].parse().map_err(|_| GofError::Parse(format!("bad n '{}'", &record[1])))?,
                test: record[2].to_string(),
                a: if &record[3] == "NA" { None } else { Some(num(3)?) },
                rejection_rate: num(4)?,
                notfound_fit: num(5)?,
                notfound_boot: num(6)?,
                errors: 0,
            })
        })
        .collect()
}
