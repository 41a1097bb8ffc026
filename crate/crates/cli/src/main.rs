use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gompertz_gof::bootstrap::{bootstrap_tests, expand_kinds};
use gompertz_gof::io::{read_sample_path, write_sample};
use gompertz_gof::lifetable::{hazard_to_pmf, sample_lifetimes, truncate_pmf};
use gompertz_gof::simulation::{report_to_csv, run_study_with_progress, PAPER_A_GRID};
use gompertz_gof::{fit_mle, AlternativeSpec, GofError, LifeTable, SimulationConfig};

#[derive(Parser)]
#[command(name = "gompertz-gof", version, about = "Goodness-of-fit tests for the Gompertz distribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-likelihood fit of GO(eta, b).
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Bootstrap goodness-of-fit tests.
    Gof(GofArgs),
    /// Monte-Carlo size/power study from a key=value config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Use the published replication counts (M=10000, B=2000).
        #[arg(long)]
        full_scale: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Generate lifetimes from a life table of one-year hazards.
    Lifetable(LifetableArgs),
    /// Draw a sample from a named distribution, e.g. `gompertz eta=1 b=2`.
    Sample {
        /// Family and parameters; `n=` and `seed=` tokens are also accepted here.
        #[arg(required = true, num_args = 1..)]
        spec: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GofArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma list of stein, ks, ad, cm, wa.
    #[arg(long, default_value = "stein,ad,ks,cm,wa")]
    test: String,
    /// Comma list of weight parameters for the Stein test.
    #[arg(long, value_delimiter = ',', default_values_t = PAPER_A_GRID.to_vec())]
    a: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct LifetableArgs {
    /// CSV of age,hazard rows.
    #[arg(long)]
    input: PathBuf,
    /// Keep ages strictly between L and R; L = -1 keeps age 0.
    #[arg(long, num_args = 2, value_names = ["L", "R"], allow_negative_numbers = true)]
    truncate: Option<Vec<i64>>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Add U(0,1) to each integer age.
    #[arg(long)]
    jitter: bool,
    /// Also write the (truncated) mass function here.
    #[arg(long)]
    pmf_output: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

fn writer(out: &Output) -> Result<Box<dyn Write>, GofError> {
    Ok(match &out.output {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| GofError::Io(format!("{}: {e}", path.display())))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), GofError> {
    match cli.command {
        Command::Fit { input, out } => {
            let sample = read_sample_path(&input)?;
            let fit = fit_mle(&sample)?;
            let mut w = writer(&out)?;
            writeln!(w, "n,eta_hat,b_hat,b_pilot,converged,fallback_used,iterations")?;
            let pilot = fit.b_pilot.map_or_else(|| "NA".into(), |p| p.to_string());
            writeln!(
                w,
                "{},{},{},{pilot},{},{},{}",
                sample.len(),
                fit.eta_hat,
                fit.b_hat,
                fit.converged,
                fit.fallback_used,
                fit.iterations
            )?;
            w.flush()?;
        }
        Command::Gof(args) => {
            if args.bootstrap == 0 {
                return Err(GofError::InvalidParameter("--bootstrap must be at least 1".into()));
            }
            let sample = read_sample_path(&args.input)?;
            let kinds = expand_kinds(&args.test, &args.a)?;
            let outcomes = bootstrap_tests(&sample, &kinds, args.bootstrap, args.alpha, args.seed)?;
            let fit = outcomes[0].fit;
            let mut w = writer(&args.out)?;
            writeln!(w, "# seed={}", args.seed)?;
            writeln!(
                w,
                "# n={} eta_hat={} b_hat={} fallback={}",
                sample.len(),
                fit.eta_hat,
                fit.b_hat,
                fit.fallback_used
            )?;
            writeln!(w, "test,a,statistic,p_value,critical_value,alpha,bootstrap,reject,notfound_boot")?;
            for o in &outcomes {
                let a = o.kind.a().map_or_else(|| "NA".into(), |a| a.to_string());
                writeln!(
                    w,
                    "{},{a},{},{},{},{},{},{},{}",
                    o.kind.name(),
                    o.statistic,
                    o.p_value,
                    o.critical_value,
                    o.alpha,
                    o.replications,
                    o.reject,
                    o.not_found_frequency_bootstrap
                )?;
            }
            w.flush()?;
        }
        Command::Simulate { config, full_scale, out } => {
            let text =
                std::fs::read_to_string(&config).map_err(|e| GofError::Io(format!("{}: {e}", config.display())))?;
            let mut config: SimulationConfig = text.parse()?;
            if full_scale {
                config = config.full_scale();
            }
            eprintln!(
                "{} scenarios x {} sample sizes, {} tests, M={}, B={}, seed={}",
                config.scenarios.len(),
                config.sample_sizes.len(),
                config.kinds.len(),
                config.replications,
                config.bootstrap,
                config.seed
            );
            let report = run_study_with_progress(&config, |p| {
                eprintln!(
                    "[{}/{}] {} n={} done after {:.1}s",
                    p.index,
                    p.total,
                    p.scenario,
                    p.n,
                    p.elapsed.as_secs_f64()
                );
            })?;
            let mut w = writer(&out)?;
            w.write_all(report_to_csv(&report).as_bytes())?;
            w.flush()?;
            let errors: usize = report.rows.iter().map(|r| r.errors).sum();
            eprintln!("{} rows in {:.1}s; {errors} failed test runs", report.rows.len(), report.elapsed.as_secs_f64());
        }
        Command::Lifetable(args) => {
            let table = LifeTable::from_path(&args.input)?;
            let mut pmf = hazard_to_pmf(&table)?;
            if let Some(bounds) = &args.truncate {
                pmf = truncate_pmf(&pmf, bounds[0], bounds[1])?;
            }
            if let Some(path) = &args.pmf_output {
                let file = File::create(path).map_err(|e| GofError::Io(format!("{}: {e}", path.display())))?;
                pmf.write_csv(BufWriter::new(file))?;
            }
            let sample = sample_lifetimes(&pmf, args.n, args.seed, args.jitter)?;
            let mut meta = vec![("seed", args.seed.to_string()), ("n", args.n.to_string())];
            if let Some(b) = &args.truncate {
                meta.push(("truncate", format!("{} {}", b[0], b[1])));
            }
            let mut w = writer(&args.out)?;
            write_sample(&mut w, sample.values(), &meta)?;
            w.flush()?;
        }
        Command::Sample { spec, n, seed, out } => {
            let (mut n, mut seed) = (n, seed);
            let mut family = Vec::new();
            for token in spec.iter().flat_map(|s| s.split_whitespace()) {
                if let Some(v) = token.strip_prefix("n=") {
                    n = Some(v.parse().map_err(|_| GofError::Parse(format!("bad sample size '{v}'")))?);
                } else if let Some(v) = token.strip_prefix("seed=") {
                    seed = Some(v.parse().map_err(|_| GofError::Parse(format!("bad seed '{v}'")))?);
                } else {
                    family.push(token);
                }
            }
            let spec: AlternativeSpec = family.join(" ").parse()?;
            let n = n.ok_or_else(|| GofError::InvalidParameter("sample size is required (--n or n=)".into()))?;
            if n == 0 {
                return Err(GofError::InvalidParameter("sample size must be at least 1".into()));
            }
            let seed = seed.unwrap_or(1);
            let sample = spec.sample(n, seed)?;
            let mut w = writer(&out)?;
            write_sample(&mut w, sample.values(), &[("family", spec.to_string()), ("seed", seed.to_string())])?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
