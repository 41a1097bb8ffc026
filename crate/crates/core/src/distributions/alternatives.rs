use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::{Density, GompertzParams, Sample};
use crate::error::{GofError, Result};
use crate::rng::{open_unit, stream};

/// Laws used to probe power, plus the Gompertz null itself.
///
/// Weibull laws have unit scale. `LinearFailure(ν)` has hazard `ν(x+1)`,
/// i.e. density `ν(x+1)·exp(−ν(x²/2 + x))`. `GompertzGammaMixture(p)` puts
/// weight `p` on GO(1,1) and `1−p` on Γ(5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlternativeSpec {
    Gompertz { eta: f64, b: f64 },
    LogNormal { sigma: f64 },
    Gamma { shape: f64 },
    InverseGaussian { mean: f64, shape: f64 },
    Weibull { shape: f64 },
    Uniform { upper: f64 },
    Power { nu: f64 },
    ShiftedPareto { nu: f64 },
    LinearFailure { nu: f64 },
    GompertzGammaMixture { p: f64 },
}

const MIXTURE_GAMMA_SHAPE: f64 = 5.0;

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GofError::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn gamma_ln_pdf(shape: f64, x: f64) -> f64 {
    (shape - 1.0) * x.ln() - x - ln_gamma(shape)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn unit_gompertz() -> GompertzParams<f64> {
    GompertzParams::new(1.0, 1.0).expect("GO(1,1) is valid")
}

impl AlternativeSpec {
    pub fn validate(&self) -> Result<()> {
        use AlternativeSpec::*;
        match *self {
            Gompertz { eta, b } => GompertzParams::new(eta, b).map(|_| ()),
            LogNormal { sigma } => positive("sigma", sigma),
            Gamma { shape } => positive("gamma shape", shape),
            InverseGaussian { mean, shape } => positive("mean", mean).and(positive("shape", shape)),
            Weibull { shape } => positive("Weibull shape", shape),
            Uniform { upper } => positive("upper bound", upper),
            Power { nu } | ShiftedPareto { nu } | LinearFailure { nu } => positive("nu", nu),
            GompertzGammaMixture { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(GofError::InvalidParameter(format!("mixture weight must lie in [0, 1], got {p}")))
                }
            }
        }
    }

    /// True for the null family.
    pub fn is_gompertz(&self) -> bool {
        matches!(self, AlternativeSpec::Gompertz { .. })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.pdf_unchecked(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.cdf_unchecked(x))
    }

    fn pdf_unchecked(&self, x: f64) -> f64 {
        use AlternativeSpec::*;
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        match *self {
            Uniform { upper } => {
                if x < upper {
                    1.0 / upper
                } else {
                    0.0
                }
            }
            Power { nu } => {
                if x <= 1.0 {
                    x.powf(1.0 / nu - 1.0) / nu
                } else {
                    0.0
                }
            }
            GompertzGammaMixture { p } => {
                p * unit_gompertz().pdf(x) + (1.0 - p) * gamma_ln_pdf(MIXTURE_GAMMA_SHAPE, x).exp()
            }
            _ => self.ln_pdf_unchecked(x).exp(),
        }
    }

    fn ln_pdf_unchecked(&self, x: f64) -> f64 {
        use AlternativeSpec::*;
        if x <= 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        match *self {
            Gompertz { eta, b } => GompertzParams::new(eta, b).expect("validated").ln_pdf(x),
            LogNormal { sigma } => {
                let lx = x.ln();
                -lx * lx / (2.0 * sigma * sigma) - (2.0 * std::f64::consts::PI).sqrt().ln() - sigma.ln() - lx
            }
            Gamma { shape } => gamma_ln_pdf(shape, x),
            InverseGaussian { mean, shape } => {
                0.5 * (shape / (2.0 * std::f64::consts::PI)).ln()
                    - 1.5 * x.ln()
                    - shape * (x - mean).powi(2) / (2.0 * mean * mean * x)
            }
            Weibull { shape } => shape.ln() + (shape - 1.0) * x.ln() - x.powf(shape),
            ShiftedPareto { nu } => nu.ln() - (nu + 1.0) * x.ln_1p(),
            LinearFailure { nu } => nu.ln() + x.ln_1p() - nu * (0.5 * x * x + x),
            Uniform { .. } | Power { .. } | GompertzGammaMixture { .. } => self.pdf_unchecked(x).ln(),
        }
    }

    fn cdf_unchecked(&self, x: f64) -> f64 {
        use AlternativeSpec::*;
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        match *self {
            Gompertz { eta, b } => GompertzParams::new(eta, b).expect("validated").cdf(x),
            LogNormal { sigma } => std_normal_cdf(x.ln() / sigma),
            Gamma { shape } => gamma_lr(shape, x),
            InverseGaussian { mean, shape } => {
                let r = (shape / x).sqrt();
                std_normal_cdf(r * (x / mean - 1.0))
                    + (2.0 * shape / mean).exp() * std_normal_cdf(-r * (x / mean + 1.0))
            }
            Weibull { shape } => -(-x.powf(shape)).exp_m1(),
            Uniform { upper } => (x / upper).min(1.0),
            Power { nu } => x.min(1.0).powf(1.0 / nu),
            ShiftedPareto { nu } => -(-nu * x.ln_1p()).exp_m1(),
            LinearFailure { nu } => -(-nu * (0.5 * x * x + x)).exp_m1(),
            GompertzGammaMixture { p } => p * unit_gompertz().cdf(x) + (1.0 - p) * gamma_lr(MIXTURE_GAMMA_SHAPE, x),
        }
    }

    /// `n` i.i.d. draws on the seed's primary stream.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample<f64>> {
        self.sample_with(&mut stream(seed, 0), n)
    }

    pub fn sample_with<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Sample<f64>> {
        self.validate()?;
        if n == 0 {
            return Err(GofError::Domain("sample size must be at least 1".into()));
        }
        let gamma = match *self {
            AlternativeSpec::Gamma { shape } => Some(Gamma::new(shape, 1.0)),
            AlternativeSpec::GompertzGammaMixture { .. } => Some(Gamma::new(MIXTURE_GAMMA_SHAPE, 1.0)),
            _ => None,
        }
        .transpose()
        .map_err(|e| GofError::InvalidParameter(e.to_string()))?;
        let mut values = Vec::with_capacity(n);
        while values.len() < n {
            let x = self.draw(rng, gamma.as_ref());
            // Guards against the measure-zero underflow to 0 of some transforms.
            if x > 0.0 && x.is_finite() {
                values.push(x);
            }
        }
        Sample::new(values)
    }

    fn draw<R: RngCore + ?Sized>(&self, rng: &mut R, gamma: Option<&Gamma<f64>>) -> f64 {
        use AlternativeSpec::*;
        match *self {
            Gompertz { eta, b } => {
                GompertzParams::new(eta, b).expect("validated").quantile(open_unit(rng)).expect("open unit draw")
            }
            LogNormal { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (sigma * z).exp()
            }
            Gamma { .. } => gamma.expect("gamma sampler").sample(rng),
            InverseGaussian { mean, shape } => michael_schucany_haas(rng, mean, shape),
            Weibull { shape } => (-(-open_unit(rng)).ln_1p()).powf(1.0 / shape),
            Uniform { upper } => upper * open_unit(rng),
            Power { nu } => open_unit(rng).powf(nu),
            ShiftedPareto { nu } => (-(-open_unit(rng)).ln_1p() / nu).exp_m1(),
            LinearFailure { nu } => {
                // Solve ν(x²/2 + x) = E for an Exp(1) variate E.
                let t = 2.0 * (-(-open_unit(rng)).ln_1p()) / nu;
                t / (1.0 + (1.0 + t).sqrt())
            }
            GompertzGammaMixture { p } => {
                if open_unit(rng) < p {
                    unit_gompertz().quantile(open_unit(rng)).expect("open unit draw")
                } else {
                    gamma.expect("gamma sampler").sample(rng)
                }
            }
        }
    }

    /// The law-specific list of the paper-style short name and parameters.
    fn label_parts(&self) -> (&'static str, Vec<f64>) {
        use AlternativeSpec::*;
        match *self {
            Gompertz { eta, b } => ("GO", vec![eta, b]),
            LogNormal { sigma } => ("LN", vec![sigma]),
            Gamma { shape } => ("Gamma", vec![shape]),
            InverseGaussian { mean, shape } => ("IG", vec![mean, shape]),
            Weibull { shape } => ("W", vec![shape]),
            Uniform { upper } => ("U", vec![0.0, upper]),
            Power { nu } => ("Pow", vec![nu]),
            ShiftedPareto { nu } => ("SP", vec![nu]),
            LinearFailure { nu } => ("LF", vec![nu]),
            GompertzGammaMixture { p } => ("Mix", vec![p]),
        }
    }
}

/// Michael-Schucany-Haas transformation sampler for IG(μ, λ).
fn michael_schucany_haas<R: RngCore + ?Sized>(rng: &mut R, mean: f64, shape: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let y = mean * z * z;
    // μ + μ/(2λ)·(y − sqrt(4λy + y²)), written without cancellation.
    let x = if y == 0.0 { mean } else { mean - 2.0 * mean * y / (y + (4.0 * shape * y + y * y).sqrt()) };
    if rng.random::<f64>() * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

impl Density for AlternativeSpec {
    fn pdf(&self, x: f64) -> f64 {
        self.pdf_unchecked(x)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_pdf_unchecked(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.cdf_unchecked(x)
    }

    fn upper_bound(&self) -> f64 {
        match *self {
            AlternativeSpec::Uniform { upper } => upper,
            AlternativeSpec::Power { .. } => 1.0,
            _ => f64::INFINITY,
        }
    }
}

impl fmt::Display for AlternativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, params) = self.label_parts();
        let joined: Vec<String> = params.iter().map(|p| p.to_string()).collect();
        write!(f, "{name}({})", joined.join(","))
    }
}

impl FromStr for AlternativeSpec {
    type Err = GofError;

    /// Accepts `GO(1,1)`, `ln(0.5)`, `gompertz eta=1 b=1`, `uniform 0 1`,
    /// `pow nu=1` and similar spellings.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, rest) = match text.find(|c: char| c == '(' || c.is_whitespace()) {
            Some(i) => (&text[..i], &text[i..]),
            None => (text, ""),
        };
        let rest = rest.trim();
        let rest = rest.strip_prefix('(').map(|r| r.strip_suffix(')').unwrap_or(r)).unwrap_or(rest);
        let mut positional = Vec::new();
        let mut named = Vec::new();
        for token in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            match token.split_once('=') {
                Some((k, v)) => named.push((k.trim().to_ascii_lowercase(), parse_number(v)?)),
                None => positional.push(parse_number(token)?),
            }
        }
        let args = Args { positional, named, spec: text };
        let spec = match name.to_ascii_lowercase().as_str() {
            "go" | "gompertz" => AlternativeSpec::Gompertz {
                eta: args.get(&["eta", "shape"], 0)?,
                b: args.get(&["b", "rate", "scale"], 1)?,
            },
            "ln" | "lognormal" => AlternativeSpec::LogNormal { sigma: args.get(&["sigma"], 0)? },
            "gamma" | "g" => AlternativeSpec::Gamma { shape: args.get(&["k", "shape"], 0)? },
            "ig" | "invgauss" | "inverse-gaussian" => AlternativeSpec::InverseGaussian {
                mean: args.get(&["mu", "mean"], 0)?,
                shape: args.get(&["lambda", "shape"], 1)?,
            },
            "w" | "weibull" => AlternativeSpec::Weibull { shape: args.get(&["k", "shape"], 0)? },
            "u" | "uniform" => {
                if args.positional.len() == 2 {
                    if args.positional[0] != 0.0 {
                        return Err(GofError::Parse(format!("uniform lower bound must be 0 in '{text}'")));
                    }
                    AlternativeSpec::Uniform { upper: args.positional[1] }
                } else {
                    AlternativeSpec::Uniform { upper: args.get(&["c", "upper"], 0)? }
                }
            }
            "pow" | "power" => AlternativeSpec::Power { nu: args.get(&["nu"], 0)? },
            "sp" | "pareto" | "shifted-pareto" => AlternativeSpec::ShiftedPareto { nu: args.get(&["nu"], 0)? },
            "lf" | "linear-failure" => AlternativeSpec::LinearFailure { nu: args.get(&["nu"], 0)? },
            "mix" | "mixture" => AlternativeSpec::GompertzGammaMixture { p: args.get(&["p"], 0)? },
            other => return Err(GofError::Parse(format!("unknown distribution family '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| GofError::Parse(format!("'{s}' is not a number")))
}

struct Args<'a> {
    positional: Vec<f64>,
    named: Vec<(String, f64)>,
    spec: &'a str,
}

impl Args<'_> {
    fn get(&self, keys: &[&str], position: usize) -> Result<f64> {
        self.named
            .iter()
            .find(|(k, _)| keys.contains(&k.as_str()))
            .map(|(_, v)| *v)
            .or_else(|| self.positional.get(position).copied())
            .ok_or_else(|| GofError::Parse(format!("missing parameter '{}' in '{}'", keys[0], self.spec)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};

    fn all_families() -> Vec<AlternativeSpec> {
        use AlternativeSpec::*;
        vec![
            LogNormal { sigma: 0.5 },
            LogNormal { sigma: 1.0 },
            Gamma { shape: 1.0 },
            Gamma { shape: 2.0 },
            Gamma { shape: 3.0 },
            InverseGaussian { mean: 1.0, shape: 1.0 },
            InverseGaussian { mean: 1.0, shape: 3.0 },
            Weibull { shape: 0.5 },
            Weibull { shape: 3.0 },
            Uniform { upper: 5.0 },
            Power { nu: 1.0 },
            Power { nu: 2.0 },
            Power { nu: 4.0 },
            ShiftedPareto { nu: 3.0 },
            ShiftedPareto { nu: 5.0 },
            ShiftedPareto { nu: 10.0 },
            LinearFailure { nu: 3.0 },
            LinearFailure { nu: 5.0 },
            LinearFailure { nu: 10.0 },
            GompertzGammaMixture { p: 0.1 },
            GompertzGammaMixture { p: 0.25 },
            GompertzGammaMixture { p: 0.5 },
            GompertzGammaMixture { p: 0.75 },
            Gompertz { eta: 2.0, b: 0.5 },
        ]
    }

    fn mass(spec: &AlternativeSpec, lo: f64, hi: f64) -> f64 {
        let tol = Tolerance { abs: 1e-12, rel: 1e-12, max_intervals: 4000 };
        let f = |x: f64| spec.pdf(x).unwrap();
        if hi.is_finite() {
            integrate(f, lo, hi, tol).unwrap().value
        } else {
            integrate(f, lo, 1.0, tol).unwrap().value + integrate_to_infinity(f, 1.0, tol).unwrap().value
        }
    }

    #[test]
    fn densities_normalise() {
        for spec in all_families() {
            let total = mass(&spec, 0.0, spec.upper_bound());
            assert!((total - 1.0).abs() < 1e-6, "{spec}: {total}");
        }
    }

    #[test]
    fn cdfs_agree_with_integrated_densities() {
        for spec in all_families() {
            for &x in &[0.3f64, 0.9, 2.5] {
                let x = x.min(spec.upper_bound() * 0.9);
                let q = mass(&spec, 0.0, x);
                assert!((q - spec.cdf(x).unwrap()).abs() < 1e-8, "{spec} at {x}: {q}");
            }
        }
    }

    #[test]
    fn samplers_match_cdfs() {
        let n = 100_000;
        for (i, spec) in all_families().into_iter().enumerate() {
            let xs = spec.sample(n, 1000 + i as u64).unwrap().sorted();
            let sup = xs
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    let f = spec.cdf(x).unwrap();
                    ((j + 1) as f64 / n as f64 - f).abs().max((f - j as f64 / n as f64).abs())
                })
                .fold(0.0, f64::max);
            assert!(sup < 1.5 / (n as f64).sqrt(), "{spec}: sup distance {sup}");
        }
    }

    #[test]
    fn power_one_is_uniform() {
        let pow = AlternativeSpec::Power { nu: 1.0 }.sample(200, 5).unwrap();
        let uni = AlternativeSpec::Uniform { upper: 1.0 }.sample(200, 5).unwrap();
        assert_eq!(pow, uni);
    }

    #[test]
    fn pareto_support_and_density() {
        let sp = AlternativeSpec::ShiftedPareto { nu: 3.0 };
        assert!(sp.sample(10_000, 3).unwrap().values().iter().all(|&x| x > 0.0));
        assert!((sp.pdf(1.0).unwrap() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn exponential_mean() {
        let n = 1_000_000;
        let s = AlternativeSpec::Gamma { shape: 1.0 }.sample(n, 17).unwrap();
        assert!((s.mean() - 1.0).abs() < 3e-3);
    }

    #[test]
    fn degenerate_mixture_is_gamma_five() {
        let mix = AlternativeSpec::GompertzGammaMixture { p: 0.0 };
        let g5 = AlternativeSpec::Gamma { shape: 5.0 };
        for &x in &[0.1, 1.0, 4.0, 9.0] {
            assert!((mix.pdf(x).unwrap() - g5.pdf(x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_failure_normalises() {
        let lf = AlternativeSpec::LinearFailure { nu: 5.0 };
        assert!((mass(&lf, 0.0, f64::INFINITY) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(AlternativeSpec::LogNormal { sigma: 0.0 }.pdf(1.0).is_err());
        assert!(AlternativeSpec::GompertzGammaMixture { p: 1.5 }.sample(3, 1).is_err());
        assert!(AlternativeSpec::Weibull { shape: -1.0 }.cdf(1.0).is_err());
    }

    #[test]
    fn parses_common_spellings() {
        let cases = [
            ("GO(1,1)", AlternativeSpec::Gompertz { eta: 1.0, b: 1.0 }),
            ("gompertz eta=1 b=2", AlternativeSpec::Gompertz { eta: 1.0, b: 2.0 }),
            ("ln(0.5)", AlternativeSpec::LogNormal { sigma: 0.5 }),
            ("uniform 0 1", AlternativeSpec::Uniform { upper: 1.0 }),
            ("U(0,5)", AlternativeSpec::Uniform { upper: 5.0 }),
            ("pow nu=1", AlternativeSpec::Power { nu: 1.0 }),
            ("IG(1,3)", AlternativeSpec::InverseGaussian { mean: 1.0, shape: 3.0 }),
            ("lf nu=3", AlternativeSpec::LinearFailure { nu: 3.0 }),
            ("Mix(0.25)", AlternativeSpec::GompertzGammaMixture { p: 0.25 }),
        ];
        for (text, expected) in cases {
            assert_eq!(text.parse::<AlternativeSpec>().unwrap(), expected, "{text}");
        }
        for spec in all_families() {
            assert_eq!(spec.to_string().parse::<AlternativeSpec>().unwrap(), spec);
        }
        assert!("cauchy(1)".parse::<AlternativeSpec>().is_err());
        assert!("ln()".parse::<AlternativeSpec>().is_err());
        assert!("U(1,5)".parse::<AlternativeSpec>().is_err());
    }
}
