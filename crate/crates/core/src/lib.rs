//! Goodness-of-fit testing for the Gompertz family.
//!
//! The crate bundles a weighted L² test built on a Stein-type
//! characterisation of the Gompertz law, the classical EDF competitors
//! (Kolmogorov-Smirnov, Anderson-Darling, Cramér-von Mises, Watson), a
//! parametric bootstrap shared by all of them, maximum-likelihood fitting,
//! a Monte-Carlo harness for size and power studies, and a life-table
//! data generator.
//!
//! The numerical core is generic over the floating-point type through
//! [`Real`]; concrete `f64`/`f32` aliases are exported below. Alternative
//! distributions, quadrature and the simulation harness work in `f64`.
//!
//! ```
//! use gompertz_gof::{bootstrap_test, GompertzParamsF64, TestKind};
//!
//! let data = GompertzParamsF64::new(1.0, 1.0).unwrap().sample(60, 7);
//! let outcome = bootstrap_test(&data, &TestKind::stein(1.0).unwrap(), 99, 0.05, 11).unwrap();
//! assert!((0.0..=1.0).contains(&outcome.p_value));
//! ```

pub mod bootstrap;
pub mod distributions;
pub mod edf;
pub mod error;
pub mod estimation;
pub mod io;
pub mod lifetable;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod simulation;
pub mod stein;

pub use bootstrap::{bootstrap_test, bootstrap_tests, empirical_quantile, TestKind, TestOutcome};
pub use distributions::{AlternativeSpec, Density, GompertzParams, Sample};
pub use edf::EdfInput;
pub use error::{GofError, Result};
pub use estimation::{fit_mle, FitResult, RescaledSample};
pub use lifetable::{LifeTable, Pmf};
pub use scalar::Real;
pub use simulation::{run_study, SimulationConfig, SimulationReport};
pub use stein::{StatisticInput, WeightParam};

pub type GompertzParamsF64 = GompertzParams<f64>;
pub type GompertzParamsF32 = GompertzParams<f32>;
pub type SampleF64 = Sample<f64>;
pub type SampleF32 = Sample<f32>;
pub type FitResultF64 = FitResult<f64>;
pub type FitResultF32 = FitResult<f32>;
pub type RescaledSampleF64 = RescaledSample<f64>;
pub type StatisticInputF64 = StatisticInput<f64>;
pub type StatisticInputF32 = StatisticInput<f32>;
pub type WeightParamF64 = WeightParam<f64>;
pub type EdfInputF64 = EdfInput<f64>;
pub type TestKindF64 = TestKind<f64>;
pub type TestOutcomeF64 = TestOutcome<f64>;
