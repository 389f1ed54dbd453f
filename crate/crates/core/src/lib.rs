//! Simulation and growth-rate estimation for linear birth-death processes
//! observed at discrete, possibly irregular, times.
//!
//! The central estimator is [`estimate::approx_mle`], the root of a
//! one-dimensional estimating equation derived from the Gaussian
//! approximation to the transition law. Galton-Watson, Gaussian-likelihood
//! and saddlepoint estimators are provided for comparison, along with exact
//! transition kernels, simulators, a Monte Carlo benchmark harness and a
//! pipeline for variant-allele-frequency cohorts.

pub mod bench;
pub mod error;
pub mod estimate;
pub mod inhomogeneous;
pub mod io;
pub mod optim;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod transition;
pub mod types;
pub mod vaf;

pub use error::{Error, Result};
pub use types::{
    growth_to_rates, rates_to_growth, EstimateResult, FitWarning, GrowthParams, Method,
    ObservationSeries, RateParams, SimMethod, Trajectory, Transition,
};
