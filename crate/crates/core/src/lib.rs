//! Serial Dictatorship with bounded random preference lists.
//!
//! Students arrive one at a time and take the first school with a free seat
//! among the `d` schools on their randomly drawn list. The crate provides
//!
//! * [`market`]: exact simulation of one realization, including multi-seat
//!   schools and non-uniform school popularity;
//! * [`oracle`]: exact per-student probabilities via the taken-count Markov
//!   chain, plus brute-force enumeration of tiny markets;
//! * [`montecarlo`]: replicated estimators with standard errors, bit-for-bit
//!   reproducible under any thread count;
//! * [`continuum`]: the large-market limit `x' = 1 - x^d`, its multi-seat
//!   system, closed forms, quadrature and crossing-time root finding;
//! * [`verify`]: one suite per quantitative claim, producing pass/fail
//!   reports with measured margins.
//!
//! Probability code is generic over [`Scalar`] so the same routines run in
//! `f64` and in exact [`Rational`] arithmetic; the continuum code is generic
//! over [`Real`].

pub mod continuum;
pub mod error;
pub mod fixture;
pub mod market;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use market::{
    run_market, DistributionKind, DistributionSpec, Market, MarketConfig, Rank, SimOutcome,
};
pub use rng::RandomStream;
pub use scalar::{Real, Scalar};

/// Exact rational arithmetic for oracle computations.
pub type Rational = num_rational::BigRational;

/// Taken-count law in double precision.
pub type TakenDistributionF64 = oracle::TakenDistribution<f64>;
/// Taken-count law in exact arithmetic.
pub type ExactTakenDistribution = oracle::TakenDistribution<Rational>;
/// Enumerated market law in exact arithmetic.
pub type ExactMarketLaw = oracle::MarketLaw<Rational>;
/// Continuum trajectory in double precision.
pub type OdeSolutionF64 = continuum::OdeSolution<f64>;
/// Continuum trajectory in single precision.
pub type OdeSolutionF32 = continuum::OdeSolution<f32>;
