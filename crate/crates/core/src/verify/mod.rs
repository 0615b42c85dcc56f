//! One suite per quantitative claim. Each returns a [`VerificationReport`]
//! with the worst observed slack; Monte Carlo checks use 3 standard errors
//! and exact checks `1e-9`.

mod continuum;
mod exact;
mod figures;
mod report;
mod stochastic;

pub use self::continuum::{
    verify_bound_cts, verify_conjecture, verify_integral_condition, verify_xd_bounds,
    INTEGRAL_TOL,
};
pub use exact::{
    verify_bound_discrete, verify_crossing_discrete, verify_main_discrete_exact,
    verify_school_love, verify_worst_case_rank, worst_case_rank_bound,
};
pub use figures::{verify_figures, FigurePanel, FigureProtocol, UNIFORM_MISS_LIMIT};
pub use report::{Status, VerificationReport};
pub use stochastic::{
    asserted_horizon, verify_corollary_serial, verify_main_discrete_mc,
    verify_prob_to_xprime, verify_xts_convergence,
};

use crate::error::Result;
use crate::market::DistributionKind;

/// Absolute slack for exact-oracle comparisons.
pub const EXACT_TOL: f64 = 1e-9;

/// Market size at which "n large enough" claims are asserted.
pub const LARGE_N: usize = 1000;

/// Claim identifiers.
pub mod ids {
    pub const MAIN_DISCRETE: &str = "main-discrete";
    pub const SCHOOL_LOVE: &str = "school-love";
    pub const CROSSING_DISCRETE: &str = "crossing-discrete";
    pub const BOUND_DISCRETE: &str = "bound-discrete";
    pub const WORST_CASE_RANK: &str = "worst-case-rank";
    pub const BOUND_CTS: &str = "bound-cts";
    pub const XTS: &str = "xts";
    pub const PROB_TO_XPRIME: &str = "prob-to-xprime";
    pub const COROLLARY_SERIAL: &str = "corollary-serial";
    pub const CONJECTURE: &str = "conjecture";
    pub const XD_BOUNDS: &str = "xd-bounds";
    pub const IG: &str = "ig";
    pub const FIGURES: &str = "figures";

    pub const ALL: [&str; 13] = [
        MAIN_DISCRETE,
        SCHOOL_LOVE,
        CROSSING_DISCRETE,
        BOUND_DISCRETE,
        WORST_CASE_RANK,
        BOUND_CTS,
        XTS,
        PROB_TO_XPRIME,
        COROLLARY_SERIAL,
        CONJECTURE,
        XD_BOUNDS,
        IG,
        FIGURES,
    ];
}

/// Finite-market allowance `5 d^2 / n` for comparing with large-market
/// limits.
pub fn finite_n_slack(n: usize, d: usize) -> f64 {
    5.0 * (d * d) as f64 / n as f64
}

/// Evidence for the main monotonicity claim.
#[derive(Clone, Copy, Debug)]
pub enum Evidence {
    /// Exact taken-count chain, uniform law only.
    Exact,
    MonteCarlo {
        kind: DistributionKind,
        reps: u64,
        seed: u64,
    },
}

pub fn verify_main_discrete(
    n: usize,
    d_set: &[usize],
    evidence: Evidence,
) -> Result<VerificationReport> {
    match evidence {
        Evidence::Exact => verify_main_discrete_exact(n, d_set),
        Evidence::MonteCarlo { kind, reps, seed } => {
            verify_main_discrete_mc(n, d_set, kind, reps, seed)
        }
    }
}
