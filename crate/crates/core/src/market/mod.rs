//! One realization of the Serial Dictatorship market.
//!
//! Students arrive in a fixed order. Each reveals its preference list lazily
//! and takes the first listed school with a free seat; a student whose list
//! holds only full schools stays unmatched.

pub mod config;
pub mod prob;
mod sampler;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub use config::{DistributionKind, DistributionSpec, MarketConfig};
pub use prob::{
    match_prob_approx, match_prob_approx_bound, match_prob_exact, rank_cdf_given_taken,
    rank_prob_given_taken,
};
use sampler::ListSampler;

/// Position of the assigned school in a student's own list.
///
/// Ordering puts every `Matched` rank before `Unmatched`, which plays the
/// role of an infinite rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rank {
    /// One-based list position.
    Matched(u32),
    Unmatched,
}

impl Rank {
    pub fn is_matched(self) -> bool {
        matches!(self, Rank::Matched(_))
    }

    /// True when matched to one of the top `k` listed schools.
    pub fn within(self, k: usize) -> bool {
        matches!(self, Rank::Matched(r) if (r as usize) <= k)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Matched(r) => write!(f, "{r}"),
            Rank::Unmatched => f.write_str("inf"),
        }
    }
}

/// Everything observed in one run of the mechanism.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    /// `ranks[i - 1]` is the rank of student `i`.
    pub ranks: Vec<Rank>,
    pub matched: Vec<bool>,
    /// `taken_trajectory[j]` is the number of full schools after the first
    /// `j` students, so student `i` sees `taken_trajectory[i - 1]`.
    pub taken_trajectory: Vec<usize>,
    /// Number of schools with exactly `k` seats taken at the end, `k = 0..=q`.
    pub seat_histogram_final: Vec<usize>,
}

impl SimOutcome {
    /// Full schools just before student `i` (one-based) takes a turn.
    pub fn taken_before(&self, i: usize) -> usize {
        self.taken_trajectory[i - 1]
    }

    pub fn rank(&self, i: usize) -> Rank {
        self.ranks[i - 1]
    }

    pub fn is_matched(&self, i: usize) -> bool {
        self.matched[i - 1]
    }

    pub fn students(&self) -> usize {
        self.ranks.len()
    }

    pub fn seats_filled(&self) -> usize {
        self.seat_histogram_final
            .iter()
            .enumerate()
            .map(|(k, c)| k * c)
            .sum()
    }

    /// Checks the structural invariants of a realization.
    pub fn check_invariants(&self, n: usize, q: usize) -> Result<()> {
        let m = self.ranks.len();
        let fail = |msg: String| Err(Error::Consistency(msg));
        if self.matched.len() != m || self.taken_trajectory.len() != m + 1 {
            return fail("outcome vectors have inconsistent lengths".into());
        }
        if self.seat_histogram_final.len() != q + 1 {
            return fail("seat histogram must have q + 1 entries".into());
        }
        if self.taken_trajectory[0] != 0 {
            return fail("no school may be full before the first student".into());
        }
        for i in 0..m {
            if self.matched[i] != self.ranks[i].is_matched() {
                return fail(format!("student {} matched flag disagrees with rank", i + 1));
            }
            let step = self.taken_trajectory[i + 1] as isize - self.taken_trajectory[i] as isize;
            if !(0..=1).contains(&step) {
                return fail(format!("taken count jumps by {step} at student {}", i + 1));
            }
            if step == 1 && !self.matched[i] {
                return fail(format!("unmatched student {} filled a school", i + 1));
            }
            if q == 1 && step != self.matched[i] as isize {
                return fail(format!("one-seat market: student {} matched but no school filled", i + 1));
            }
            if self.taken_trajectory[i + 1] > n {
                return fail("more full schools than schools".into());
            }
        }
        let matched = self.matched.iter().filter(|m| **m).count();
        if matched != self.seats_filled() {
            return fail(format!(
                "{matched} students matched but {} seats filled",
                self.seats_filled()
            ));
        }
        if self.seat_histogram_final.iter().sum::<usize>() != n {
            return fail("seat histogram does not cover every school".into());
        }
        if self.seat_histogram_final[q] != self.taken_trajectory[m] {
            return fail("final full-school count disagrees with histogram".into());
        }
        Ok(())
    }
}

/// Mutable state of one market: seat counts and the list sampler.
///
/// Reusable across replications via [`Market::reset`].
#[derive(Clone, Debug)]
pub struct Market {
    n: usize,
    d: usize,
    q: u32,
    seats_taken: Vec<u32>,
    full: usize,
    sampler: ListSampler,
}

impl Market {
    pub fn new(config: &MarketConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            n: config.n,
            d: config.d,
            q: config.q as u32,
            seats_taken: vec![0; config.n],
            full: 0,
            sampler: ListSampler::new(config),
        })
    }

    pub fn reset(&mut self) {
        self.seats_taken.fill(0);
        self.full = 0;
    }

    /// Schools with every seat taken.
    pub fn taken(&self) -> usize {
        self.full
    }

    pub fn seats_taken(&self, school: usize) -> u32 {
        self.seats_taken[school]
    }

    pub fn is_full(&self, school: usize) -> bool {
        self.seats_taken[school] == self.q
    }

    /// Plays one student's turn with a list of length `d`.
    #[inline]
    pub fn student_turn(&mut self, rng: &mut RandomStream) -> Rank {
        self.student_turn_with_len(self.d, rng)
    }

    /// Plays one turn with an explicit list length. With the same stream
    /// state, a longer list replays the same draws and only adds more.
    pub fn student_turn_with_len(&mut self, d: usize, rng: &mut RandomStream) -> Rank {
        let mut rank = Rank::Unmatched;
        for r in 1..=d.min(self.n) {
            let Some(school) = self.sampler.next_school(rng) else {
                break;
            };
            if self.seats_taken[school] < self.q {
                self.seats_taken[school] += 1;
                if self.seats_taken[school] == self.q {
                    self.full += 1;
                }
                rank = Rank::Matched(r as u32);
                break;
            }
        }
        self.sampler.end_list();
        rank
    }

    pub fn seat_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.q as usize + 1];
        for &s in &self.seats_taken {
            hist[s as usize] += 1;
        }
        hist
    }

    /// Resets and runs `m` students.
    pub fn simulate(&mut self, m: usize, rng: &mut RandomStream) -> SimOutcome {
        self.reset();
        let mut out = SimOutcome {
            ranks: Vec::with_capacity(m),
            matched: Vec::with_capacity(m),
            taken_trajectory: Vec::with_capacity(m + 1),
            seat_histogram_final: Vec::new(),
        };
        out.taken_trajectory.push(0);
        for _ in 0..m {
            let rank = self.student_turn(rng);
            out.ranks.push(rank);
            out.matched.push(rank.is_matched());
            out.taken_trajectory.push(self.full);
        }
        out.seat_histogram_final = self.seat_histogram();
        out
    }
}

/// Runs one realization of the market described by `config`.
pub fn run_market(config: &MarketConfig, mut stream: RandomStream) -> Result<SimOutcome> {
    let mut market = Market::new(config)?;
    Ok(market.simulate(config.m, &mut stream))
}
