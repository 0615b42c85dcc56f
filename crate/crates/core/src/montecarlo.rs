//! Replicated simulation with standard errors.
//!
//! Replication `r` always uses the stream seeded by
//! `replication_seed(config.seed, r)`. Replications run in fixed blocks of
//! [`BLOCK`] on the current rayon pool; each block folds its replications in
//! order and the blocks are folded in order, so results are bit-identical
//! for any thread count.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::continuum::{multi_seat_solve, solve_ivp, OdeSolution};
use crate::error::{Error, Result};
use crate::market::{Market, MarketConfig};
use crate::rng::RandomStream;
use crate::table::{Cell, Table};

/// Replications per work unit.
pub const BLOCK: u64 = 256;

/// Consistency checks between paired estimators use this many standard errors.
pub const CONSISTENCY_SIGMAS: f64 = 3.0;

/// Point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(reps)`.
    pub stderr: f64,
    pub reps: u64,
}

impl Estimate {
    /// From integer sums of per-replication values and their squares.
    pub fn from_integer_sums(sum: u128, sum_sq: u128, reps: u64) -> Self {
        let r = reps as u128;
        let mean = sum as f64 / reps as f64;
        let stderr = if reps < 2 {
            0.0
        } else {
            // R * Σx² - (Σx)² is exact in integers.
            let spread = (sum_sq * r).saturating_sub(sum * sum);
            (spread as f64 / (r * (r - 1)) as f64 / reps as f64).sqrt()
        };
        Self { mean, stderr, reps }
    }

    /// From per-replication samples, summed in order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let reps = samples.len() as u64;
        let mean = samples.iter().sum::<f64>() / reps as f64;
        let stderr = if reps < 2 {
            0.0
        } else {
            let ss: f64 = samples.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (reps - 1) as f64 / reps as f64).sqrt()
        };
        Self { mean, stderr, reps }
    }

    /// Whether `value` lies within `sigmas` standard errors.
    pub fn covers(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.stderr
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// Per-student statistics from one batch of replications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StudentStats {
    /// One-based student index.
    pub i: usize,
    /// `P(M_i = 1)`.
    pub p_match: Estimate,
    /// `P(K_i <= top)`.
    pub rank_cdf: Estimate,
    /// `E[T_i]`, full schools before student `i`.
    pub taken_mean: Estimate,
}

/// Runs `reps` replications, each on a fresh stream and a reset market, and
/// returns one accumulator per block in block order.
fn replicate<A, I, S>(config: &MarketConfig, reps: u64, init: I, step: S) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut Market, &mut RandomStream) + Sync,
{
    if reps == 0 {
        return Err(Error::config("reps must be at least 1"));
    }
    let template = Market::new(config)?;
    let blocks = reps.div_ceil(BLOCK);
    Ok((0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut market = template.clone();
            let mut acc = init();
            for rep in b * BLOCK..((b + 1) * BLOCK).min(reps) {
                let mut stream = RandomStream::for_replication(config.seed, rep);
                market.reset();
                step(&mut acc, &mut market, &mut stream);
            }
            acc
        })
        .collect())
}

fn check_indices(config: &MarketConfig, indices: &[usize]) -> Result<usize> {
    if indices.is_empty() {
        return Err(Error::config("no student indices requested"));
    }
    let last = *indices.iter().max().expect("non-empty");
    if indices.contains(&0) || last > config.m {
        return Err(Error::config(format!(
            "student indices must lie in 1..={}",
            config.m
        )));
    }
    Ok(last)
}

#[derive(Clone, Default)]
struct StudentSums {
    matched: u128,
    within: u128,
    taken: u128,
    taken_sq: u128,
}

/// Match probability, top-`top` rank CDF and mean taken count for each
/// requested student. Only students up to the largest index are simulated.
pub fn estimate_student_stats(
    config: &MarketConfig,
    indices: &[usize],
    top: usize,
    reps: u64,
) -> Result<Vec<StudentStats>> {
    let last = check_indices(config, indices)?;
    if top == 0 || top > config.d {
        return Err(Error::config(format!(
            "rank threshold k = {top} must lie in 1..={}",
            config.d
        )));
    }
    let blocks = replicate(
        config,
        reps,
        || vec![StudentSums::default(); indices.len()],
        |acc, market, stream| {
            let out = market.simulate(last, stream);
            for (slot, &i) in acc.iter_mut().zip(indices) {
                let rank = out.rank(i);
                let t = out.taken_before(i) as u128;
                slot.matched += rank.is_matched() as u128;
                slot.within += rank.within(top) as u128;
                slot.taken += t;
                slot.taken_sq += t * t;
            }
        },
    )?;
    let mut total = vec![StudentSums::default(); indices.len()];
    for block in blocks {
        for (t, b) in total.iter_mut().zip(block) {
            t.matched += b.matched;
            t.within += b.within;
            t.taken += b.taken;
            t.taken_sq += b.taken_sq;
        }
    }
    Ok(indices
        .iter()
        .zip(total)
        .map(|(&i, s)| StudentStats {
            i,
            p_match: Estimate::from_integer_sums(s.matched, s.matched, reps),
            rank_cdf: Estimate::from_integer_sums(s.within, s.within, reps),
            taken_mean: Estimate::from_integer_sums(s.taken, s.taken_sq, reps),
        })
        .collect())
}

/// Column names of per-student statistics tables.
pub const STATS_HEADER: [&str; 9] = [
    "i", "d", "q", "dist", "reps", "p_match", "stderr", "rank_cdf_k", "taken_mean",
];

/// Appends one row per student in the [`STATS_HEADER`] layout.
pub fn push_stats_rows(table: &mut Table, config: &MarketConfig, stats: &[StudentStats]) {
    for s in stats {
        table.push(vec![
            s.i.into(),
            config.d.into(),
            config.q.into(),
            Cell::Text(config.dist.kind().name().to_string()),
            s.p_match.reps.into(),
            s.p_match.mean.into(),
            s.p_match.stderr.into(),
            s.rank_cdf.mean.into(),
            s.taken_mean.mean.into(),
        ]);
    }
}

/// `P(M_i = 1)` for each requested student.
pub fn estimate_match_prob(
    config: &MarketConfig,
    indices: &[usize],
    reps: u64,
) -> Result<Vec<Estimate>> {
    Ok(estimate_student_stats(config, indices, config.d, reps)?
        .into_iter()
        .map(|s| s.p_match)
        .collect())
}

/// `P(K_i <= top)` for one student.
pub fn estimate_rank_cdf(config: &MarketConfig, i: usize, top: usize, reps: u64) -> Result<Estimate> {
    Ok(estimate_student_stats(config, &[i], top, reps)?[0].rank_cdf)
}

/// Fraction of full schools along the student axis, compared with the
/// continuum solution.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryEstimate {
    pub t_grid: Vec<f64>,
    /// Mean of `T_{floor(tn)} / n` at each grid point.
    pub mean_fraction: Vec<f64>,
    pub fraction_stderr: Vec<f64>,
    /// Continuum `x_d(t)` at each grid point.
    pub continuum: Vec<f64>,
    /// Mean of `|T_{floor(tn)} / n - x_d(t)|` at each grid point.
    pub mean_abs_deviation: Vec<f64>,
    /// Per replication, `max_t |T_{floor(tn)} / n - x_d(t)|` over the grid.
    pub sup_deviation_samples: Vec<f64>,
}

impl TrajectoryEstimate {
    pub fn median_sup_deviation(&self) -> f64 {
        median(&self.sup_deviation_samples)
    }

    pub fn mean_sup_deviation(&self) -> f64 {
        self.sup_deviation_samples.iter().sum::<f64>() / self.sup_deviation_samples.len() as f64
    }

    /// Largest grid-point mean absolute deviation (the `r = 1` moment).
    pub fn max_mean_abs_deviation(&self) -> f64 {
        self.mean_abs_deviation.iter().copied().fold(0.0, f64::max)
    }
}

pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Student index `floor(t n)`, robust to `t` being a rounded grid value.
fn students_by(t: f64, n: usize) -> usize {
    (t * n as f64 + 1e-9).floor() as usize
}

struct TrajectorySums {
    fraction: Vec<f64>,
    fraction_sq: Vec<f64>,
    abs_dev: Vec<f64>,
    sup: Vec<f64>,
}

/// Tracks `T_{floor(tn)} / n` on `grid_points` equally spaced times in
/// `[0, t_max]` and its deviation from the continuum solution.
pub fn estimate_trajectory(
    config: &MarketConfig,
    t_max: f64,
    grid_points: usize,
    reps: u64,
) -> Result<TrajectoryEstimate> {
    config.validate()?;
    if !(t_max >= 0.0) || grid_points == 0 || (grid_points == 1 && t_max > 0.0) {
        return Err(Error::config(
            "need t_max >= 0 and at least two grid points when t_max > 0",
        ));
    }
    let n = config.n;
    let needed = (t_max * n as f64).ceil() as usize;
    if config.m < needed {
        return Err(Error::config(format!(
            "m = {} students cannot reach t = {t_max} (needs {needed})",
            config.m
        )));
    }
    let t_grid: Vec<f64> = if grid_points == 1 {
        vec![0.0]
    } else {
        (0..grid_points)
            .map(|g| t_max * g as f64 / (grid_points - 1) as f64)
            .collect()
    };
    if grid_points > 1 && t_max / (grid_points - 1) as f64 > 1.0 / n as f64 {
        warn!(
            "trajectory grid spacing {} exceeds 1/n = {}; sup deviation is under-estimated",
            t_max / (grid_points - 1) as f64,
            1.0 / n as f64
        );
    }
    let continuum = continuum_reference(config, t_max)?;
    let reference: Vec<f64> = t_grid.iter().map(|&t| continuum.x_at(t)).collect();
    let cutoffs: Vec<usize> = t_grid.iter().map(|&t| students_by(t, n).min(config.m)).collect();
    let students = *cutoffs.last().expect("non-empty grid");
    let g = t_grid.len();

    let blocks = replicate(
        config,
        reps,
        || TrajectorySums {
            fraction: vec![0.0; g],
            fraction_sq: vec![0.0; g],
            abs_dev: vec![0.0; g],
            sup: Vec::new(),
        },
        |acc, market, stream| {
            let out = market.simulate(students, stream);
            let mut sup = 0.0f64;
            for j in 0..g {
                let frac = out.taken_trajectory[cutoffs[j]] as f64 / n as f64;
                let dev = (frac - reference[j]).abs();
                acc.fraction[j] += frac;
                acc.fraction_sq[j] += frac * frac;
                acc.abs_dev[j] += dev;
                sup = sup.max(dev);
            }
            acc.sup.push(sup);
        },
    )?;

    let mut fraction = vec![0.0; g];
    let mut fraction_sq = vec![0.0; g];
    let mut abs_dev = vec![0.0; g];
    let mut sup = Vec::with_capacity(reps as usize);
    for b in blocks {
        for j in 0..g {
            fraction[j] += b.fraction[j];
            fraction_sq[j] += b.fraction_sq[j];
            abs_dev[j] += b.abs_dev[j];
        }
        sup.extend(b.sup);
    }
    let r = reps as f64;
    let mean_fraction: Vec<f64> = fraction.iter().map(|s| s / r).collect();
    let fraction_stderr = fraction_sq
        .iter()
        .zip(&mean_fraction)
        .map(|(sq, mean)| {
            if reps < 2 {
                0.0
            } else {
                ((sq - r * mean * mean).max(0.0) / (r - 1.0) / r).sqrt()
            }
        })
        .collect();
    Ok(TrajectoryEstimate {
        t_grid,
        mean_fraction,
        fraction_stderr,
        continuum: reference,
        mean_abs_deviation: abs_dev.iter().map(|s| s / r).collect(),
        sup_deviation_samples: sup,
    })
}

/// Per replication, `T_{floor(tn)} / n` at each time in `t_grid`.
pub fn sample_trajectories(config: &MarketConfig, t_grid: &[f64], reps: u64) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let n = config.n;
    let cutoffs: Vec<usize> = t_grid.iter().map(|&t| students_by(t, n)).collect();
    let students = cutoffs.iter().copied().max().unwrap_or(0);
    if students > config.m || t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::config(format!(
            "times must lie in [0, m/n] = [0, {}]",
            config.m as f64 / n as f64
        )));
    }
    let blocks = replicate(config, reps, Vec::new, |acc: &mut Vec<Vec<f64>>, market, stream| {
        let out = market.simulate(students, stream);
        acc.push(
            cutoffs
                .iter()
                .map(|&j| out.taken_trajectory[j] as f64 / n as f64)
                .collect(),
        );
    })?;
    Ok(blocks.into_iter().flatten().collect())
}

fn continuum_reference(config: &MarketConfig, t_max: f64) -> Result<OdeSolution<f64>> {
    let d = config.d as f64;
    if config.q == 1 {
        solve_ivp(d, t_max, 1e-3)
    } else {
        multi_seat_solve(d, config.q, t_max, 1e-3)
    }
}

/// Match probability of a student in a random arrival order (Random Serial
/// Dictatorship) with `config.m` students and one seat per school.
///
/// Two estimators are formed from the same replications: the fraction of
/// students matched, and `n / m` times the chance that one fixed school is
/// taken (for non-uniform laws, `E[T_{m+1}] / m`). They must agree within
/// [`CONSISTENCY_SIGMAS`] combined standard errors.
pub fn estimate_rsd(config: &MarketConfig, reps: u64) -> Result<Estimate> {
    if config.q != 1 {
        return Err(Error::config("random serial dictatorship estimate needs q = 1"));
    }
    let (n, m) = (config.n as u128, config.m);
    let uniform = config.dist.is_uniform();
    let blocks = replicate(
        config,
        reps,
        || [0u128; 4],
        |acc, market, stream| {
            let out = market.simulate(m, stream);
            let matched = out.taken_trajectory[m] as u128;
            let school = if uniform {
                market.is_full(0) as u128 * n
            } else {
                matched
            };
            acc[0] += matched;
            acc[1] += matched * matched;
            acc[2] += school;
            acc[3] += school * school;
        },
    )?;
    let s = blocks.iter().fold([0u128; 4], |mut t, b| {
        for k in 0..4 {
            t[k] += b[k];
        }
        t
    });
    let scale = |e: Estimate| Estimate {
        mean: e.mean / m as f64,
        stderr: e.stderr / m as f64,
        reps,
    };
    let direct = scale(Estimate::from_integer_sums(s[0], s[1], reps));
    let identity = scale(Estimate::from_integer_sums(s[2], s[3], reps));
    let tol = CONSISTENCY_SIGMAS * direct.combined_stderr(&identity);
    if (direct.mean - identity.mean).abs() > tol {
        return Err(Error::Consistency(format!(
            "fraction matched {} vs school identity {} differ by more than {tol}",
            direct.mean, identity.mean
        )));
    }
    Ok(direct)
}

/// Chance that school 1 is full just before student `i`.
///
/// For the uniform law this equals `E[T_i] / n` by symmetry, which is
/// checked against an estimate from the same replications.
pub fn estimate_school_match_prob(config: &MarketConfig, i: usize, reps: u64) -> Result<Estimate> {
    check_indices(config, &[i])?;
    let uniform = config.dist.is_uniform();
    let blocks = replicate(
        config,
        reps,
        || [0u128; 3],
        |acc, market, stream| {
            for _ in 1..i {
                market.student_turn(stream);
            }
            let t = market.taken() as u128;
            acc[0] += market.is_full(0) as u128;
            acc[1] += t;
            acc[2] += t * t;
        },
    )?;
    let s = blocks.iter().fold([0u128; 3], |mut t, b| {
        for k in 0..3 {
            t[k] += b[k];
        }
        t
    });
    let school = Estimate::from_integer_sums(s[0], s[0], reps);
    if uniform {
        let n = config.n as f64;
        let taken = Estimate::from_integer_sums(s[1], s[2], reps);
        let share = Estimate {
            mean: taken.mean / n,
            stderr: taken.stderr / n,
            reps,
        };
        let tol = CONSISTENCY_SIGMAS * school.combined_stderr(&share);
        if (school.mean - share.mean).abs() > tol {
            return Err(Error::Consistency(format!(
                "school-1 frequency {} vs E[T_i]/n {} differ by more than {tol}",
                school.mean, share.mean
            )));
        }
    }
    Ok(school)
}
