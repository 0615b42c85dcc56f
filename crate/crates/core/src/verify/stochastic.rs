//! Claims checked by simulation, with the 3-standard-error policy.

use crate::continuum::solve_ivp;
use crate::error::{Error, Result};
use crate::market::{DistributionKind, DistributionSpec, MarketConfig};
use crate::montecarlo::{
    estimate_rsd, estimate_student_stats, estimate_trajectory, Estimate, CONSISTENCY_SIGMAS,
};
use crate::oracle::exact_match_curve;
use crate::table::Table;

use super::{finite_n_slack, ids, VerificationReport, EXACT_TOL};

/// `(long - short) + 3 * combined stderr`: negative means the longer list
/// is significantly worse.
pub(super) fn order_slack(short: &Estimate, long: &Estimate) -> f64 {
    long.mean - short.mean + CONSISTENCY_SIGMAS * short.combined_stderr(long)
}

fn list(ds: &[usize]) -> String {
    ds.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Students up to which monotonicity in `d` is asserted: everyone in a
/// balanced market, or the first half under the degenerate law, which acts
/// like a market with half as many schools.
pub fn asserted_horizon(kind: DistributionKind, n: usize) -> usize {
    if kind == DistributionKind::Degenerate {
        n / 2
    } else {
        n
    }
}

/// Simulated match probability nondecreasing in `d` for every `i <= n`
/// under a school popularity law. Under the degenerate law only `i <= n/2`
/// is asserted and later violations are reported as a finding.
pub fn verify_main_discrete_mc(
    n: usize,
    d_set: &[usize],
    kind: DistributionKind,
    reps: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let mut ds = d_set.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let horizon = asserted_horizon(kind, n);
    let mut report = VerificationReport::new(ids::MAIN_DISCRETE)
        .scope("n", n)
        .scope("d", list(&ds))
        .scope("dist", kind)
        .scope("method", "monte-carlo")
        .scope("reps", reps)
        .scope("seed", seed)
        .scope("asserted_i", format!("1..={horizon}"));
    let dist = DistributionSpec::named(kind, n)?;
    let indices: Vec<usize> = (1..=n).collect();
    let mut curves = Vec::with_capacity(ds.len());
    let mut table = Table::new(crate::montecarlo::STATS_HEADER);
    for &d in &ds {
        let config = MarketConfig::uniform(n, d, n).with_dist(dist.clone()).with_seed(seed);
        let stats = estimate_student_stats(&config, &indices, 1, reps)?;
        crate::montecarlo::push_stats_rows(&mut table, &config, &stats);
        curves.push(stats);
    }
    let mut late = Vec::new();
    for w in 0..ds.len().saturating_sub(1) {
        for i in 0..n {
            let slack = order_slack(&curves[w][i].p_match, &curves[w + 1][i].p_match);
            if i < horizon {
                report.slack(slack);
            } else if slack < 0.0 {
                late.push((ds[w], ds[w + 1], i + 1));
            }
        }
    }
    if let Some(&(d, l, i)) = late.first() {
        report.detail(format!(
            "{} significant violations beyond i={horizon}; first: d={d} vs {l} at i={i}",
            late.len()
        ));
    }
    report.table("curves", table);
    Ok(report.judge_with_finding(false, !late.is_empty()))
}

/// Sup deviation of the scaled taken count from the continuum path
/// shrinks with `n`: median and mean over replications of
/// `sup_t |T_{floor(tn)}/n - x_d(t)|`, and the largest pointwise mean
/// deviation, all strictly decrease along `n_set`.
pub fn verify_xts_convergence(
    n_set: &[usize],
    d: usize,
    t_max: f64,
    reps: u64,
    seed: u64,
) -> Result<VerificationReport> {
    if n_set.is_empty() || n_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("market sizes must be increasing"));
    }
    let mut report = VerificationReport::new(ids::XTS)
        .scope("n", list(n_set))
        .scope("d", d)
        .scope("t_max", t_max)
        .scope("reps", reps)
        .scope("seed", seed);
    let mut table = Table::new(["n", "median_sup", "mean_sup", "max_mean_abs"]);
    let mut rows = Vec::new();
    for &n in n_set {
        let m = ((t_max * n as f64).ceil() as usize).max(1);
        let grid = (t_max * n as f64 + 1e-9).floor() as usize + 1;
        let config = MarketConfig::uniform(n, d, m).with_seed(seed);
        let traj = estimate_trajectory(&config, t_max, grid, reps)?;
        let row = (
            traj.median_sup_deviation(),
            traj.mean_sup_deviation(),
            traj.max_mean_abs_deviation(),
        );
        report.detail(format!(
            "n={n}: median sup {:.5}, mean sup {:.5}, sqrt(n)*median {:.4}",
            row.0,
            row.1,
            row.0 * (n as f64).sqrt()
        ));
        table.push(vec![n.into(), row.0.into(), row.1.into(), row.2.into()]);
        rows.push(row);
    }
    if t_max == 0.0 {
        let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        report.slack(-worst);
        report.table("deviation", table);
        return Ok(report.judge(false));
    }
    for w in rows.windows(2) {
        report.slack(w[0].0 - w[1].0);
        report.slack(w[0].1 - w[1].1);
        report.slack(w[0].2 - w[1].2);
    }
    if n_set.len() >= 2 {
        let xs: Vec<f64> = n_set.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
        report.detail(format!("log-log slope of median sup: {:.3}", slope(&xs, &ys)));
    }
    report.table("deviation", table);
    Ok(report.judge(true))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Finite-market match probability tracks the continuum match rate:
/// exactly, `|P(M_i) - x_d'((i-1)/n)| <= 5 d^2 / n` for `i <= 2n`; by
/// simulation, `|E[T_{floor(tn)}]/n - x_d(t)| <= 3 stderr + 5 d^2 / n` on
/// `t ∈ [0, 2]`.
pub fn verify_prob_to_xprime(
    n: usize,
    d_set: &[usize],
    reps: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(ids::PROB_TO_XPRIME)
        .scope("n", n)
        .scope("d", list(d_set))
        .scope("i", format!("1..={}", 2 * n))
        .scope("reps", reps)
        .scope("seed", seed);
    let mut table = Table::new(["i", "d", "p_match_exact", "continuum_rate"]);
    for &d in d_set {
        let slack = finite_n_slack(n, d);
        let sol = solve_ivp(d as f64, 2.0, 1e-3)?;
        let exact = exact_match_curve::<f64>(n, d, 2 * n)?;
        let mut worst = 0.0f64;
        for (i, p) in exact.iter().enumerate() {
            let rate = sol.match_rate_at(i as f64 / n as f64);
            worst = worst.max((p - rate).abs());
            if i % 10 == 0 {
                table.push(vec![(i + 1).into(), d.into(), (*p).into(), rate.into()]);
            }
        }
        report.slack(slack - worst);
        report.detail(format!("d={d}: exact max |P(M_i) - rate| {worst:.3e} (allowed {slack:.3e})"));

        let config = MarketConfig::uniform(n, d, 2 * n).with_seed(seed);
        let traj = estimate_trajectory(&config, 2.0, 2 * n + 1, reps)?;
        let mut worst_mc = f64::INFINITY;
        for j in 0..traj.t_grid.len() {
            let dev = (traj.mean_fraction[j] - traj.continuum[j]).abs();
            worst_mc = worst_mc.min(CONSISTENCY_SIGMAS * traj.fraction_stderr[j] + slack - dev);
        }
        report.slack(worst_mc);
        report.detail(format!("d={d}: simulated fraction worst slack {worst_mc:.3e}"));
    }
    report.table("rates", table);
    Ok(report.judge(false))
}

/// Random Serial Dictatorship: a uniformly placed student's match
/// probability is nondecreasing in `d`, exactly and by simulation, and the
/// simulated values agree with the exact ones.
pub fn verify_corollary_serial(
    n: usize,
    m: usize,
    d_set: &[usize],
    reps: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let mut ds = d_set.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let mut report = VerificationReport::new(ids::COROLLARY_SERIAL)
        .scope("n", n)
        .scope("m", m)
        .scope("d", list(&ds))
        .scope("reps", reps)
        .scope("seed", seed);
    let mut table = Table::new(["d", "exact", "estimate", "stderr"]);
    let mut rows: Vec<(f64, Estimate)> = Vec::new();
    for &d in &ds {
        let exact = exact_match_curve::<f64>(n, d, m)?.iter().sum::<f64>() / m as f64;
        let config = MarketConfig::uniform(n, d, m).with_seed(seed);
        let est = estimate_rsd(&config, reps)?;
        report.slack(CONSISTENCY_SIGMAS * est.stderr - (est.mean - exact).abs());
        table.push(vec![d.into(), exact.into(), est.mean.into(), est.stderr.into()]);
        report.detail(format!("d={d}: exact {exact:.6}, simulated {:.6} ± {:.2e}", est.mean, est.stderr));
        rows.push((exact, est));
    }
    for w in rows.windows(2) {
        report.slack(w[1].0 - w[0].0 + EXACT_TOL);
        report.slack(order_slack(&w[0].1, &w[1].1));
    }
    report.table("rsd", table);
    Ok(report.judge(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Status;

    #[test]
    fn xts_zero_horizon_is_exact() {
        let r = verify_xts_convergence(&[50, 100], 2, 0.0, 20, 1).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn small_stochastic_suites() {
        let p = verify_prob_to_xprime(300, &[1, 2], 400, 3).unwrap();
        assert_eq!(p.status, Status::Pass, "{:?}", p.details);
        let c = verify_corollary_serial(100, 100, &[1, 2, 4], 4000, 5).unwrap();
        assert_eq!(c.status, Status::Pass, "{:?}", c.details);
        let m = verify_main_discrete_mc(100, &[1, 2, 4], DistributionKind::TwoClass, 2000, 9).unwrap();
        assert_eq!(m.status, Status::Pass, "{:?}", m.details);
    }

    #[test]
    fn degenerate_horizon_is_half() {
        assert_eq!(asserted_horizon(DistributionKind::Degenerate, 1000), 500);
        assert_eq!(asserted_horizon(DistributionKind::ParetoLow, 1000), 1000);
    }
}
