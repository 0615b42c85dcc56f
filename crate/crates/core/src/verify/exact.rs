//! Claims about the finite uniform market, checked with the exact oracle.

use crate::error::{Error, Result};
use crate::montecarlo::{estimate_school_match_prob, CONSISTENCY_SIGMAS};
use crate::oracle::{exact_match_curve, exact_rank_cdf_curve, expected_taken_curve};
use crate::table::Table;
use crate::MarketConfig;

use super::{finite_n_slack, ids, VerificationReport, EXACT_TOL, LARGE_N};

fn sorted(d_set: &[usize]) -> Result<Vec<usize>> {
    let mut ds = d_set.to_vec();
    ds.sort_unstable();
    ds.dedup();
    if ds.is_empty() || ds[0] == 0 {
        return Err(Error::config("list lengths must be positive"));
    }
    Ok(ds)
}

fn list(ds: &[usize]) -> String {
    ds.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Student match probability is nondecreasing in the list length for every
/// `i <= n`, from the exact taken-count chain.
///
/// Only `n >= 1000` is asserted; smaller markets report a finding.
pub fn verify_main_discrete_exact(n: usize, d_set: &[usize]) -> Result<VerificationReport> {
    let ds = sorted(d_set)?;
    let mut report = VerificationReport::new(ids::MAIN_DISCRETE)
        .scope("n", n)
        .scope("d", list(&ds))
        .scope("method", "exact")
        .scope("i", format!("1..={n}"));
    let curves: Vec<Vec<f64>> = ds
        .iter()
        .map(|&d| exact_match_curve(n, d.min(n), n))
        .collect::<Result<_>>()?;
    let mut table = Table::new(["i", "d", "p_match"]);
    for (k, &d) in ds.iter().enumerate() {
        for (i, p) in curves[k].iter().enumerate() {
            table.push(vec![(i + 1).into(), d.into(), (*p).into()]);
        }
    }
    for w in 0..ds.len().saturating_sub(1) {
        let (short, long) = (&curves[w], &curves[w + 1]);
        let (mut worst, mut at) = (f64::INFINITY, 0);
        for i in 0..n {
            let gap = long[i] - short[i];
            if gap < worst {
                worst = gap;
                at = i + 1;
            }
        }
        report.detail(format!(
            "d={} vs d={}: min gap {worst:.3e} at i={at}",
            ds[w],
            ds[w + 1]
        ));
        report.slack(worst + EXACT_TOL);
    }
    report.table("curves", table);
    let report = report.judge(false);
    Ok(if n < LARGE_N && report.status.is_failure() {
        report.as_finding()
    } else {
        report
    })
}

/// School fill probability `E[T_i] / n` is nondecreasing in `d`, and the
/// simulated fill frequency of one school matches it.
pub fn verify_school_love(
    n: usize,
    d_set: &[usize],
    reps: u64,
    seed: u64,
) -> Result<VerificationReport> {
    let ds = sorted(d_set)?;
    let horizon = 2 * n;
    let probe = n.div_ceil(2);
    let mut report = VerificationReport::new(ids::SCHOOL_LOVE)
        .scope("n", n)
        .scope("d", list(&ds))
        .scope("i", format!("1..={horizon}"))
        .scope("reps", reps)
        .scope("seed", seed);
    let curves: Vec<Vec<f64>> = ds
        .iter()
        .map(|&d| {
            Ok(expected_taken_curve::<f64>(n, d.min(n), horizon)?
                .into_iter()
                .map(|t| t / n as f64)
                .collect())
        })
        .collect::<Result<_>>()?;
    for w in 0..ds.len().saturating_sub(1) {
        let worst = (0..horizon)
            .map(|i| curves[w + 1][i] - curves[w][i])
            .fold(f64::INFINITY, f64::min);
        report.slack(worst + EXACT_TOL);
    }
    let mut table = Table::new(["i", "d", "school_fill_exact", "school_fill_mc", "stderr"]);
    for (k, &d) in ds.iter().enumerate() {
        let config = MarketConfig::uniform(n, d.min(n), probe).with_seed(seed);
        let est = estimate_school_match_prob(&config, probe, reps)?;
        let exact = curves[k][probe - 1];
        report.slack(CONSISTENCY_SIGMAS * est.stderr - (est.mean - exact).abs());
        report.detail(format!(
            "d={d}, i={probe}: exact {exact:.6}, simulated {:.6} ± {:.2e}",
            est.mean, est.stderr
        ));
        table.push(vec![
            probe.into(),
            d.into(),
            exact.into(),
            est.mean.into(),
            est.stderr.into(),
        ]);
    }
    report.table("probe", table);
    Ok(report.judge(false))
}

/// A longer list hurts some late student: `P(M_i)` under `d` exceeds that
/// under `l` at `i = ceil(1.25 n)`. The first crossing index in `(n, 2n]` is
/// recorded.
pub fn verify_crossing_discrete(n: usize, d: usize, l: usize) -> Result<VerificationReport> {
    if !(1..=n).contains(&d) || l <= d || l > n {
        return Err(Error::config("need 1 <= d < l <= n"));
    }
    let probe = (5 * n).div_ceil(4);
    let horizon = 2 * n;
    let short = exact_match_curve::<f64>(n, d, horizon)?;
    let long = exact_match_curve::<f64>(n, l, horizon)?;
    let mut report = VerificationReport::new(ids::CROSSING_DISCRETE)
        .scope("n", n)
        .scope("d", d)
        .scope("l", l)
        .scope("i", probe);
    let margin = short[probe - 1] - long[probe - 1];
    report.slack(margin);
    report.detail(format!(
        "i={probe}: P(M)={:.9} with d={d}, {:.9} with l={l}",
        short[probe - 1],
        long[probe - 1]
    ));
    match (n..horizon).find(|&i| short[i] > long[i]) {
        Some(i) => report.detail(format!(
            "first crossing index {} (i/n = {:.4})",
            i + 1,
            (i + 1) as f64 / n as f64
        )),
        None => report.detail(format!("no crossing found in ({n}, {horizon}]")),
    }
    Ok(report.judge(true))
}

/// Last balanced student's match probability lies in
/// `[d/(2d+1), 2d/(4d+1)]` up to `5 d^2 / n`, and approaches 1/2 as `d` grows.
pub fn verify_bound_discrete(n: usize, d_max: usize) -> Result<VerificationReport> {
    if d_max == 0 || d_max > n {
        return Err(Error::config("need 1 <= d_max <= n"));
    }
    let mut report = VerificationReport::new(ids::BOUND_DISCRETE)
        .scope("n", n)
        .scope("d", format!("1..={d_max}"))
        .scope("i", n);
    let mut table = Table::new(["d", "p_match", "lower", "upper", "slack"]);
    let mut previous_gap = f64::INFINITY;
    for d in 1..=d_max {
        let p = *exact_match_curve::<f64>(n, d, n)?.last().expect("non-empty");
        let df = d as f64;
        let (lower, upper) = (df / (2.0 * df + 1.0), 2.0 * df / (4.0 * df + 1.0));
        let slack = finite_n_slack(n, d);
        report.slack((p - (lower - slack)).min(upper + slack - p));
        // Distance to one half shrinks with d.
        let gap = 0.5 - p;
        report.slack(previous_gap - gap + EXACT_TOL);
        previous_gap = gap;
        table.push(vec![d.into(), p.into(), lower.into(), upper.into(), slack.into()]);
        report.detail(format!("d={d}: {p:.6} in [{lower:.6}, {upper:.6}] ± {slack:.4}"));
    }
    report.table("sandwich", table);
    Ok(report.judge(false))
}

/// Bound on how much the top-`k` probability can drop when the list grows
/// from `d` to `d + 1`.
pub fn worst_case_rank_bound(d: usize, k: usize) -> f64 {
    let (d, k) = (d as f64, k as f64);
    ((d + 2.0) / (2.0 * d + 3.0)).powf(k / (d + 1.0))
        - ((2.0 * d + 1.0) / (4.0 * d + 1.0)).powf(k / d)
}

/// For each `(d, k)` cell, `max_{i <= n} P(K^d_i <= k) - P(K^{d+1}_i <= k)`
/// stays below the bound plus `5 (d+1)^2 / n`.
pub fn verify_worst_case_rank(n: usize, cells: &[(usize, usize)]) -> Result<VerificationReport> {
    let cells_text: Vec<String> = cells.iter().map(|(d, k)| format!("({d},{k})")).collect();
    let mut report = VerificationReport::new(ids::WORST_CASE_RANK)
        .scope("n", n)
        .scope("cells", cells_text.join(""))
        .scope("i", format!("1..={n}"));
    let mut table = Table::new(["d", "k", "max_drop", "argmax_i", "bound", "slack"]);
    for &(d, k) in cells {
        if k == 0 || k > d || d + 1 > n {
            return Err(Error::config(format!("cell (d={d}, k={k}) needs 1 <= k <= d < n")));
        }
        let short = exact_rank_cdf_curve::<f64>(n, d, n, k)?;
        let long = exact_rank_cdf_curve::<f64>(n, d + 1, n, k)?;
        let (mut drop, mut at) = (f64::NEG_INFINITY, 0);
        for i in 0..n {
            if short[i] - long[i] > drop {
                drop = short[i] - long[i];
                at = i + 1;
            }
        }
        if (short[0] - long[0]).abs() > EXACT_TOL {
            return Err(Error::Consistency("first student drop is not zero".into()));
        }
        let bound = worst_case_rank_bound(d, k);
        let slack = finite_n_slack(n, d + 1);
        report.slack(bound + slack - drop);
        report.detail(format!(
            "d={d}, k={k}: max drop {drop:.6} at i={at}, bound {bound:.6}"
        ));
        table.push(vec![d.into(), k.into(), drop.into(), at.into(), bound.into(), slack.into()]);
    }
    report.table("cells", table);
    Ok(report.judge(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Status;

    #[test]
    fn bound_formula_value() {
        assert!((worst_case_rank_bound(1, 1) - (0.6f64.sqrt() - 0.6)).abs() < 1e-15);
        assert!((worst_case_rank_bound(1, 1) - 0.1746).abs() < 1e-4);
    }

    #[test]
    fn small_market_suites_run() {
        let main = verify_main_discrete_exact(100, &[1, 2, 4]).unwrap();
        assert_ne!(main.status, Status::Fail);
        assert_eq!(verify_bound_discrete(200, 3).unwrap().status, Status::Pass);
        assert_eq!(verify_crossing_discrete(200, 1, 2).unwrap().status, Status::Pass);
        let wcr = verify_worst_case_rank(200, &[(1, 1), (2, 1)]).unwrap();
        assert_eq!(wcr.status, Status::Pass, "{:?}", wcr.details);
    }

    #[test]
    fn school_love_small() {
        let r = verify_school_love(50, &[1, 2, 3], 4000, 11).unwrap();
        assert_eq!(r.status, Status::Pass, "{:?}", r.details);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(verify_crossing_discrete(100, 2, 2).is_err());
        assert!(verify_worst_case_rank(100, &[(1, 2)]).is_err());
        assert!(verify_main_discrete_exact(100, &[0, 1]).is_err());
    }
}
