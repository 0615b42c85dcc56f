//! Claims about the continuum market, checked numerically.

use crate::continuum::{
    conjecture_scan, integral_condition, integral_condition_to, solve_ivp, xd1_bounds,
    CROSS_CHECK_TOL,
};
use crate::error::{Error, Result};
use crate::table::Table;

use super::{ids, VerificationReport, EXACT_TOL};

const FINE_STEP: f64 = 1e-4;

/// Largest value the integral of Theorem-ig style is allowed to take.
pub const INTEGRAL_TOL: f64 = 1e-8;

/// Match rates are ordered by list length on `[0, 1]`, and the rate at
/// `t = 1` lies strictly inside `(d/(2d+1), 2d/(4d+1))`.
///
/// Rates are compared for all `d < l <= pair_max`; the sandwich is checked
/// for `d <= sandwich_max`. Taken fractions are also checked to grow with
/// `d` on `[0, 3]`.
pub fn verify_bound_cts(pair_max: usize, sandwich_max: usize) -> Result<VerificationReport> {
    if pair_max < 2 || sandwich_max == 0 {
        return Err(Error::config("need pair_max >= 2 and sandwich_max >= 1"));
    }
    let mut report = VerificationReport::new(ids::BOUND_CTS)
        .scope("pairs_d", format!("1..={pair_max}"))
        .scope("sandwich_d", format!("1..={sandwich_max}"))
        .scope("t", "[0,1] rates, [0,3] fractions");
    let sols: Vec<_> = (1..=pair_max)
        .map(|d| solve_ivp(d as f64, 3.0, 1e-3))
        .collect::<Result<_>>()?;
    let unit = sols[0]
        .t_grid
        .iter()
        .position(|&t| t >= 1.0 - 1e-12)
        .expect("grid reaches 1");
    let mut worst_rate = f64::INFINITY;
    let mut worst_fraction = f64::INFINITY;
    for d in 0..pair_max {
        for l in d + 1..pair_max {
            for j in 0..sols[d].len() {
                if j <= unit {
                    worst_rate = worst_rate.min(sols[l].x_prime[j] - sols[d].x_prime[j]);
                }
                worst_fraction = worst_fraction.min(sols[l].x[j] - sols[d].x[j]);
            }
        }
    }
    report.slack(worst_rate + EXACT_TOL);
    report.slack(worst_fraction + EXACT_TOL);
    report.detail(format!("min rate gap on [0,1]: {worst_rate:.3e}"));
    report.detail(format!("min fraction gap on [0,3]: {worst_fraction:.3e}"));

    let mut table = Table::new(["d", "rate_at_1", "lower", "upper"]);
    let mut inside = f64::INFINITY;
    for d in 1..=sandwich_max {
        let df = d as f64;
        let x = *solve_ivp(df, 1.0, FINE_STEP)?.x.last().expect("non-empty");
        let rate = 1.0 - x.powf(df);
        let (lower, upper) = (df / (2.0 * df + 1.0), 2.0 * df / (4.0 * df + 1.0));
        inside = inside.min((rate - lower).min(upper - rate));
        table.push(vec![d.into(), rate.into(), lower.into(), upper.into()]);
    }
    report.detail(format!("sandwich: min distance to an endpoint {inside:.3e}"));
    report.slack(inside);
    report.table("sandwich", table);
    Ok(report.judge(true))
}

/// `x(d, 1)` lies between the two closed-form bounds on a grid of real
/// `d` in `[1, d_max]` with spacing 1/2.
pub fn verify_xd_bounds(d_max: f64) -> Result<VerificationReport> {
    if !(d_max >= 1.0) {
        return Err(Error::config("need d_max >= 1"));
    }
    let mut report = VerificationReport::new(ids::XD_BOUNDS)
        .scope("d", format!("1..={d_max} step 0.5"));
    let mut table = Table::new(["d", "x_at_1", "lower", "upper"]);
    let count = ((d_max - 1.0) * 2.0).floor() as usize;
    for j in 0..=count {
        let d = 1.0 + 0.5 * j as f64;
        let x = *solve_ivp(d, 1.0, FINE_STEP)?.x.last().expect("non-empty");
        let (lower, upper) = xd1_bounds(d)?;
        report.slack((x - lower).min(upper - x));
        table.push(vec![d.into(), x.into(), lower.into(), upper.into()]);
    }
    report.table("bounds", table);
    Ok(report.judge(false))
}

/// `∫_0^{x(d,1)} (1 + ln u) / (1 - u^d) du <= 0` for each `d`, plus the
/// sanity variant with upper limit `1/e`, which must be negative.
pub fn verify_integral_condition(d_set: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(ids::IG).scope(
        "d",
        d_set.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
    );
    let mut table = Table::new(["d", "integral", "integral_to_inv_e"]);
    for &d in d_set {
        let value = integral_condition(d)?;
        let sanity = integral_condition_to(d, (-1.0f64).exp())?;
        report.slack(INTEGRAL_TOL - value);
        report.slack(-sanity);
        report.detail(format!("d={d}: {value:.6e}; to 1/e: {sanity:.6e}"));
        table.push(vec![d.into(), value.into(), sanity.into()]);
    }
    report.table("integrals", table);
    Ok(report.judge(false))
}

/// Multi-seat match rate is nondecreasing in `d` on `t ∈ [0, q]` for all
/// `q <= q_max`, `d <= d_max`, with the direct and clock-change solutions
/// agreeing.
pub fn verify_conjecture(
    q_max: usize,
    d_max: usize,
    eps: f64,
    step: f64,
) -> Result<VerificationReport> {
    let scan = conjecture_scan(q_max, d_max, None, eps, step)?;
    let mut report = VerificationReport::new(ids::CONJECTURE)
        .scope("q", format!("1..={q_max}"))
        .scope("d", format!("1..={d_max}"))
        .scope("eps", eps)
        .scope("step", step)
        .scope("t", "[0,q]");
    let mut table = Table::new(["q", "d", "min_gap", "argmin_t", "violations"]);
    for p in &scan.pairs {
        report.slack(p.min_gap + eps);
        table.push(vec![
            p.q.into(),
            p.d.into(),
            p.min_gap.into(),
            p.argmin_t.into(),
            p.violations.into(),
        ]);
    }
    report.slack(CROSS_CHECK_TOL - scan.cross_check_gap);
    report.detail(format!("violating grid points: {}", scan.violations()));
    report.detail(format!(
        "direct vs clock-change max gap: {:.3e}",
        scan.cross_check_gap
    ));
    if let Some(w) = scan.worst() {
        report.detail(format!(
            "tightest pair q={}, d={}: gap {:.3e} at t={:.4}",
            w.q, w.d, w.min_gap, w.argmin_t
        ));
    }
    report.table("pairs", table);
    Ok(report.judge(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Status;

    #[test]
    fn continuum_suites_pass_at_small_scale() {
        assert_eq!(verify_bound_cts(5, 10).unwrap().status, Status::Pass);
        assert_eq!(verify_xd_bounds(5.0).unwrap().status, Status::Pass);
        assert_eq!(verify_integral_condition(&[1.0, 3.0]).unwrap().status, Status::Pass);
        assert_eq!(verify_conjecture(3, 3, 1e-6, 1e-3).unwrap().status, Status::Pass);
    }
}
