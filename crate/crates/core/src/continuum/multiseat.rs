//! Continuum market with `q` seats per school.
//!
//! `y^k(t)` is the fraction of schools with exactly `k` seats taken and
//! `x(t)` the fraction that are full. An arriving student matches with rate
//! `1 - x^d`, spread over non-full schools in proportion to `y^k`, giving
//!
//! ```text
//! y0' = -γ y0,   yk' = γ (y{k-1} - yk),   x' = γ y{q-1},   γ = (1 - x^d) / (1 - x).
//! ```
//!
//! For `d = 1`, `γ = 1` and the solution is the Erlang(q, 1) law. For other
//! `d` the same curves are traversed on the clock `τ' = γ(x1(τ))`.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_d, check_grid, rk4, OdeSolution};
use crate::error::{Error, Result};
use crate::scalar::Real;

const CONSERVATION_TOL: f64 = 1e-6;
/// Maximum allowed gap between the direct and clock-change constructions.
pub const CROSS_CHECK_TOL: f64 = 1e-4;

/// `γ(x) = (1 - x^d) / (1 - x)`, evaluated without the removable `0/0`.
///
/// Integer `d` uses `1 + x + ... + x^(d-1)`; other `d` use the ratio, or the
/// expansion `d (1 + (d - 1)(x - 1)/2)` within `1e-6` of `x = 1`.
pub fn gamma<R: Real>(x: R, d: R) -> R {
    if d.fract() == R::zero() && d <= R::lit(1e6) {
        let terms = d.to_usize().expect("integer d");
        (0..terms).fold(R::zero(), |acc, _| acc * x + R::one())
    } else if R::one() - x < R::lit(1e-6) {
        d * (R::one() + (d - R::one()) * (x - R::one()) / R::lit(2.0))
    } else {
        (R::one() - x.powf(d)) / (R::one() - x)
    }
}

/// Erlang(q, 1) solution at time `t`: `(x, [y^0, ..., y^(q-1)])`.
pub fn erlang_solution<R: Real>(q: usize, t: R) -> (R, Vec<R>) {
    let e = (-t).exp();
    let mut ys = Vec::with_capacity(q);
    let mut term = e;
    for k in 0..q {
        if k > 0 {
            term = term * t / R::from_usize(k).expect("small k");
        }
        ys.push(term);
    }
    let x = R::one() - ys.iter().fold(R::zero(), |a, b| a + *b);
    (x, ys)
}

fn check_seats(q: usize) -> Result<()> {
    if q == 0 {
        return Err(Error::domain("seats per school q must be at least 1"));
    }
    Ok(())
}

/// Integrates the `(q + 1)`-dimensional system directly.
pub fn multi_seat_solve<R: Real>(d: R, q: usize, t_max: R, step: R) -> Result<OdeSolution<R>> {
    check_d(d)?;
    check_seats(q)?;
    check_grid(t_max, step)?;
    let mut init = vec![R::zero(); q + 1];
    init[0] = R::one();
    let traj = rk4::integrate(
        |_, s: &[R], ds: &mut [R]| {
            let g = gamma(s[q], d);
            ds[0] = -g * s[0];
            for k in 1..q {
                ds[k] = g * (s[k - 1] - s[k]);
            }
            ds[q] = g * s[q - 1];
        },
        &init,
        t_max,
        step,
    );

    let tol = R::lit(CONSERVATION_TOL);
    for j in 0..traj.t.len() {
        let total = traj.state(j).iter().fold(R::zero(), |a, b| a + *b);
        if (total - R::one()).abs() > tol {
            return Err(Error::Instability(format!(
                "seat fractions sum to {total:?} at t = {:?}",
                traj.t[j]
            )));
        }
    }
    let x = traj.component(q);
    let escape = R::lit(super::ESCAPE_TOL);
    if x.iter().any(|v| !(*v >= -escape && *v <= R::one() + escape)) {
        return Err(Error::Instability("full-school fraction left [0, 1]".into()));
    }
    let y: Vec<Vec<R>> = (0..q).map(|k| traj.component(k)).collect();
    let x_prime = (0..traj.t.len())
        .map(|j| gamma(x[j], d) * y[q - 1][j])
        .collect();
    Ok(OdeSolution {
        d,
        q,
        step: traj.step(),
        t_grid: traj.t,
        x,
        x_prime,
        y: Some(y),
    })
}

/// Solves the scalar clock `τ' = γ(x1(τ))`, `τ(0) = 0`, then reads every
/// fraction off the Erlang solution at `τ(t)`.
pub fn tau_rescaled_solve<R: Real>(d: R, q: usize, t_max: R, step: R) -> Result<OdeSolution<R>> {
    check_d(d)?;
    check_seats(q)?;
    check_grid(t_max, step)?;
    let rate = |tau: R| gamma(erlang_solution(q, tau).0, d);
    let traj = rk4::integrate(
        |_, s: &[R], ds: &mut [R]| ds[0] = rate(s[0]),
        &[R::zero()],
        t_max,
        step,
    );
    let mut x = Vec::with_capacity(traj.t.len());
    let mut x_prime = Vec::with_capacity(traj.t.len());
    let mut y = vec![Vec::with_capacity(traj.t.len()); q];
    for &tau in &traj.states {
        let (xv, ys) = erlang_solution(q, tau);
        // d/dt x1(τ) = y^(q-1)(τ) τ'.
        x_prime.push(ys[q - 1] * gamma(xv, d));
        x.push(xv);
        for (k, v) in ys.into_iter().enumerate() {
            y[k].push(v);
        }
    }
    Ok(OdeSolution {
        d,
        q,
        step: traj.step(),
        t_grid: traj.t,
        x,
        x_prime,
        y: Some(y),
    })
}

/// A single `(q, d)` comparison of list lengths `d` and `d + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct ConjecturePair {
    pub q: usize,
    pub d: usize,
    /// `min_t (1 - x_{d+1}^{d+1}) - (1 - x_d^d)` over the scanned grid.
    pub min_gap: f64,
    pub argmin_t: f64,
    /// Grid points where the gap is below `-eps`.
    pub violations: usize,
}

/// Result of scanning match-rate monotonicity in `d` for multi-seat markets.
#[derive(Clone, Debug, Serialize)]
pub struct ConjectureScan {
    pub q_max: usize,
    pub d_max: usize,
    pub eps: f64,
    pub step: f64,
    pub pairs: Vec<ConjecturePair>,
    /// Largest `|x_direct - x_tau|` over all solves.
    pub cross_check_gap: f64,
}

impl ConjectureScan {
    pub fn violations(&self) -> usize {
        self.pairs.iter().map(|p| p.violations).sum()
    }

    pub fn worst(&self) -> Option<&ConjecturePair> {
        self.pairs
            .iter()
            .min_by(|a, b| a.min_gap.total_cmp(&b.min_gap))
    }
}

/// For every `q <= q_max` and `d <= d_max`, checks
/// `1 - x_{d+1}^{d+1} >= 1 - x_d^d - eps` on `t ∈ [0, t_max]`, where
/// `t_max` defaults to `q` (students up to the number of seats).
///
/// Each trajectory is computed twice, directly and through the clock
/// change, and the largest disagreement is reported alongside.
pub fn conjecture_scan(
    q_max: usize,
    d_max: usize,
    t_max: Option<f64>,
    eps: f64,
    step: f64,
) -> Result<ConjectureScan> {
    if q_max == 0 || d_max == 0 {
        return Err(Error::domain("q_max and d_max must be at least 1"));
    }
    let per_q: Vec<(Vec<ConjecturePair>, f64)> = (1..=q_max)
        .into_par_iter()
        .map(|q| -> Result<(Vec<ConjecturePair>, f64)> {
            let horizon = t_max.unwrap_or(q as f64);
            let mut rates = Vec::with_capacity(d_max + 1);
            let mut gap = 0.0f64;
            for d in 1..=d_max + 1 {
                let tau = tau_rescaled_solve(d as f64, q, horizon, step)?;
                let direct = multi_seat_solve(d as f64, q, horizon, step)?;
                for (a, b) in tau.x.iter().zip(&direct.x) {
                    gap = gap.max((a - b).abs());
                }
                let rate: Vec<f64> = (0..direct.len()).map(|j| direct.match_rate(j)).collect();
                rates.push((direct.t_grid, rate));
            }
            let pairs = (1..=d_max)
                .map(|d| {
                    let (t, short) = &rates[d - 1];
                    let (_, long) = &rates[d];
                    let mut pair = ConjecturePair {
                        q,
                        d,
                        min_gap: f64::INFINITY,
                        argmin_t: 0.0,
                        violations: 0,
                    };
                    for j in 0..t.len() {
                        let g = long[j] - short[j];
                        if g < pair.min_gap {
                            pair.min_gap = g;
                            pair.argmin_t = t[j];
                        }
                        if g < -eps {
                            pair.violations += 1;
                        }
                    }
                    pair
                })
                .collect();
            Ok((pairs, gap))
        })
        .collect::<Result<_>>()?;

    let cross_check_gap = per_q.iter().map(|(_, g)| *g).fold(0.0, f64::max);
    Ok(ConjectureScan {
        q_max,
        d_max,
        eps,
        step,
        pairs: per_q.into_iter().flat_map(|(p, _)| p).collect(),
        cross_check_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::solve_ivp;

    #[test]
    fn gamma_forms_agree() {
        for d in [1.0f64, 2.0, 3.0, 7.0] {
            for x in [0.0, 0.3, 0.9, 0.999] {
                let ratio = (1.0 - f64::powf(x, d)) / (1.0 - x);
                assert!((gamma(x, d) - ratio).abs() < 1e-12);
            }
            assert!((gamma(1.0, d) - d).abs() < 1e-12);
        }
        // Non-integer d near x = 1 uses the expansion.
        let d = 2.5f64;
        let x = 1.0 - 1e-7;
        assert!((gamma(x, d) - d).abs() < 1e-6);
        let x = 1.0 - 1e-5;
        assert!((gamma(x, d) - (1.0 - f64::powf(x, d)) / (1.0 - x)).abs() < 1e-9);
    }

    #[test]
    fn erlang_closed_form_d1() {
        let sol = multi_seat_solve(1.0f64, 4, 12.0, 1e-3).unwrap();
        for (j, &t) in sol.t_grid.iter().enumerate() {
            let (x, ys) = erlang_solution(4, t);
            assert!((sol.x[j] - x).abs() <= 1e-6);
            for k in 0..4 {
                assert!((sol.y.as_ref().unwrap()[k][j] - ys[k]).abs() <= 1e-6);
            }
        }
        let two_seat = multi_seat_solve(1.0f64, 2, 1.0, 1e-3).unwrap();
        let x1 = *two_seat.x.last().unwrap();
        assert!((x1 - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-10);
        assert!((x1 - 0.26424).abs() < 1e-5);
    }

    #[test]
    fn one_seat_reduces_to_scalar() {
        for d in [1.0f64, 2.0, 3.5, 8.0] {
            let scalar = solve_ivp(d, 3.0, 1e-3).unwrap();
            let system = multi_seat_solve(d, 1, 3.0, 1e-3).unwrap();
            for j in 0..scalar.len() {
                assert!((scalar.x[j] - system.x[j]).abs() <= 1e-8);
                assert!((scalar.x_prime[j] - system.x_prime[j]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn tau_d1_is_identity_clock() {
        let sol = tau_rescaled_solve(1.0f64, 3, 5.0, 1e-3).unwrap();
        for (j, &t) in sol.t_grid.iter().enumerate() {
            let (x, _) = erlang_solution(3, t);
            assert!((sol.x[j] - x).abs() < 1e-12);
        }
    }

    #[test]
    fn tau_matches_direct() {
        let sol = tau_rescaled_solve(3.0f64, 4, 12.0, 1e-3).unwrap();
        let direct = multi_seat_solve(3.0f64, 4, 12.0, 1e-3).unwrap();
        for j in 0..sol.len() {
            assert!((sol.x[j] - direct.x[j]).abs() <= 1e-4);
            assert!((sol.x_prime[j] - direct.x_prime[j]).abs() <= 1e-4);
        }
        let tanh = tau_rescaled_solve(2.0f64, 1, 3.0, 1e-3).unwrap();
        for (j, t) in tanh.t_grid.iter().enumerate() {
            assert!((tanh.x[j] - t.tanh()).abs() <= 1e-6);
        }
    }

    #[test]
    fn conservation_holds() {
        let sol = multi_seat_solve(2.5, 5, 10.0, 1e-3).unwrap();
        let y = sol.y.as_ref().unwrap();
        for j in 0..sol.len() {
            let total: f64 = sol.x[j] + (0..5).map(|k| y[k][j]).sum::<f64>();
            assert!((total - 1.0).abs() < 1e-8);
        }
        assert_eq!(y[0][0], 1.0);
    }

    #[test]
    fn scan_flags_crossing_beyond_balanced_range() {
        let scan = conjecture_scan(1, 1, Some(1.5), 1e-6, 1e-3).unwrap();
        assert!(scan.violations() > 0);
        let worst = scan.worst().unwrap();
        assert!(worst.argmin_t > 1.219);

        let balanced = conjecture_scan(1, 20, None, 1e-6, 1e-3).unwrap();
        assert_eq!(balanced.violations(), 0);
        assert!(balanced.cross_check_gap < CROSS_CHECK_TOL);
    }

    #[test]
    fn rejects_zero_seats() {
        assert!(multi_seat_solve(2.0, 0, 1.0, 1e-3).is_err());
        assert!(tau_rescaled_solve(2.0, 0, 1.0, 1e-3).is_err());
    }
}
