//! The continuum market.
//!
//! With a unit mass of schools and students arriving at rate one, the
//! fraction `x_d(t)` of full schools solves `x' = 1 - x^d`, `x(0) = 0`.
//! Equivalently `t = ∫_0^x du / (1 - u^d)`, which gives an independent check
//! of the integrator. Multi-seat schools lead to the system in [`multiseat`].

pub mod multiseat;
pub mod quad;
pub mod rk4;
pub mod root;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use multiseat::{
    conjecture_scan, erlang_solution, gamma, multi_seat_solve, tau_rescaled_solve,
    ConjecturePair, ConjectureScan, CROSS_CHECK_TOL,
};

/// Largest step accepted by the public solvers.
pub const MAX_STEP: f64 = 1e-3;
/// Absolute tolerance of all quadratures.
pub const QUAD_TOL: f64 = 1e-10;
/// Tolerance of the integral-equation self check in [`solve_ivp`].
pub const SELF_CHECK_TOL: f64 = 1e-6;
const ESCAPE_TOL: f64 = 1e-9;

/// A continuum trajectory sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeSolution<R> {
    pub d: R,
    pub q: usize,
    pub step: R,
    pub t_grid: Vec<R>,
    /// Fraction of schools with every seat taken.
    pub x: Vec<R>,
    pub x_prime: Vec<R>,
    /// `y[k][j]`: fraction of schools with exactly `k` seats taken at grid
    /// point `j`. Present for the multi-seat solvers, including `q = 1`.
    pub y: Option<Vec<Vec<R>>>,
}

impl<R: Real> OdeSolution<R> {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn t_max(&self) -> R {
        *self.t_grid.last().expect("non-empty grid")
    }

    /// `x(t)` between grid points by cubic Hermite interpolation.
    pub fn x_at(&self, t: R) -> R {
        let last = self.len() - 1;
        if last == 0 || t <= R::zero() {
            return self.x[0];
        }
        if t >= self.t_max() {
            return self.x[last];
        }
        let h = self.step;
        let j = (t / h).floor().to_usize().unwrap_or(0).min(last - 1);
        let s = (t - self.t_grid[j]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let two = R::lit(2.0);
        let three = R::lit(3.0);
        let h00 = two * s3 - three * s2 + R::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.x[j] + h10 * h * self.x_prime[j] + h01 * self.x[j + 1] + h11 * h * self.x_prime[j + 1]
    }

    /// Match probability of the arriving student, `1 - x(t)^d`.
    ///
    /// For one seat this is `x'(t)`; with several seats it is not.
    pub fn match_rate_at(&self, t: R) -> R {
        R::one() - self.x_at(t).powf(self.d)
    }

    /// Match probability at grid point `j`.
    pub fn match_rate(&self, j: usize) -> R {
        R::one() - self.x[j].powf(self.d)
    }
}

fn check_d<R: Real>(d: R) -> Result<()> {
    if !(d >= R::one()) || !d.is_finite() {
        return Err(Error::domain(format!("list length d = {d:?} must be finite and >= 1")));
    }
    Ok(())
}

fn check_grid<R: Real>(t_max: R, step: R) -> Result<()> {
    if !(t_max >= R::zero()) || !t_max.is_finite() {
        return Err(Error::domain(format!("t_max = {t_max:?} must be finite and >= 0")));
    }
    if !(step > R::zero()) || step > R::lit(MAX_STEP) {
        return Err(Error::domain(format!(
            "step = {step:?} must lie in (0, {MAX_STEP}]"
        )));
    }
    Ok(())
}

/// `u^d` with the integer fast path.
#[inline]
pub(crate) fn power<R: Real>(u: R, d: R) -> R {
    if d.fract() == R::zero() && d <= R::lit(64.0) {
        u.powi(d.to_i32().expect("small integer exponent"))
    } else {
        u.powf(d)
    }
}

/// Integrates `x' = 1 - x^d` on `[0, t_max]` with classical RK4.
///
/// The result is checked against [`invert_integral`] at `t = 0.5, 1, 2`
/// (those within range) wherever `x'` is large enough for the inversion to
/// be well conditioned.
pub fn solve_ivp<R: Real>(d: R, t_max: R, step: R) -> Result<OdeSolution<R>> {
    check_d(d)?;
    check_grid(t_max, step)?;
    let traj = rk4::integrate(
        |_, x: &[R], dx: &mut [R]| dx[0] = R::one() - power(x[0], d),
        &[R::zero()],
        t_max,
        step,
    );
    let x = traj.states.clone();
    let escape = R::lit(ESCAPE_TOL);
    if let Some(j) = x.iter().position(|v| !(*v >= -escape && *v <= R::one() + escape)) {
        return Err(Error::Instability(format!(
            "x = {:?} left [0, 1] at t = {:?}",
            x[j], traj.t[j]
        )));
    }
    let x_prime = x.iter().map(|v| R::one() - power(*v, d)).collect();
    let sol = OdeSolution {
        d,
        q: 1,
        step: traj.step(),
        t_grid: traj.t,
        x,
        x_prime,
        y: None,
    };
    self_check(&sol)?;
    Ok(sol)
}

fn self_check<R: Real>(sol: &OdeSolution<R>) -> Result<()> {
    let tol = R::lit(SELF_CHECK_TOL).max(R::epsilon().sqrt());
    for t in [0.5, 1.0, 2.0].map(R::lit) {
        if t > sol.t_max() {
            continue;
        }
        let x = sol.x_at(t);
        if R::one() - power(x, sol.d) < R::lit(1e-3) {
            continue;
        }
        let back = invert_integral(x, sol.d)?;
        if (back - t).abs() > tol {
            return Err(Error::Instability(format!(
                "integral check failed at t = {t:?}: recovered {back:?}"
            )));
        }
    }
    Ok(())
}

/// The time at which the continuum reaches `x_target`, from
/// `t = ∫_0^x du / (1 - u^d)`.
pub fn invert_integral<R: Real>(x_target: R, d: R) -> Result<R> {
    check_d(d)?;
    if !(x_target >= R::zero()) || x_target >= R::one() {
        return Err(Error::domain(format!("x = {x_target:?} must lie in [0, 1)")));
    }
    quad::integrate(
        |u| R::one() / (R::one() - power(u, d)),
        R::zero(),
        x_target,
        R::lit(QUAD_TOL),
    )
}

/// First time after `t = 1` at which lists of length `l` stop giving a
/// higher match rate than lists of length `d`.
pub fn crossing_time<R: Real>(d: R, l: R) -> Result<R> {
    check_d(d)?;
    if !(l > d) {
        return Err(Error::domain(format!("need d < l, got d = {d:?}, l = {l:?}")));
    }
    let (lo, hi) = (R::one(), R::lit(5.0));
    let step = R::lit(1e-4);
    let short = solve_ivp(d, hi, step)?;
    let long = solve_ivp(l, hi, step)?;
    let gap = |t: R| long.match_rate_at(t) - short.match_rate_at(t);

    let start = (lo / short.step).round().to_usize().expect("grid index");
    let mut bracket = None;
    for j in start..short.len() - 1 {
        let (a, b) = (short.t_grid[j], short.t_grid[j + 1]);
        if gap(a) > R::zero() && gap(b) <= R::zero() {
            bracket = Some((a, b));
            break;
        }
    }
    let (a, b) = bracket.ok_or_else(|| {
        Error::NotFound(format!("match rates for d = {d:?} and l = {l:?} do not cross on [1, 5]"))
    })?;
    root::bisect(gap, a, b, R::lit(1e-10))
}

/// Lower and upper bounds on `x(d, 1)`:
/// `((2d+1)/(4d+1))^(1/d)` and `((d+1)/(2d+1))^(1/d)`.
pub fn xd1_bounds<R: Real>(d: R) -> Result<(R, R)> {
    check_d(d)?;
    let one = R::one();
    let two = R::lit(2.0);
    let four = R::lit(4.0);
    let lower = ((two * d + one) / (four * d + one)).powf(one / d);
    let upper = ((d + one) / (two * d + one)).powf(one / d);
    Ok((lower, upper))
}

/// `∫_0^{x(d,1)} (1 + ln u) / (1 - u^d) du`, which is never positive.
pub fn integral_condition<R: Real>(d: R) -> Result<R> {
    check_d(d)?;
    let x1 = *solve_ivp(d, R::one(), R::lit(1e-4))?.x.last().expect("non-empty");
    integral_condition_to(d, x1)
}

/// The same integral up to an arbitrary `upper < 1`.
///
/// The log singularity at zero is split off analytically:
/// `(1 + ln u)/(1 - u^d) = (1 + ln u) + (1 + ln u) u^d / (1 - u^d)`, where
/// the first term integrates to `X ln X` and the second is bounded.
pub fn integral_condition_to<R: Real>(d: R, upper: R) -> Result<R> {
    check_d(d)?;
    if !(upper >= R::zero()) || upper >= R::one() {
        return Err(Error::domain(format!("upper limit {upper:?} must lie in [0, 1)")));
    }
    if upper == R::zero() {
        return Ok(R::zero());
    }
    let singular = upper * upper.ln();
    let regular = quad::integrate(
        |u: R| {
            let ud = power(u, d);
            (R::one() + u.ln()) * ud / (R::one() - ud)
        },
        R::zero(),
        upper,
        R::lit(QUAD_TOL),
    )?;
    Ok(singular + regular)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(sol: &OdeSolution<f64>, exact: impl Fn(f64) -> f64) -> f64 {
        sol.t_grid
            .iter()
            .zip(&sol.x)
            .map(|(t, x)| (x - exact(*t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn closed_forms() {
        let s1 = solve_ivp(1.0, 3.0, 1e-3).unwrap();
        assert!(max_err(&s1, |t| 1.0 - (-t).exp()) <= 1e-8);
        let s2 = solve_ivp(2.0, 3.0, 1e-3).unwrap();
        assert!(max_err(&s2, f64::tanh) <= 1e-8);
        for (t, xp) in s2.t_grid.iter().zip(&s2.x_prime) {
            assert!((xp - 1.0 / t.cosh().powi(2)).abs() <= 1e-8);
        }
        assert_eq!(s2.x[0], 0.0);
        assert!(s2.x.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn d3_at_one_inside_bounds() {
        let s = solve_ivp(3.0, 1.0, 1e-3).unwrap();
        let x1 = *s.x.last().unwrap();
        let (lo, hi) = xd1_bounds(3.0).unwrap();
        assert!((lo - (7.0f64 / 13.0).cbrt()).abs() < 1e-15);
        assert!((hi - (4.0f64 / 7.0).cbrt()).abs() < 1e-15);
        assert!(lo <= x1 && x1 <= hi);
    }

    #[test]
    fn halving_step_gives_fourth_order() {
        // Below the public step limit the error is at rounding level, so use
        // the integrator directly with coarse steps.
        for (d, exact) in [(1, (|t: f64| 1.0 - (-t).exp()) as fn(f64) -> f64), (2, f64::tanh)] {
            let err = |h: f64| {
                let traj = rk4::integrate(
                    |_, x: &[f64], dx: &mut [f64]| dx[0] = 1.0 - x[0].powi(d),
                    &[0.0],
                    3.0,
                    h,
                );
                traj.t
                    .iter()
                    .zip(&traj.states)
                    .map(|(t, x)| (x - exact(*t)).abs())
                    .fold(0.0, f64::max)
            };
            let ratio = err(0.2) / err(0.1);
            assert!(ratio >= 8.0, "d = {d}: ratio {ratio}");
        }
    }

    #[test]
    fn invert_integral_examples() {
        assert_eq!(invert_integral(0.0, 3.0).unwrap(), 0.0);
        let e = invert_integral(1.0 - (-1.0f64).exp(), 1.0).unwrap();
        assert!((e - 1.0).abs() < 1e-8);
        let e = invert_integral(1.0f64.tanh(), 2.0).unwrap();
        assert!((e - 1.0).abs() < 1e-8);
        assert!(invert_integral(1.0, 2.0).is_err());
        assert!(invert_integral(1.5, 2.0).is_err());
    }

    #[test]
    fn crossing_examples() {
        let t = crossing_time(1.0, 2.0).unwrap();
        // Independent route: solve 4u = (1 + u^2)^2 with u = e^{-t}, the
        // crossing of sech^2 and exp(-t).
        let u = root::bisect(|u: f64| 4.0 * u - (1.0 + u * u).powi(2), 0.1, 0.5, 1e-15).unwrap();
        assert!((t + u.ln()).abs() < 1e-7, "t = {t}, closed form {}", -u.ln());
        assert!((t - 1.219).abs() < 1e-3);
        assert!(crossing_time(2.0, 2.0).is_err());
        assert!(crossing_time(3.0, 2.0).is_err());
        let t14 = crossing_time(1.0, 4.0).unwrap();
        assert!(t14 > 1.0 && t14 < 5.0);
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = xd1_bounds(1.0f64).unwrap();
        assert!((lo - 0.6).abs() < 1e-15 && (hi - 2.0 / 3.0).abs() < 1e-15);
        let x = 1.0 - (-1.0f64).exp();
        assert!(lo < x && x < hi);
        let (lo, hi) = xd1_bounds(2.0).unwrap();
        assert!((lo - (5.0f64 / 9.0).sqrt()).abs() < 1e-15);
        assert!((hi - 0.6f64.sqrt()).abs() < 1e-15);
        assert!(lo < 1.0f64.tanh() && 1.0f64.tanh() < hi);
        let mut prev = (0.0, 0.0);
        for d in 1..=100 {
            let b = xd1_bounds(d as f64).unwrap();
            assert!(b.0 > prev.0 && b.1 > prev.1 && b.0 < b.1 && b.1 < 1.0);
            prev = b;
        }
        assert!(1.0 - prev.0 < 0.05);
        assert!(xd1_bounds(0.5).is_err());
    }

    #[test]
    fn integral_condition_examples() {
        for d in [1.0, 10.0] {
            assert!(integral_condition(d).unwrap() <= 1e-8);
        }
        let inv_e = (-1.0f64).exp();
        // Integrand is nonpositive on [0, 1/e].
        assert!(integral_condition_to(3.0, inv_e).unwrap() < 0.0);
        // d = 1 up to 1/e by brute-force quadrature without the split.
        let direct = quad::integrate(|u: f64| (1.0 + u.ln()) / (1.0 - u), 0.0, inv_e, 1e-11).unwrap();
        assert!((integral_condition_to(1.0, inv_e).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn real_valued_d_and_f32() {
        let s = solve_ivp(1.5, 2.0, 1e-3).unwrap();
        let lo = solve_ivp(1.0, 2.0, 1e-3).unwrap();
        let hi = solve_ivp(2.0, 2.0, 1e-3).unwrap();
        for j in 0..s.len() {
            assert!(lo.x[j] <= s.x[j] + 1e-12 && s.x[j] <= hi.x[j] + 1e-12);
        }
        let f = solve_ivp(2.0f32, 3.0, 1e-3).unwrap();
        let worst = f.t_grid.iter().zip(&f.x).map(|(t, x)| (x - t.tanh()).abs()).fold(0.0f32, f32::max);
        assert!(worst < 1e-4);
    }

    #[test]
    fn hermite_interpolation_between_grid_points() {
        let s = solve_ivp(2.0, 3.0, 1e-3).unwrap();
        for t in [0.00037, 0.5004, 1.23456, 2.9999] {
            assert!((s.x_at(t) - f64::tanh(t)).abs() < 1e-12);
        }
        assert!((s.x_at(10.0) - s.x[s.len() - 1]).abs() == 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_ivp(0.5, 1.0, 1e-3).is_err());
        assert!(solve_ivp(2.0, 1.0, 1e-2).is_err());
        assert!(solve_ivp(2.0, -1.0, 1e-3).is_err());
    }
}
