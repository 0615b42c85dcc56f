//! Classical fixed-step fourth-order Runge-Kutta.

use crate::scalar::Real;

/// States sampled on a uniform grid, stored row-major (`dim` values per
/// grid point).
#[derive(Clone, Debug)]
pub struct Trajectory<R> {
    pub t: Vec<R>,
    pub dim: usize,
    pub states: Vec<R>,
}

impl<R: Real> Trajectory<R> {
    pub fn state(&self, index: usize) -> &[R] {
        &self.states[index * self.dim..(index + 1) * self.dim]
    }

    /// Component `c` at every grid point.
    pub fn component(&self, c: usize) -> Vec<R> {
        self.states.iter().skip(c).step_by(self.dim).copied().collect()
    }

    /// Spacing actually used (`t_max` divided into whole steps).
    pub fn step(&self) -> R {
        if self.t.len() < 2 {
            R::zero()
        } else {
            self.t[1] - self.t[0]
        }
    }
}

/// Integrates `y' = f(t, y)` from `t = 0` to `t_max` with steps no longer
/// than `max_step`. The grid has `ceil(t_max / max_step) + 1` points and
/// ends exactly at `t_max`.
pub fn integrate<R, F>(mut f: F, y0: &[R], t_max: R, max_step: R) -> Trajectory<R>
where
    R: Real,
    F: FnMut(R, &[R], &mut [R]),
{
    let dim = y0.len();
    let steps = if t_max > R::zero() {
        (t_max / max_step).ceil().to_usize().unwrap_or(1).max(1)
    } else {
        0
    };
    let h = if steps == 0 {
        R::zero()
    } else {
        t_max / R::from_usize(steps).expect("step count fits")
    };
    let two = R::lit(2.0);
    let six = R::lit(6.0);

    let mut t = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity((steps + 1) * dim);
    t.push(R::zero());
    states.extend_from_slice(y0);

    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![R::zero(); dim], vec![R::zero(); dim], vec![R::zero(); dim], vec![R::zero(); dim]);
    let mut tmp = vec![R::zero(); dim];
    for s in 0..steps {
        let t0 = h * R::from_usize(s).expect("step index fits");
        f(t0, &y, &mut k1);
        for c in 0..dim {
            tmp[c] = y[c] + h / two * k1[c];
        }
        f(t0 + h / two, &tmp, &mut k2);
        for c in 0..dim {
            tmp[c] = y[c] + h / two * k2[c];
        }
        f(t0 + h / two, &tmp, &mut k3);
        for c in 0..dim {
            tmp[c] = y[c] + h * k3[c];
        }
        f(t0 + h, &tmp, &mut k4);
        for c in 0..dim {
            y[c] = y[c] + h / six * (k1[c] + two * k2[c] + two * k3[c] + k4[c]);
        }
        t.push(h * R::from_usize(s + 1).expect("step index fits"));
        states.extend_from_slice(&y);
    }
    Trajectory { t, dim, states }
}
