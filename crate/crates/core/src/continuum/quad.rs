//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights on the odd Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug)]
struct Panel<R> {
    a: R,
    b: R,
    value: R,
    error: R,
}

fn gauss_kronrod<R: Real, F: FnMut(R) -> R>(f: &mut F, a: R, b: R) -> Panel<R> {
    let half = R::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * R::lit(WGK[7]);
    let mut gauss = fc * R::lit(WG[3]);
    for j in 0..7 {
        let dx = radius * R::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * R::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * R::lit(WG[j / 2]);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * radius,
        error: ((kronrod - gauss) * radius).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`, bisecting
/// the panel with the largest error estimate until the summed estimate is
/// below tolerance. The integrand is never evaluated at the endpoints, so
/// integrable endpoint singularities are allowed.
pub fn integrate<R, F>(mut f: F, a: R, b: R, abs_tol: R) -> Result<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    if a == b {
        return Ok(R::zero());
    }
    let mut panels = vec![gauss_kronrod(&mut f, a, b)];
    let roundoff = R::lit(50.0) * R::epsilon();
    loop {
        let value = panels.iter().fold(R::zero(), |s, p| s + p.value);
        let error = panels.iter().fold(R::zero(), |s, p| s + p.error);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a:?}, {b:?}]"
            )));
        }
        if error <= abs_tol.max(roundoff * value.abs()) {
            return Ok(value);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "{MAX_INTERVALS} panels used, error estimate {error:?} above {abs_tol:?}"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).expect("finite errors"))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = R::lit(0.5) * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature("panel width below resolution".into()));
        }
        panels.push(gauss_kronrod(&mut f, p.a, mid));
        panels.push(gauss_kronrod(&mut f, mid, p.b));
    }
}
