use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping when the
/// bracket is narrower than `tol`.
pub fn bisect<R, F>(mut f: F, mut lo: R, mut hi: R, tol: R) -> Result<R>
where
    R: Real,
    F: FnMut(R) -> R,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == R::zero() {
        return Ok(lo);
    }
    if f_hi == R::zero() {
        return Ok(hi);
    }
    if (f_lo > R::zero()) == (f_hi > R::zero()) {
        return Err(Error::NotFound(format!(
            "no sign change on [{lo:?}, {hi:?}]"
        )));
    }
    let half = R::lit(0.5);
    while hi - lo > tol {
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == R::zero() {
            return Ok(mid);
        }
        if (f_mid > R::zero()) == (f_lo > R::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(half * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_no_sign_change() {
        assert!(matches!(
            bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-6),
            Err(Error::NotFound(_))
        ));
    }
}
