use crate::error::{domain, Error, Result};

/// Bisection on a sign-changing bracket. Stops when the bracket is no wider
/// than `tol` (or an exact zero is hit) and returns the midpoint.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    bisect_by(|x| f(x) > 0.0, lo, hi, tol, f(lo), f(hi))
}

/// Bisection on a predicate that flips exactly once on `[lo, hi]`.
/// `f_lo`/`f_hi` are only used for the error message.
pub(crate) fn bisect_by<P>(
    positive: P,
    lo: f64,
    hi: f64,
    tol: f64,
    f_lo: f64,
    f_hi: f64,
) -> Result<f64>
where
    P: Fn(f64) -> bool,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(tol > 0.0) {
        return Err(domain(
            "bisect",
            format!("need lo < hi and tol > 0, got [{lo}, {hi}], tol {tol}"),
        ));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    let lo_positive = f_lo > 0.0;
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if positive(mid) == lo_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
