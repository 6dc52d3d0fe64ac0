use crate::error::{domain, Result};

/// Bessel function of the first kind of order zero.
///
/// Backed by the musl-derived rational/asymptotic approximations in `libm`,
/// accurate to a few ulp over the whole real line.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(
            "bessel_j0",
            format!("argument must be finite, got {x}"),
        ));
    }
    Ok(libm::j0(x))
}

/// Unchecked J₀ for hot quadrature loops where the argument is known finite.
#[inline]
pub(crate) fn j0(x: f64) -> f64 {
    libm::j0(x)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    // Independent route: J0(x) = (1/π)∫₀^π cos(x sin θ) dθ. The integrand is
    // periodic and analytic, so the trapezoid rule converges geometrically
    // once the node count exceeds |x|.
    fn j0_integral(x: f64) -> f64 {
        let n = (x.abs() as usize) + 64;
        let h = PI / n as f64;
        let mut sum = 0.5 * (1.0 + (x * PI.sin()).cos());
        for i in 1..n {
            sum += (x * (i as f64 * h).sin()).cos();
        }
        sum * h / PI
    }

    #[test]
    fn matches_integral_representation() {
        let mut x = -50.0;
        while x <= 1e4 {
            let a = bessel_j0(x).unwrap();
            let b = j0_integral(x);
            assert!((a - b).abs() <= 1e-12, "x = {x}: {a} vs {b}");
            x += if x < 100.0 { 0.37 } else { 97.3 };
        }
    }

    #[test]
    fn basic_values() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        for x in [0.3, 2.0, 17.5, 333.0] {
            assert_eq!(bessel_j0(x).unwrap(), bessel_j0(-x).unwrap());
            assert!(bessel_j0(x).unwrap().powi(2) <= 1.0);
        }
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }

    #[test]
    fn first_zero() {
        // sign change brackets the first zero, located by plain bisection
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if j0_integral(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((lo - 2.404_825_557_695_773).abs() < 1e-9);
        assert!(bessel_j0(2.404_825_557_695_773).unwrap().abs() < 1e-12);
    }
}
