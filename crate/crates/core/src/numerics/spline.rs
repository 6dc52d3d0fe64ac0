use crate::error::{domain, Error, Result};

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(domain(
                "CubicSpline",
                "need at least 3 knots and matching lengths",
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !v.is_finite()) {
            return Err(domain(
                "CubicSpline",
                "knots must be strictly increasing, values finite",
            ));
        }
        // tridiagonal solve for interior second derivatives (Thomas algorithm)
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let c = h1 / 6.0;
            let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfTable {
                op: "CubicSpline",
                s: t,
                lo,
                hi,
            });
        }
        let idx = self.x.partition_point(|&v| v <= t);
        Ok(idx.clamp(1, self.x.len() - 1) - 1)
    }

    /// Value, first and second derivative at `t`.
    pub fn eval_with_derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        let i = self.locate(t)?;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 =
            (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        Ok((value, d1, d2))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_with_derivatives(t).map(|v| v.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let n = 200;
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for k in 0..500 {
            let t = 0.5 + k as f64 * 0.017;
            let (v, d1, _) = s.eval_with_derivatives(t).unwrap();
            assert!((v - t.sin()).abs() < 1e-6);
            assert!((d1 - t.cos()).abs() < 1e-4);
        }
    }

    #[test]
    fn linear_data_is_exact() {
        let s = CubicSpline::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]).unwrap();
        let (v, d1, d2) = s.eval_with_derivatives(2.2).unwrap();
        assert!((v - 5.4).abs() < 1e-14);
        assert!((d1 - 2.0).abs() < 1e-14);
        assert!(d2.abs() < 1e-14);
        assert!(s.eval(4.5).is_err());
        assert!(CubicSpline::new(vec![0.0, 0.0, 1.0], vec![0.0; 3]).is_err());
    }
}
