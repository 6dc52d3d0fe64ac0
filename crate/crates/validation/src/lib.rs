//! Independent reference computations and a small verdict type for the
//! acceptance suite.

use std::f64::consts::PI;
use std::fmt;
use std::time::Duration;

use matterwave::numerics::bessel_j0;
use num_complex::Complex64;

/// Ideal-obstacle amplitude by Babinet's principle, integrated by brute
/// force: the open aperture `s ∈ [1, ∞)` with a Gaussian damping
/// `e^{-(s/S)²}`, truncated at `5S` and summed by composite Simpson at about
/// 20 nodes per oscillation. Normalised like the library amplitude
/// (unobstructed modulus 1).
///
/// The damping perturbs the result by about `(s*/S)²`, `s* = u/ℓ` being the
/// stationary point, so two widths `S = 50/√(kℓ)` and `2S` are combined by
/// Richardson extrapolation, which leaves an error of order `(s*/S)⁴`.
pub fn babinet_amplitude(u: f64, k: f64, ell: f64) -> Complex64 {
    let scale = 50.0 / (k * ell).sqrt();
    (damped_aperture(u, k, ell, 2.0 * scale) * 4.0 - damped_aperture(u, k, ell, scale)) / 3.0
}

fn damped_aperture(u: f64, k: f64, ell: f64, scale: f64) -> Complex64 {
    let a = PI * k * ell;
    let end = 5.0 * scale;
    let cycles = 0.5 * k * ell * end * end + k * u * end;
    let n = ((cycles * 20.0) as usize).max(20_000) * 2;
    let h = (end - 1.0) / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let s = 1.0 + i as f64 * h;
        let weight = match i {
            0 => 1.0,
            _ if i == n => 1.0,
            _ if i % 2 == 1 => 4.0,
            _ => 2.0,
        };
        let j0 = bessel_j0(2.0 * PI * k * u * s).expect("finite argument");
        let damp = (-(s / scale).powi(2)).exp();
        sum += Complex64::from_polar(2.0 * a * s * j0, a * s * s) * (weight * damp);
    }
    sum * (h / 3.0)
}

/// `true` when no element exceeds its predecessor by more than `slack`.
pub fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// First abscissa at which `ys` drops below `level`, linearly interpolated.
pub fn first_crossing_below(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    (1..ys.len())
        .find(|&i| ys[i] < level && ys[i - 1] >= level)
        .map(|i| {
            let t = (ys[i - 1] - level) / (ys[i - 1] - ys[i]);
            xs[i - 1] + t * (xs[i] - xs[i - 1])
        })
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed && self.within_budget() {
            "PASS"
        } else {
            "FAIL"
        };
        write!(
            f,
            "criterion {:>2} {status}  {:<34} {:>8.2}s / {:>4}s  {}",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}
