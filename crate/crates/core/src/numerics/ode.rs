//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-3,
            min_step: 1e-16,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination<S, const N: usize> {
    /// The stop predicate fired after an accepted step.
    Stopped { reason: S, t: f64, y: [f64; N] },
    /// `t_end` was reached without the predicate firing.
    Exhausted { t: f64, y: [f64; N] },
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` until `stop` returns `Some` or
/// `t_end` is reached. `stop` is checked after every accepted step.
pub fn integrate<const N: usize, F, P, S>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    spec: &OdeSpec,
    mut stop: P,
) -> Result<Termination<S, N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    P: FnMut(f64, &[f64; N]) -> Option<S>,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = spec.initial_step.min(t_end - t0);
    let mut k1 = rhs(t, &y);
    let mut steps = 0usize;
    while t < t_end {
        if steps >= spec.max_steps {
            return Err(Error::Integration(format!(
                "step budget of {} exhausted at t = {t}",
                spec.max_steps
            )));
        }
        steps += 1;
        h = h.min(t_end - t);
        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = rhs(t + h, &y_new);

        let mut err_norm = 0.0f64;
        let mut finite = true;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = spec.abs_tol + spec.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = e / scale;
            finite &= r.is_finite() && y_new[i].is_finite();
            err_norm = err_norm.max(r.abs());
        }
        if !finite {
            err_norm = f64::INFINITY;
        }

        if err_norm <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            if let Some(reason) = stop(t, &y) {
                return Ok(Termination::Stopped { reason, t, y });
            }
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            let factor = if err_norm.is_finite() {
                (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= factor;
            if h < spec.min_step {
                return Err(Error::Integration(format!(
                    "step size underflow at t = {t}"
                )));
            }
        }
    }
    Ok(Termination::Exhausted { t, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let spec = OdeSpec::default();
        let two_pi = 2.0 * std::f64::consts::PI;
        let out = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            two_pi,
            &spec,
            |_, _| None::<()>,
        )
        .unwrap();
        let Termination::Exhausted { t, y } = out else {
            panic!()
        };
        assert!((t - two_pi).abs() < 1e-12);
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn stop_predicate_fires() {
        let out = integrate(
            |_, _y: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            &OdeSpec::default(),
            |_, y| (y[0] > 2.5).then_some("crossed"),
        )
        .unwrap();
        match out {
            Termination::Stopped { reason, y, .. } => {
                assert_eq!(reason, "crossed");
                assert!(y[0] > 2.5);
            }
            _ => panic!("expected stop"),
        }
    }
}
