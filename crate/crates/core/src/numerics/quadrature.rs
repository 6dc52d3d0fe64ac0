//! Globally adaptive Gauss-Kronrod (7/15 and 10/21) quadrature for complex
//! integrands on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol·|I|)`. Exhausting the
//! subdivision budget is reported through [`QuadResult::converged`], never
//! silently.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.max_subdivisions >= 1;
        if ok {
            Ok(())
        } else {
            Err(crate::error::domain(
                "QuadratureSpec",
                format!("tolerances must be positive and max_subdivisions >= 1, got {self:?}"),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
    pub subdivisions: usize,
    pub evaluations: usize,
}

impl QuadResult {
    pub const ZERO: QuadResult = QuadResult {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        converged: true,
        subdivisions: 0,
        evaluations: 0,
    };

    /// Converts an unconverged result into an error tagged with `op`.
    pub fn require(self, op: &'static str) -> Result<Complex64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                op,
                error: self.error,
                subdivisions: self.subdivisions,
            })
        }
    }

    fn combine(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
            subdivisions: self.subdivisions + other.subdivisions,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

// Kronrod 21-point abscissae (positive half, descending) and weights, with the
// embedded 10-point Gauss weights on the odd abscissae. QUADPACK qk21.
#[allow(clippy::excessive_precision)]
const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is deterministic
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK21[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK21[10];
    let mut fvals = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for j in 0..10 {
        let dx = half * XGK21[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fvals[j] = (f1, f2);
        let sum = f1 + f2;
        kronrod += sum * WGK21[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK21[j];
        if j % 2 == 1 {
            gauss += sum * WG10[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).norm() * WGK21[10];
    for j in 0..10 {
        asc += ((fvals[j].0 - mean).norm() + (fvals[j].1 - mean).norm()) * WGK21[j];
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).norm();
    // QUADPACK error rescaling
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Integrates a complex-valued `f` over `[a, b]`.
///
/// A zero-length interval returns exactly zero. `a > b` is a domain error.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(crate::error::domain(
            "integrate_adaptive",
            format!("need finite a <= b, got [{a}, {b}]"),
        ));
    }
    if a == b {
        return Ok(QuadResult::ZERO);
    }
    let (value, error) = gk21(&f, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut subdivisions = 1;
    let mut evaluations = 21;
    let target = |t: Complex64| spec.abs_tol.max(spec.rel_tol * t.norm());

    while total_err > target(total) {
        if subdivisions >= spec.max_subdivisions {
            return Ok(QuadResult {
                value: total,
                error: total_err,
                converged: false,
                subdivisions,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval collapsed to adjacent floats; nothing more to gain
            heap.push(worst);
            return Ok(QuadResult {
                value: total,
                error: total_err,
                converged: false,
                subdivisions,
                evaluations,
            });
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        if subdivisions % 64 == 0 {
            // resum to shed accumulated cancellation in the running totals
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(QuadResult {
        value: heap.iter().map(|p| p.value).sum(),
        error: heap.iter().map(|p| p.error).sum(),
        converged: true,
        subdivisions,
        evaluations,
    })
}

/// Integrates over consecutive sub-intervals given by `breaks` (sorted),
/// sharing the tolerance budget. Useful when the caller knows where the
/// integrand changes character.
pub fn integrate_piecewise<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut acc = QuadResult::ZERO;
    for w in breaks.windows(2) {
        let r = integrate_adaptive(&f, w[0], w[1], spec)?;
        acc = acc.combine(r);
    }
    Ok(acc)
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(f64, f64, bool)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_adaptive(|x| Complex64::new(f(x), 0.0), a, b, spec)?;
    Ok((r.value.re, r.error, r.converged))
}
