//! Casimir-Polder particle-obstacle interaction: eikonal phases φ(s) for
//! sphere and disc obstacles, the classical momentum kick derived from them,
//! and the capture parameter η.
//!
//! Radii are expressed as `s = r / R` throughout. Both obstacle models use the
//! asymptotic plane-wall potential `V = -C4 / d⁴`, where `d` is the distance
//! to the surface:
//!
//! * disc of thickness `b`: `V(r) = -C4 / (r - R)⁴`, acting for the transit
//!   time `b / v_z`;
//! * sphere: `V(r, z) = -C4 / (√(r² + z²) - R)⁴`, the wall spanned by the
//!   tangential plane at the closest surface point.
//!
//! The eikonal phase is `φ(r) = -∫ V dz / (ħ v_z)`, positive for attraction.

use std::f64::consts::FRAC_PI_2;

use crate::constants::HBAR;
use crate::error::{domain, require_positive, Error, Result};
use crate::farfield::cutoff_distance;
use crate::numerics::{
    bisect_by, integrate_real, ode, CubicSpline, OdeSpec, QuadratureSpec, Termination,
};
use crate::particles::ParticleSpecies;

/// Trajectories passing closer than this to the surface count as captured.
pub const SURFACE_ROUGHNESS: f64 = 0.5e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Sphere { radius: f64 },
    Disc { radius: f64, thickness: f64 },
}

impl Obstacle {
    pub fn sphere(radius: f64) -> Result<Self> {
        let o = Obstacle::Sphere { radius };
        o.validate()?;
        Ok(o)
    }

    pub fn disc(radius: f64, thickness: f64) -> Result<Self> {
        let o = Obstacle::Disc { radius, thickness };
        o.validate()?;
        Ok(o)
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Obstacle::Sphere { radius } | Obstacle::Disc { radius, .. } => radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("Obstacle", "R", self.radius())?;
        if let Obstacle::Disc { thickness, .. } = *self {
            require_positive("Obstacle", "b", thickness)?;
        }
        Ok(())
    }

    /// Exact (untabulated) eikonal phase at `s`.
    pub fn phase(&self, c4: f64, v_z: f64, s: f64, quad: &QuadratureSpec) -> Result<f64> {
        match *self {
            Obstacle::Sphere { radius } => sphere_phase(c4, v_z, radius, s, quad),
            Obstacle::Disc { radius, thickness } => disc_phase(c4, thickness, v_z, radius, s),
        }
    }
}

fn check_outside(op: &'static str, s: f64) -> Result<()> {
    if s > 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(domain(
            op,
            format!("s = {s} lies inside or on the obstacle (need s > 1)"),
        ))
    }
}

/// Disc phase `C4 b / (ħ v_z R⁴ (s-1)⁴)`.
pub fn disc_phase(c4: f64, thickness: f64, v_z: f64, radius: f64, s: f64) -> Result<f64> {
    const OP: &str = "disc_phase";
    check_outside(OP, s)?;
    require_positive(OP, "v_z", v_z)?;
    require_positive(OP, "R", radius)?;
    require_positive(OP, "b", thickness)?;
    if !(c4 >= 0.0) {
        return Err(domain(OP, "C4 must be non-negative"));
    }
    Ok(c4 * thickness / (HBAR * v_z * radius.powi(4) * (s - 1.0).powi(4)))
}

/// Dimensionless line integral `∫_{-∞}^{∞} dζ / (√(s² + ζ²) - 1)⁴`.
///
/// The substitution `ζ = s tan θ` maps it onto the finite interval
/// `2 ∫_0^{π/2} s cos²θ / (s - cos θ)⁴ dθ`, so no tail truncation is needed.
pub fn sphere_line_integral(s: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_outside("sphere_line_integral", s)?;
    let f = |theta: f64| {
        let c = theta.cos();
        s * c * c / (s - c).powi(4)
    };
    // the peak at θ = 0 has width ~ √(2(s-1)); give the integrator a break there
    let knee = (2.0 * (s - 1.0)).sqrt().min(0.5);
    let (a, ea, ca) = integrate_real(f, 0.0, knee, quad)?;
    let (b, eb, cb) = integrate_real(f, knee, FRAC_PI_2, quad)?;
    if !(ca && cb) {
        return Err(Error::Quadrature {
            op: "sphere_line_integral",
            error: ea + eb,
            subdivisions: quad.max_subdivisions,
        });
    }
    Ok(2.0 * (a + b))
}

/// Sphere phase `C4 / (ħ v_z R³) · ∫ dζ / (√(s² + ζ²) - 1)⁴`.
pub fn sphere_phase(c4: f64, v_z: f64, radius: f64, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    const OP: &str = "sphere_phase";
    check_outside(OP, s)?;
    require_positive(OP, "v_z", v_z)?;
    require_positive(OP, "R", radius)?;
    if !(c4 >= 0.0) {
        return Err(domain(OP, "C4 must be non-negative"));
    }
    if c4 == 0.0 {
        return Ok(0.0);
    }
    Ok(c4 / (HBAR * v_z * radius.powi(3)) * sphere_line_integral(s, quad)?)
}

/// Grid and cutoff choices for phase tabulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTableSpec {
    pub points: usize,
    /// Smallest tabulated `s - 1`.
    pub min_offset: f64,
    /// |φ| below which the phase is treated as zero; fixes `s_negligible`.
    pub phase_floor: f64,
}

impl Default for PhaseTableSpec {
    fn default() -> Self {
        Self {
            points: 400,
            min_offset: 1e-3,
            phase_floor: 1e-4,
        }
    }
}

/// Tabulated eikonal phase for one obstacle, particle and velocity.
///
/// `ln φ` is stored on a grid uniform in `ln(s - 1)` and interpolated with a
/// natural cubic spline, which keeps the relative interpolation error tiny
/// even where φ spans many decades near the wall. The table covers
/// `[1 + min_offset, s_negligible]`; beyond `s_negligible` the phase is below
/// the floor and treated as zero by the pattern engines.
#[derive(Debug, Clone, PartialEq)]
pub struct EikonalPhase {
    obstacle: Obstacle,
    c4: f64,
    mass_kg: f64,
    v_z: f64,
    s_min: f64,
    s_negligible: f64,
    phase_floor: f64,
    /// `None` when the phase is below the floor everywhere on the table.
    spline: Option<CubicSpline>,
    capture_eta: f64,
}

impl EikonalPhase {
    pub fn new(
        obstacle: Obstacle,
        particle: &ParticleSpecies,
        v_z: f64,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        Self::with_spec(obstacle, particle, v_z, quad, &PhaseTableSpec::default())
    }

    pub fn with_spec(
        obstacle: Obstacle,
        particle: &ParticleSpecies,
        v_z: f64,
        quad: &QuadratureSpec,
        spec: &PhaseTableSpec,
    ) -> Result<Self> {
        obstacle.validate()?;
        particle.validate()?;
        require_positive("EikonalPhase", "v_z", v_z)?;
        require_positive("EikonalPhase", "min_offset", spec.min_offset)?;
        require_positive("EikonalPhase", "phase_floor", spec.phase_floor)?;
        if spec.points < 4 {
            return Err(domain("EikonalPhase", "need at least 4 table points"));
        }
        let c4 = particle.c4();
        let exact = |s: f64| obstacle.phase(c4, v_z, s, quad);
        let s_min = 1.0 + spec.min_offset;
        let mut base = Self {
            obstacle,
            c4,
            mass_kg: particle.mass_kg(),
            v_z,
            s_min,
            s_negligible: s_min,
            phase_floor: spec.phase_floor,
            spline: None,
            capture_eta: 0.0,
        };
        if c4 == 0.0 || exact(s_min)? < spec.phase_floor {
            return Ok(base);
        }

        // bracket the floor crossing in ln(s - 1), then bisect
        let floor = spec.phase_floor;
        let mut hi = 1.0f64;
        while exact(1.0 + hi)? >= floor {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(domain("EikonalPhase", "phase never drops below the floor"));
            }
        }
        let lo = spec.min_offset.ln();
        let below = |x: f64| exact(1.0 + x.exp()).map(|p| p < floor).unwrap_or(true);
        let x_neg = bisect_by(below, lo, hi.ln(), 1e-10, -1.0, 1.0)?;
        let s_negligible = 1.0 + x_neg.exp();

        let n = spec.points;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let x = lo + (x_neg - lo) * i as f64 / (n - 1) as f64;
            let phi = exact(1.0 + x.exp())?;
            if !(phi > 0.0) {
                return Err(domain(
                    "EikonalPhase",
                    format!("non-positive phase {phi} at s = {}", 1.0 + x.exp()),
                ));
            }
            xs.push(x);
            ys.push(phi.ln());
        }
        if ys.windows(2).any(|w| w[1] >= w[0]) {
            return Err(domain(
                "EikonalPhase",
                "tabulated phase is not strictly decreasing",
            ));
        }
        base.s_negligible = s_negligible;
        base.spline = Some(CubicSpline::new(xs, ys)?);
        Ok(base)
    }

    /// Sets the capture parameter used by the pattern engines.
    pub fn with_capture(mut self, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(domain(
                "EikonalPhase::with_capture",
                format!("eta must be >= 0, got {eta}"),
            ));
        }
        self.capture_eta = eta;
        Ok(self)
    }

    /// Computes η for this obstacle, particle and velocity and stores it.
    pub fn with_computed_capture(self) -> Result<Self> {
        let eta = capture_eta_raw(&self.obstacle, self.c4, self.mass_kg, self.v_z)?;
        self.with_capture(eta)
    }

    pub fn obstacle(&self) -> &Obstacle {
        &self.obstacle
    }
    pub fn c4(&self) -> f64 {
        self.c4
    }
    pub fn v_z(&self) -> f64 {
        self.v_z
    }
    pub fn capture_eta(&self) -> f64 {
        self.capture_eta
    }
    pub fn s_min(&self) -> f64 {
        self.s_min
    }
    pub fn s_negligible(&self) -> f64 {
        self.s_negligible
    }
    pub fn phase_floor(&self) -> f64 {
        self.phase_floor
    }
    /// True when the phase is below the floor everywhere.
    pub fn is_negligible(&self) -> bool {
        self.spline.is_none()
    }

    /// Spline abscissa for `s`, clamped against rounding at the table ends.
    fn abscissa(spline: &CubicSpline, s: f64) -> f64 {
        let (lo, hi) = spline.domain();
        (s - 1.0).ln().clamp(lo, hi)
    }

    fn in_table(&self, op: &'static str, s: f64) -> Result<&CubicSpline> {
        let out = || Error::OutOfTable {
            op,
            s,
            lo: self.s_min,
            hi: self.s_negligible,
        };
        if !(s >= self.s_min && s <= self.s_negligible) {
            return Err(out());
        }
        self.spline.as_ref().ok_or_else(out)
    }

    /// φ(s) from the table.
    pub fn phase(&self, s: f64) -> Result<f64> {
        let spline = self.in_table("EikonalPhase::phase", s)?;
        Ok(spline.eval(Self::abscissa(spline, s))?.exp())
    }

    /// φ, dφ/ds and d²φ/ds² from the table.
    pub fn phase_derivatives(&self, s: f64) -> Result<(f64, f64, f64)> {
        let spline = self.in_table("EikonalPhase::phase_derivatives", s)?;
        let t = s - 1.0;
        let (y, y1, y2) = spline.eval_with_derivatives(Self::abscissa(spline, s))?;
        let phi = y.exp();
        let d1 = phi * y1 / t;
        let d2 = phi * (y1 * y1 + y2 - y1) / (t * t);
        Ok((phi, d1, d2))
    }
}

/// Radial momentum kick `q = ħ ∂_r φ = (ħ / R) dφ/ds` (kg·m/s). Negative
/// values point towards the obstacle axis.
pub fn classical_kick(phase: &EikonalPhase, s: f64) -> Result<f64> {
    let (_, d1, _) = phase.phase_derivatives(s)?;
    Ok(HBAR / phase.obstacle.radius() * d1)
}

/// Analytic disc kick `-4 C4 b / (v_z R⁵ (s-1)⁵)`.
pub fn disc_kick(c4: f64, thickness: f64, v_z: f64, radius: f64, s: f64) -> Result<f64> {
    check_outside("disc_kick", s)?;
    Ok(-4.0 * c4 * thickness / (v_z * radius.powi(5) * (s - 1.0).powi(5)))
}

/// Capture parameter η: particles passing within `ηR` of the obstacle edge
/// are adsorbed.
///
/// * Disc: `η = x_c / R` with `x_c` the van der Waals cutoff distance for a
///   wall of the disc's thickness.
/// * Sphere: the smallest impact parameter `ρ*` whose trajectory, started
///   parallel to the axis at `z = -20R`, escapes; `η = ρ*/R - 1`. Trajectories
///   are integrated in the scattering plane and count as captured once they
///   come within [`SURFACE_ROUGHNESS`] of the surface.
pub fn capture_eta(obstacle: &Obstacle, particle: &ParticleSpecies, v_z: f64) -> Result<f64> {
    obstacle.validate()?;
    particle.validate()?;
    capture_eta_raw(obstacle, particle.c4(), particle.mass_kg(), v_z)
}

fn capture_eta_raw(obstacle: &Obstacle, c4: f64, mass_kg: f64, v_z: f64) -> Result<f64> {
    require_positive("capture_eta", "v_z", v_z)?;
    if c4 == 0.0 {
        return Ok(0.0);
    }
    match *obstacle {
        Obstacle::Disc { radius, thickness } => {
            Ok(cutoff_distance(c4, thickness, mass_kg / crate::constants::AMU, v_z)? / radius)
        }
        Obstacle::Sphere { radius } => sphere_capture(c4, mass_kg, v_z, radius),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    Captured,
    Escaped,
}

const START_DISTANCE: f64 = 20.0;

/// Strength of the scaled force `-κ / (ρ-1)⁵` in units where R = 1 and
/// v_z = 1.
fn sphere_force_strength(c4: f64, mass_kg: f64, v_z: f64, radius: f64) -> f64 {
    4.0 * c4 / (mass_kg * v_z * v_z * radius.powi(4))
}

fn shoot(kappa: f64, impact: f64, contact: f64) -> Result<Fate> {
    let rhs = |_t: f64, y: &[f64; 4]| {
        let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let a = -kappa / ((rho - 1.0).powi(5) * rho);
        [y[2], y[3], a * y[0], a * y[1]]
    };
    let spec = OdeSpec {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        initial_step: 1e-2,
        min_step: 1e-18,
        max_steps: 5_000_000,
    };
    let y0 = [impact, -START_DISTANCE, 0.0, 1.0];
    let outcome = ode::integrate(rhs, 0.0, y0, 1e5, &spec, |_, y| {
        let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if rho - 1.0 <= contact {
            Some(Fate::Captured)
        } else if rho >= START_DISTANCE && y[0] * y[2] + y[1] * y[3] > 0.0 {
            Some(Fate::Escaped)
        } else {
            None
        }
    })?;
    Ok(match outcome {
        Termination::Stopped { reason, .. } => reason,
        // still circling after 10⁵ transit units: bound, never outgoing
        Termination::Exhausted { .. } => Fate::Captured,
    })
}

fn sphere_capture(c4: f64, mass_kg: f64, v_z: f64, radius: f64) -> Result<f64> {
    let kappa = sphere_force_strength(c4, mass_kg, v_z, radius);
    let contact = SURFACE_ROUGHNESS / radius;
    let lo = 1.0 + contact;
    let mut hi = 1.0 + (kappa.powf(0.2)).max(4.0 * contact).max(1e-3);
    let mut tries = 0;
    while shoot(kappa, hi, contact)? == Fate::Captured {
        hi = 1.0 + 2.0 * (hi - 1.0);
        tries += 1;
        if tries > 60 {
            return Err(domain("capture_eta", "no escaping trajectory found"));
        }
    }
    if shoot(kappa, lo, contact)? == Fate::Escaped {
        return Ok(0.0);
    }
    // first error from `shoot` aborts; otherwise bisect on the fate
    let failure = std::cell::RefCell::new(None);
    let escaped = |b: f64| match shoot(kappa, b, contact) {
        Ok(f) => f == Fate::Escaped,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            true
        }
    };
    let rho_star = bisect_by(escaped, lo, hi, 1e-7, -1.0, 1.0)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(rho_star - 1.0)
}
