//! Fresnel-Kirchhoff diffraction behind a circular obstacle (the Poisson
//! spot), with optional eikonal interaction phase, finite source size and
//! longitudinal velocity spread.
//!
//! Work is done in dimensionless variables: the observation radius is
//! `u = r / R` (R the obstacle radius), the aperture radius `s = ρ / R`, and
//!
//! * `k = R² / (L2 λ)`,
//! * `ℓ = (L1 + L2) / L1`, the geometric magnification of the shadow,
//! * `β = R0 L2 / (R L1)`, the source radius projected onto the screen.
//!
//! The normalised intensity `w(u)` tends to 1 far outside the shadow.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::PLANCK;
use crate::error::{domain, require_positive, Error, Result};
use crate::interaction::{EikonalPhase, Obstacle, PhaseTableSpec};
use crate::numerics::{
    bisect, integrate_piecewise, integrate_real, j0, CubicSpline, QuadratureSpec,
};
use crate::particles::ParticleSpecies;
use crate::report::{ConstraintReport, Direction};

/// First zero of J0.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Largest ratio of transverse to longitudinal lengths treated as paraxial.
pub const PARAXIAL_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub k: f64,
    pub ell: f64,
    pub beta: f64,
}

impl DimensionlessParams {
    pub fn new(k: f64, ell: f64, beta: f64) -> Result<Self> {
        let p = Self { k, ell, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn from_geometry(
        radius: f64,
        source_radius: f64,
        l1: f64,
        l2: f64,
        wavelength: f64,
    ) -> Result<Self> {
        const OP: &str = "DimensionlessParams::from_geometry";
        require_positive(OP, "R", radius)?;
        require_positive(OP, "L1", l1)?;
        require_positive(OP, "L2", l2)?;
        require_positive(OP, "wavelength", wavelength)?;
        if !(source_radius >= 0.0 && source_radius.is_finite()) {
            return Err(domain(OP, format!("R0 must be >= 0, got {source_radius}")));
        }
        Self::new(
            radius * radius / (l2 * wavelength),
            (l1 + l2) / l1,
            source_radius * l2 / (radius * l1),
        )
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("DimensionlessParams", "k", self.k)?;
        if !(self.ell > 1.0 && self.ell.is_finite()) {
            return Err(domain(
                "DimensionlessParams",
                format!("ell must exceed 1, got {}", self.ell),
            ));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(domain(
                "DimensionlessParams",
                format!("beta must be >= 0, got {}", self.beta),
            ));
        }
        Ok(())
    }

    /// The same geometry with a point source.
    pub fn point_source(&self) -> Self {
        Self { beta: 0.0, ..*self }
    }
}

/// Physical near-field geometry. The wavelength comes from the particle's de
/// Broglie wavelength unless `wavelength` overrides it.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSetup {
    pub source_radius: f64,
    pub l1: f64,
    pub l2: f64,
    pub obstacle: Obstacle,
    pub particle: Option<ParticleSpecies>,
    pub wavelength: Option<f64>,
}

impl PoissonSetup {
    pub fn validate(&self) -> Result<()> {
        const OP: &str = "PoissonSetup";
        self.obstacle.validate()?;
        require_positive(OP, "L1", self.l1)?;
        require_positive(OP, "L2", self.l2)?;
        if !(self.source_radius >= 0.0 && self.source_radius.is_finite()) {
            return Err(domain(
                OP,
                format!("R0 must be >= 0, got {}", self.source_radius),
            ));
        }
        if let Some(p) = &self.particle {
            p.validate()?;
        }
        match self.wavelength {
            Some(l) => require_positive(OP, "wavelength", l),
            None if self.particle.is_some() => Ok(()),
            None => Err(domain(
                OP,
                "either a particle or an explicit wavelength is required",
            )),
        }
    }

    pub fn nominal_velocity(&self) -> Option<f64> {
        self.particle.as_ref().map(|p| p.v_long)
    }

    /// Wavelength at longitudinal velocity `v` (`None`: nominal). An
    /// explicit wavelength is taken to belong to the nominal velocity and
    /// scales as `1/v`.
    pub fn wavelength_at(&self, v: Option<f64>) -> Result<f64> {
        self.validate()?;
        let v_nom = self.nominal_velocity();
        let v = v.or(v_nom);
        if let Some(v) = v {
            require_positive("PoissonSetup::wavelength_at", "v", v)?;
        }
        match (self.wavelength, &self.particle, v) {
            (Some(l), Some(_), Some(v)) => Ok(l * v_nom.unwrap_or(v) / v),
            (Some(l), _, _) => Ok(l),
            (None, Some(p), Some(v)) => Ok(PLANCK / (p.mass_kg() * v)),
            (None, _, _) => Err(domain(
                "PoissonSetup::wavelength_at",
                "no wavelength available",
            )),
        }
    }

    pub fn params_at(&self, v: Option<f64>) -> Result<DimensionlessParams> {
        DimensionlessParams::from_geometry(
            self.obstacle.radius(),
            self.source_radius,
            self.l1,
            self.l2,
            self.wavelength_at(v)?,
        )
    }

    pub fn params(&self) -> Result<DimensionlessParams> {
        self.params_at(None)
    }

    /// Stable 64-bit FNV-1a digest of the setup, recorded in profile
    /// metadata.
    pub fn digest(&self) -> u64 {
        let text = format!("{self:?}");
        text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}

/// Which phase the obstacle imprints on the wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseModel {
    /// Perfectly absorbing obstacle, no interaction.
    Ideal,
    /// Casimir-Polder eikonal phase. With `capture`, the integration starts
    /// at the capture radius `s = 1 + η`; without it, at the inner end of
    /// the phase table (`PhaseTableSpec::min_offset` outside the surface).
    Eikonal { capture: bool },
}

/// Numerical and model options for the pattern engines.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternOptions {
    pub model: PhaseModel,
    pub quad: QuadratureSpec,
    pub table: PhaseTableSpec,
    /// Radial table size for source averaging; 0 picks it from k.
    pub source_samples: usize,
    /// Gauss-Hermite nodes for velocity averaging.
    pub velocity_nodes: usize,
}

impl Default for PatternOptions {
    fn default() -> Self {
        Self {
            model: PhaseModel::Eikonal { capture: true },
            quad: QuadratureSpec::default(),
            table: PhaseTableSpec::default(),
            source_samples: 0,
            velocity_nodes: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    pub kind: ProfileKind,
    pub params: DimensionlessParams,
    pub interaction: bool,
    pub capture_eta: f64,
    pub source_averaged: bool,
    /// Number of velocity nodes averaged over (1: monochromatic).
    pub velocity_nodes: usize,
    pub setup_digest: Option<u64>,
    /// Screen radii of classical caustics inside the grid.
    pub caustics: Vec<f64>,
    /// Classical point source only: `A` in `w ≈ A / u` near the axis, where
    /// the intensity diverges. Any `u = 0` grid node then carries the value
    /// of the first nonzero node.
    pub origin_coefficient: Option<f64>,
}

impl ProfileMeta {
    pub(crate) fn new(
        kind: ProfileKind,
        params: DimensionlessParams,
        phase: Option<&EikonalPhase>,
    ) -> Self {
        Self {
            kind,
            params,
            interaction: phase.is_some(),
            capture_eta: phase.map_or(0.0, EikonalPhase::capture_eta),
            source_averaged: false,
            velocity_nodes: 1,
            setup_digest: None,
            caustics: Vec::new(),
            origin_coefficient: None,
        }
    }
}

/// A radial intensity profile `w(u)` on a grid of screen radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub meta: ProfileMeta,
}

impl RadialProfile {
    /// Value at the first grid node (the axis when the grid starts at 0).
    pub fn center(&self) -> f64 {
        self.w[0]
    }
}

/// Uniform grid `0, u_max/(n-1), ..., u_max`.
pub fn uniform_grid(u_max: f64, n: usize) -> Result<Vec<f64>> {
    require_positive("uniform_grid", "u_max", u_max)?;
    if n < 2 {
        return Err(domain("uniform_grid", "need at least two nodes"));
    }
    Ok((0..n).map(|i| u_max * i as f64 / (n - 1) as f64).collect())
}

pub(crate) fn check_grid(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::GridMismatch("empty grid".into()));
    }
    if u.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::GridMismatch(
            "grid nodes must be finite and non-negative".into(),
        ));
    }
    if u.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Spot radius in units of R: `0.4 / k`.
pub fn spot_radius(k: f64) -> Result<f64> {
    require_positive("spot_radius", "k", k)?;
    Ok(0.4 / k)
}

/// Spot radius from the first zero of `J0(2πku)`: `2.40483 / (2πk)`.
pub fn spot_radius_exact(k: f64) -> Result<f64> {
    require_positive("spot_radius_exact", "k", k)?;
    Ok(J0_FIRST_ZERO / (2.0 * PI * k))
}

/// Screen radius of the first local minimum of a profile, refined by a
/// parabola through the bracketing nodes. `None` if `w` never turns up.
pub fn first_minimum(profile: &RadialProfile) -> Option<f64> {
    let (u, w) = (&profile.u, &profile.w);
    let i = (1..w.len().saturating_sub(1)).find(|&i| w[i] <= w[i - 1] && w[i] < w[i + 1])?;
    let (x0, x1, x2) = (u[i - 1], u[i], u[i + 1]);
    let (y0, y1, y2) = (w[i - 1], w[i], w[i + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a > 0.0 {
        Some((-b / (2.0 * a)).clamp(x0, x2))
    } else {
        Some(x1)
    }
}

/// Aperture-plane integrand of the unobstructed wave,
/// `2πkℓ s e^{iπkℓs²} J0(2πkus)`.
fn bare(params: &DimensionlessParams, u: f64, s: f64) -> Complex64 {
    let a = PI * params.k * params.ell;
    Complex64::from_polar(2.0 * a * s * j0(2.0 * PI * params.k * u * s), a * s * s)
}

/// Break points roughly one oscillation apart so that each adaptive panel
/// starts from a resolved integrand.
fn oscillation_breaks(params: &DimensionlessParams, u: f64, a: f64, b: f64) -> Vec<f64> {
    let cycles = 0.5 * params.k * params.ell * (b * b - a * a).abs() + params.k * u * (b - a);
    let n = (cycles.ceil() as usize).clamp(1, 4096);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Phase above which `∫ B e^{iφ} ds` is evaluated asymptotically.
const ASYMPTOTIC_PHASE: f64 = 500.0;

/// End of the near-wall strip where `φ > ASYMPTOTIC_PHASE`; `s0` if there is
/// none.
fn fast_phase_end(phase: &EikonalPhase, s0: f64, s_neg: f64) -> Result<f64> {
    let excess = |s: f64| phase.phase(s).map_or(f64::NAN, |p| p - ASYMPTOTIC_PHASE);
    if !(excess(s0) > 0.0) {
        return Ok(s0);
    }
    bisect(excess, s0, s_neg, 1e-12 * s0)
}

/// Antiderivative of `B e^{iφ}` for rapidly varying `φ`, from two
/// integrations by parts: `e^{iφ} (h0 - h1)` with `h0 = B/(iφ')` and
/// `h1 = h0'/(iφ')`. The remainder is of order `|B| (s-1) / φ²`.
fn oscillatory_tail(
    params: &DimensionlessParams,
    u: f64,
    phase: &EikonalPhase,
    s: f64,
) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let (phi, d1, d2) = phase.phase_derivatives(s)?;
    let g = bare(params, u, s);
    // B varies on the scale of s, slowly compared with φ
    let h = 1e-6 * s;
    let dg = (bare(params, u, s + h) - bare(params, u, s - h)) / (2.0 * h);
    let h0 = g / (i * d1);
    let dh0 = (dg * d1 - g * d2) / (i * d1 * d1);
    let h1 = dh0 / (i * d1);
    Ok(Complex64::from_polar(1.0, phi) * (h0 - h1))
}

/// Complex amplitude at screen radius `u`, normalised so that the
/// unobstructed wave has modulus 1:
///
/// `ψ(u) = i e^{-iπku²/ℓ} - ∫_0^{s0} B ds + ∫_{s0}^{s_neg} B (e^{iφ} - 1) ds`
///
/// with `B` the bare aperture integrand, `s0 = 1 + η` and `s_neg` where the
/// phase drops below its floor. Without a phase, `s0 = 1`.
pub fn amplitude(
    u: f64,
    params: &DimensionlessParams,
    phase: Option<&EikonalPhase>,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(domain(
            "amplitude",
            format!("u must be finite and >= 0, got {u}"),
        ));
    }
    params.validate()?;
    quad.validate()?;
    let s0 = 1.0 + phase.map_or(0.0, EikonalPhase::capture_eta);
    let free =
        Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -PI * params.k * u * u / params.ell);

    let blocked = integrate_piecewise(
        |s| bare(params, u, s),
        &oscillation_breaks(params, u, 0.0, s0),
        quad,
    )?
    .require("amplitude (obstacle integral)")?;

    let mut scattered = Complex64::new(0.0, 0.0);
    if let Some(phase) = phase {
        let s_neg = phase.s_negligible();
        if !phase.is_negligible() && s_neg > s0 {
            if s0 < phase.s_min() {
                return Err(domain(
                    "amplitude",
                    format!(
                        "phase table starts at s = {} but integration starts at s = {s0}; \
                         enable capture or extend the table",
                        phase.s_min()
                    ),
                ));
            }
            let s_fast = fast_phase_end(phase, s0, s_neg)?;
            if s_fast > s0 {
                let strip = integrate_piecewise(
                    |s| bare(params, u, s),
                    &oscillation_breaks(params, u, s0, s_fast),
                    quad,
                )?
                .require("amplitude (near-wall strip)")?;
                scattered += oscillatory_tail(params, u, phase, s_fast)?
                    - oscillatory_tail(params, u, phase, s0)?
                    - strip;
            }
            // geometric breaks resolve the remaining oscillation near the wall
            let mut breaks = vec![s_fast];
            let mut x = s_fast - 1.0;
            while 1.0 + 1.5 * x < s_neg {
                x *= 1.5;
                breaks.push(1.0 + x);
            }
            breaks.push(s_neg);
            let f = |s: f64| {
                let phi = phase.phase(s).unwrap_or(f64::NAN);
                bare(params, u, s) * (Complex64::from_polar(1.0, phi) - 1.0)
            };
            let r = integrate_piecewise(f, &breaks, quad)?;
            if !r.value.re.is_finite() || !r.value.im.is_finite() {
                return Err(domain(
                    "amplitude",
                    "phase lookup failed inside the table range",
                ));
            }
            scattered += r.require("amplitude (interaction integral)")?;
        }
    }
    Ok(free - blocked + scattered)
}

/// Point-source intensity `|ψ(u)|²` on the grid.
pub fn point_source_pattern(
    u_grid: &[f64],
    params: &DimensionlessParams,
    phase: Option<&EikonalPhase>,
    quad: &QuadratureSpec,
) -> Result<RadialProfile> {
    check_grid(u_grid)?;
    let w = u_grid
        .par_iter()
        .map(|&u| amplitude(u, params, phase, quad).map(|a| a.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialProfile {
        u: u_grid.to_vec(),
        w,
        meta: ProfileMeta::new(ProfileKind::Quantum, params.point_source(), phase),
    })
}

/// Angular measure of the circle of radius `r` about the origin that lies
/// inside the disc of radius `beta` centred at distance `u`.
fn arc_inside(r: f64, u: f64, beta: f64) -> f64 {
    if r <= beta - u {
        2.0 * PI
    } else if r <= u - beta || r >= u + beta {
        0.0
    } else {
        let c = (r * r + u * u - beta * beta) / (2.0 * r * u);
        2.0 * c.clamp(-1.0, 1.0).acos()
    }
}

/// Mean of a radially symmetric intensity over the disc of radius `beta`
/// centred at screen radius `u`. `g(r) = r·w(r)` is the intensity times the
/// radial Jacobian, which stays finite for an integrable `1/r` divergence on
/// the axis. `extra_breaks` marks discontinuities or caustics of `g`.
pub(crate) fn disc_average<G>(
    g: G,
    u: f64,
    beta: f64,
    extra_breaks: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let lo = (u - beta).max(0.0);
    let hi = u + beta;
    let mut breaks = vec![lo, (beta - u).abs().max(lo), hi];
    breaks.extend(extra_breaks.iter().copied().filter(|&b| b > lo && b < hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (v, err, ok) = integrate_real(|r| g(r) * arc_inside(r, u, beta), w[0], w[1], quad)?;
        if !ok {
            return Err(Error::Quadrature {
                op: "source average",
                error: err,
                subdivisions: quad.max_subdivisions,
            });
        }
        total += v;
    }
    Ok(total / (PI * beta * beta))
}

/// Auto-sized radial table: 16 samples per period of the fastest fringe the
/// amplitude can carry out to `r_max`.
fn source_table_size(params: &DimensionlessParams, r_max: f64, s_extent: f64) -> usize {
    let per_unit = (16.0 * params.k * (r_max / params.ell + s_extent + 1.0)).max(32.0);
    ((per_unit * r_max).ceil() as usize + 1).clamp(64, 40_000)
}

/// Intensity for an extended, uniformly bright circular source of projected
/// radius `params.beta`: the point-source pattern averaged over a disc of
/// that radius around each screen point. The point-source pattern is
/// tabulated on a uniform radial grid (`n_samples` nodes, 0: automatic) and
/// spline-interpolated.
pub fn source_averaged_pattern(
    u_grid: &[f64],
    params: &DimensionlessParams,
    phase: Option<&EikonalPhase>,
    quad: &QuadratureSpec,
    n_samples: usize,
) -> Result<RadialProfile> {
    check_grid(u_grid)?;
    if params.beta == 0.0 {
        return point_source_pattern(u_grid, params, phase, quad);
    }
    let beta = params.beta;
    let r_max = u_grid[u_grid.len() - 1] + beta;
    let s_extent = phase.map_or(1.0, |p| p.s_negligible().max(1.0));
    let n = if n_samples == 0 {
        source_table_size(params, r_max, s_extent)
    } else {
        n_samples.max(4)
    };
    let radii = uniform_grid(r_max, n)?;
    let table = point_source_pattern(&radii, params, phase, quad)?;
    let spline = CubicSpline::new(radii, table.w)?;
    let g = |r: f64| r * spline.eval(r.min(r_max)).unwrap_or(f64::NAN);
    // the interpolant is smooth; a looser tolerance keeps this cheap
    let avg_quad = QuadratureSpec {
        rel_tol: quad.rel_tol.max(1e-9),
        abs_tol: quad.abs_tol.max(1e-12),
        max_subdivisions: quad.max_subdivisions.max(4000),
    };
    let w = u_grid
        .par_iter()
        .map(|&u| disc_average(g, u, beta, &[], &avg_quad))
        .collect::<Result<Vec<_>>>()?;
    let mut meta = ProfileMeta::new(ProfileKind::Quantum, *params, phase);
    meta.source_averaged = true;
    Ok(RadialProfile {
        u: u_grid.to_vec(),
        w,
        meta,
    })
}

/// Builds the phase for velocity `v` under the requested model, or `None`
/// for the ideal obstacle.
pub fn build_phase(
    setup: &PoissonSetup,
    v: Option<f64>,
    options: &PatternOptions,
) -> Result<Option<EikonalPhase>> {
    match options.model {
        PhaseModel::Ideal => Ok(None),
        PhaseModel::Eikonal { capture } => {
            let particle = setup
                .particle
                .as_ref()
                .ok_or_else(|| domain("build_phase", "the interaction phase needs a particle"))?;
            let v = v.unwrap_or(particle.v_long);
            let phase = EikonalPhase::with_spec(
                setup.obstacle,
                particle,
                v,
                &options.quad,
                &options.table,
            )?;
            // without capture the integration starts where the table does
            let phase = if capture {
                phase.with_computed_capture()?
            } else {
                let start = phase.s_min() - 1.0;
                phase.with_capture(start)?
            };
            Ok(Some(phase))
        }
    }
}

/// Pattern of `setup` at its nominal velocity; `average_source` selects the
/// finite-source average.
pub fn monochromatic_pattern(
    u_grid: &[f64],
    setup: &PoissonSetup,
    options: &PatternOptions,
    average_source: bool,
) -> Result<RadialProfile> {
    let params = setup.params()?;
    let phase = build_phase(setup, None, options)?;
    let mut profile = if average_source {
        source_averaged_pattern(
            u_grid,
            &params,
            phase.as_ref(),
            &options.quad,
            options.source_samples,
        )?
    } else {
        point_source_pattern(u_grid, &params, phase.as_ref(), &options.quad)?
    };
    profile.meta.setup_digest = Some(setup.digest());
    Ok(profile)
}

/// Pattern averaged over the particle's longitudinal velocity distribution.
/// Every velocity node gets its own `k`, phase table and capture radius.
/// With no velocity spread this is the monochromatic pattern.
pub fn wavelength_averaged_pattern(
    u_grid: &[f64],
    setup: &PoissonSetup,
    options: &PatternOptions,
    average_source: bool,
) -> Result<RadialProfile> {
    check_grid(u_grid)?;
    setup.validate()?;
    let nodes = match &setup.particle {
        Some(p) => p.velocity_nodes(options.velocity_nodes)?,
        None => return monochromatic_pattern(u_grid, setup, options, average_source),
    };
    let mut w = vec![0.0; u_grid.len()];
    let mut eta_mean = 0.0;
    for &(v, weight) in &nodes {
        let params = setup.params_at(Some(v))?;
        let phase = build_phase(setup, Some(v), options)?;
        let p = if average_source {
            source_averaged_pattern(
                u_grid,
                &params,
                phase.as_ref(),
                &options.quad,
                options.source_samples,
            )?
        } else {
            point_source_pattern(u_grid, &params, phase.as_ref(), &options.quad)?
        };
        for (acc, x) in w.iter_mut().zip(&p.w) {
            *acc += weight * x;
        }
        eta_mean += weight * p.meta.capture_eta;
    }
    let params = setup.params()?;
    let mut meta = ProfileMeta::new(
        ProfileKind::Quantum,
        if average_source {
            params
        } else {
            params.point_source()
        },
        None,
    );
    meta.interaction = options.model != PhaseModel::Ideal;
    meta.capture_eta = eta_mean;
    meta.source_averaged = average_source && params.beta > 0.0;
    meta.velocity_nodes = nodes.len();
    meta.setup_digest = Some(setup.digest());
    Ok(RadialProfile {
        u: u_grid.to_vec(),
        w,
        meta,
    })
}

/// Visibility and validity constraints of a near-field setup:
///
/// * `spot_vs_shadow`: `kℓ ≥ 0.4`, the spot must be narrower than the
///   shadow;
/// * `source_radius`: `R0 ≤ 0.4 L1 λ / R`, the source must not wash the spot
///   out;
/// * `shadow_exists`: `R0 < R (L1 + L2) / L2`;
/// * `paraxial`: every transverse/longitudinal ratio at most 0.01.
pub fn visibility_checks(setup: &PoissonSetup) -> Result<Vec<ConstraintReport>> {
    setup.validate()?;
    let lambda = setup.wavelength_at(None)?;
    let params = setup.params()?;
    let r = setup.obstacle.radius();
    let r0 = setup.source_radius;
    // a hair of slack so that setups designed to sit exactly on the bound pass
    let slack = 1.0 - 1e-12;
    let paraxial = [r / setup.l1, r / setup.l2, r0 / setup.l1, r0 / setup.l2]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![
        ConstraintReport::new(
            "spot_vs_shadow",
            params.k * params.ell,
            Direction::AtLeast,
            0.4 * slack,
            "k*ell; spot radius 0.4R/k inside the shadow radius ell*R",
        ),
        ConstraintReport::new(
            "source_radius",
            r0,
            Direction::AtMost,
            0.4 * setup.l1 * lambda / r / slack,
            "R0 [m] vs 0.4 L1 lambda / R",
        ),
        ConstraintReport::new(
            "shadow_exists",
            r0,
            Direction::Below,
            r * (setup.l1 + setup.l2) / setup.l2,
            "R0 [m] vs R (L1+L2)/L2",
        ),
        ConstraintReport::new(
            "paraxial",
            paraxial,
            Direction::AtMost,
            PARAXIAL_LIMIT,
            "largest transverse/longitudinal ratio",
        ),
    ])
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// Brute-force oracle for the ideal amplitude via Babinet's principle:
    /// the wave passing the obstacle is the field of the open aperture
    /// `s ∈ [1, ∞)`, computed here by composite Simpson on a damped integrand
    /// `e^{-(s/S)²}` with a wide cutoff `S`. The damping error is about
    /// `(u/ℓS)²`, below 1e-3 of the unobstructed amplitude for the small `u`
    /// used here.
    fn babinet_oracle(u: f64, p: &DimensionlessParams) -> Complex64 {
        let scale = 50.0 / (p.k * p.ell).sqrt();
        let end = 5.0 * scale;
        let cycles = 0.5 * p.k * p.ell * end * end + p.k * u * end;
        let n = ((cycles * 40.0) as usize).max(20_000) * 2;
        let h = (end - 1.0) / n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let s = 1.0 + i as f64 * h;
            let wt = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let damp = (-(s / scale).powi(2)).exp();
            sum += bare(p, u, s) * (wt * damp);
        }
        sum * (h / 3.0)
    }

    #[test]
    fn unobstructed_and_axis_values() {
        for (k, ell) in [(0.2, 2.0), (1.0, 1.5), (5.0, 3.0)] {
            let p = DimensionlessParams::new(k, ell, 0.0).unwrap();
            let a = amplitude(0.0, &p, None, &quad()).unwrap();
            // on the axis ψ = i e^{iπkℓ}
            let exact = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, PI * k * ell);
            assert!((a - exact).norm() < 1e-9, "k={k}: {a} vs {exact}");
        }
    }

    #[test]
    fn ideal_amplitude_matches_babinet_oracle() {
        let p = DimensionlessParams::new(0.2, 2.0, 0.0).unwrap();
        for u in [0.3, 1.0, 2.5, 4.0] {
            let a = amplitude(u, &p, None, &quad()).unwrap();
            let b = babinet_oracle(u, &p);
            assert!((a - b).norm() < 0.01, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn geometry_to_params() {
        let p = DimensionlessParams::from_geometry(500e-9, 0.0, 0.125, 0.125, 10e-12).unwrap();
        assert_relative_eq!(p.k, 0.2, max_relative = 1e-12);
        assert_relative_eq!(p.ell, 2.0, max_relative = 1e-15);
        assert_eq!(p.beta, 0.0);
        let q = DimensionlessParams::from_geometry(500e-9, 0.0, 0.125, 0.125, 1e-12).unwrap();
        assert_relative_eq!(q.k, 2.0, max_relative = 1e-12);
        assert!(DimensionlessParams::new(0.0, 2.0, 0.0).is_err());
        assert!(DimensionlessParams::new(1.0, 1.0, 0.0).is_err());
        assert!(DimensionlessParams::new(1.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn spot_radius_examples() {
        assert_relative_eq!(spot_radius(0.2).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(spot_radius(2.0).unwrap(), 0.2, max_relative = 1e-15);
        assert_relative_eq!(
            spot_radius_exact(1.0).unwrap(),
            0.382_740_2,
            max_relative = 1e-6
        );
        assert!(spot_radius(0.0).is_err());
    }

    #[test]
    fn first_minimum_approaches_bessel_zero() {
        // the J0 estimate holds once the spot is much narrower than the shadow
        let mut last_err = f64::INFINITY;
        for ell in [2.0, 3.0, 10.0, 100.0] {
            let p = DimensionlessParams::new(0.2, ell, 0.0).unwrap();
            let grid = uniform_grid(3.0, 1501).unwrap();
            let prof = point_source_pattern(&grid, &p, None, &quad()).unwrap();
            let err = (first_minimum(&prof).unwrap() - spot_radius_exact(0.2).unwrap()).abs();
            assert!(err < last_err);
            last_err = err;
        }
        assert!(last_err < 2e-3, "{last_err}");
        let p = DimensionlessParams::new(2.0, 2.0, 0.0).unwrap();
        let prof =
            point_source_pattern(&uniform_grid(0.6, 601).unwrap(), &p, None, &quad()).unwrap();
        assert_relative_eq!(
            first_minimum(&prof).unwrap(),
            spot_radius_exact(2.0).unwrap(),
            max_relative = 0.01
        );
        let flat = RadialProfile {
            w: vec![1.0; 601],
            ..prof
        };
        assert_eq!(first_minimum(&flat), None);
    }

    #[test]
    fn rejects_bad_grids() {
        let p = DimensionlessParams::new(1.0, 2.0, 0.0).unwrap();
        assert!(matches!(
            point_source_pattern(&[], &p, None, &quad()),
            Err(Error::GridMismatch(_))
        ));
        assert!(point_source_pattern(&[0.0, 0.0], &p, None, &quad()).is_err());
        assert!(point_source_pattern(&[-1.0], &p, None, &quad()).is_err());
    }

    #[test]
    fn arc_inside_limits() {
        assert_eq!(arc_inside(0.5, 0.0, 1.0), 2.0 * PI);
        assert_eq!(arc_inside(1.5, 0.0, 1.0), 0.0);
        assert_eq!(arc_inside(0.5, 2.0, 1.0), 0.0);
        assert_relative_eq!(arc_inside(2.0, 2.0, 1e-9), 0.0, epsilon = 1e-6);
        // circle through the disc centre: chord geometry r = u, β = u√2
        assert_relative_eq!(arc_inside(1.0, 1.0, 2f64.sqrt()), PI, max_relative = 1e-12);
    }

    /// The literal source average: a disc of radius β about the screen
    /// point, 256 equally spaced angles and a Gauss-Legendre-free midpoint
    /// rule in t with the area weight 2t/β².
    fn literal_source_average(
        u: f64,
        p: &DimensionlessParams,
        phase: Option<&EikonalPhase>,
    ) -> f64 {
        let nt = 48;
        let ntheta = 256;
        let mut acc = 0.0;
        for i in 0..nt {
            let t = p.beta * (i as f64 + 0.5) / nt as f64;
            let mut ring = 0.0;
            for j in 0..ntheta {
                let th = 2.0 * PI * j as f64 / ntheta as f64;
                let r = (u * u + t * t + 2.0 * u * t * th.cos()).sqrt();
                ring += amplitude(r, p, phase, &quad()).unwrap().norm_sqr();
            }
            acc += 2.0 * t / (p.beta * p.beta) * ring / ntheta as f64 * (p.beta / nt as f64);
        }
        acc
    }

    #[test]
    fn overlap_kernel_matches_literal_average() {
        let p = DimensionlessParams::new(0.4, 2.0, 0.6).unwrap();
        let grid = [0.0, 0.9, 2.2];
        let prof = source_averaged_pattern(&grid, &p, None, &quad(), 0).unwrap();
        for (i, &u) in grid.iter().enumerate() {
            let lit = literal_source_average(u, &p, None);
            assert!(
                (prof.w[i] - lit).abs() < 2e-3,
                "u={u}: {} vs {lit}",
                prof.w[i]
            );
        }
    }

    #[test]
    fn zero_source_radius_is_point_pattern() {
        let p = DimensionlessParams::new(0.5, 2.0, 0.0).unwrap();
        let grid = uniform_grid(3.0, 7).unwrap();
        let a = source_averaged_pattern(&grid, &p, None, &quad(), 0).unwrap();
        let b = point_source_pattern(&grid, &p, None, &quad()).unwrap();
        assert_eq!(a.w, b.w);
    }

    #[test]
    fn visibility_examples() {
        let setup = PoissonSetup {
            source_radius: 0.0,
            l1: 0.125,
            l2: 0.125,
            obstacle: Obstacle::sphere(500e-9).unwrap(),
            particle: None,
            wavelength: Some(10e-12),
        };
        let reports = visibility_checks(&setup).unwrap();
        assert!(reports.iter().all(|r| r.satisfied), "{reports:?}");
        // oversized source: R0 ≥ R (L1+L2)/L2 = 1 µm
        let big = PoissonSetup {
            source_radius: 1e-6,
            ..setup.clone()
        };
        let reports = visibility_checks(&big).unwrap();
        let shadow = reports.iter().find(|r| r.name == "shadow_exists").unwrap();
        assert!(!shadow.satisfied);
        // non-paraxial geometry
        let close = PoissonSetup { l1: 1e-5, ..setup };
        let reports = visibility_checks(&close).unwrap();
        assert!(
            !reports
                .iter()
                .find(|r| r.name == "paraxial")
                .unwrap()
                .satisfied
        );
    }

    #[test]
    fn wavelength_override_scales_with_velocity() {
        let p = ParticleSpecies::preset("au100").unwrap();
        let setup = PoissonSetup {
            source_radius: 0.0,
            l1: 0.1,
            l2: 0.1,
            obstacle: Obstacle::sphere(500e-9).unwrap(),
            particle: Some(p.clone()),
            wavelength: Some(1e-12),
        };
        assert_relative_eq!(
            setup.wavelength_at(Some(4.0)).unwrap(),
            0.5e-12,
            max_relative = 1e-15
        );
        let plain = PoissonSetup {
            wavelength: None,
            ..setup
        };
        assert_relative_eq!(
            plain.wavelength_at(None).unwrap(),
            p.wavelength(),
            max_relative = 1e-14
        );
        let empty = PoissonSetup {
            particle: None,
            ..plain
        };
        assert!(empty.validate().is_err());
    }

    fn au100_phase(obstacle: Obstacle) -> EikonalPhase {
        let p = ParticleSpecies::preset("au100").unwrap();
        EikonalPhase::new(obstacle, &p, 2.0, &quad()).unwrap()
    }

    /// `∫_{s0}^{s_neg} B (e^{iφ} - 1) ds` by brute force: adaptive
    /// quadrature on panels a few percent of `s - 1` wide.
    fn direct_interaction_integral(
        u: f64,
        p: &DimensionlessParams,
        phase: &EikonalPhase,
        s0: f64,
    ) -> Complex64 {
        let mut breaks = vec![s0];
        while breaks[breaks.len() - 1] < phase.s_negligible() {
            let x = breaks[breaks.len() - 1] - 1.0;
            breaks.push((1.0 + 1.02 * x).min(phase.s_negligible()));
        }
        let f =
            |s: f64| bare(p, u, s) * (Complex64::from_polar(1.0, phase.phase(s).unwrap()) - 1.0);
        let spec = QuadratureSpec {
            max_subdivisions: 200_000,
            ..quad()
        };
        integrate_piecewise(f, &breaks, &spec).unwrap().value
    }

    #[test]
    fn near_wall_asymptotics_match_direct_integration() {
        let p = DimensionlessParams::new(0.2, 2.0, 0.0).unwrap();
        for obstacle in [
            Obstacle::sphere(500e-9).unwrap(),
            Obstacle::disc(500e-9, 10e-9).unwrap(),
        ] {
            let phase = au100_phase(obstacle).with_computed_capture().unwrap();
            let s0 = 1.0 + phase.capture_eta();
            for u in [0.0, 0.7, 2.5] {
                let free = Complex64::new(0.0, 1.0)
                    * Complex64::from_polar(1.0, -PI * p.k * u * u / p.ell);
                let blocked = integrate_piecewise(
                    |s| bare(&p, u, s),
                    &oscillation_breaks(&p, u, 0.0, s0),
                    &quad(),
                )
                .unwrap()
                .value;
                let direct = free - blocked + direct_interaction_integral(u, &p, &phase, s0);
                let a = amplitude(u, &p, Some(&phase), &quad()).unwrap();
                assert!((a - direct).norm() < 1e-5, "u = {u}: {a} vs {direct}");
            }
        }
    }

    #[test]
    fn capture_off_is_computable() {
        let p = DimensionlessParams::new(0.2, 2.0, 0.0).unwrap();
        let phase = au100_phase(Obstacle::sphere(500e-9).unwrap());
        let eta = phase.s_min() - 1.0;
        let phase = phase.with_capture(eta).unwrap();
        assert!(phase.phase(phase.s_min()).unwrap() > 1e8);
        let w = amplitude(0.0, &p, Some(&phase), &quad())
            .unwrap()
            .norm_sqr();
        assert!(w.is_finite() && w > 1.0, "{w}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn point_pattern_is_nonnegative_and_finite(k in 0.05f64..3.0, ell in 1.2f64..4.0, u in 0.0f64..8.0) {
            let p = DimensionlessParams::new(k, ell, 0.0).unwrap();
            let w = amplitude(u, &p, None, &quad()).unwrap().norm_sqr();
            prop_assert!(w.is_finite() && w >= 0.0);
        }

        #[test]
        fn axis_intensity_is_one(k in 0.05f64..5.0, ell in 1.1f64..5.0) {
            let p = DimensionlessParams::new(k, ell, 0.0).unwrap();
            let w = amplitude(0.0, &p, None, &quad()).unwrap().norm_sqr();
            prop_assert!((w - 1.0).abs() < 1e-8);
        }
    }
}
