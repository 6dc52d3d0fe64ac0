//! Classical deflection model: straight rays through the obstacle plane, each
//! given the instantaneous radial kick of the eikonal phase gradient, mapped
//! onto the screen. Used as the counter-model to the quantum pattern.
//!
//! A ray leaving the aperture at `s` lands at
//! `u_f(s) = ℓ s + L2 q(s) / (m v_z R)`. With `q = (ħ / R) dφ/ds` and
//! `k = R² m v_z / (L2 h)` the deflection term is `φ'(s) / (2πk)`, which keeps
//! the model in the same dimensionless variables as the quantum engine.
//! Rays with `u_f < 0` cross the axis and land at `|u_f|`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::interaction::EikonalPhase;
use crate::numerics::{bisect, QuadratureSpec};
use crate::poisson::{
    build_phase, check_grid, disc_average, DimensionlessParams, PatternOptions, PoissonSetup,
    ProfileKind, ProfileMeta, RadialProfile,
};

/// Samples used to locate sign changes of `u_f` and `du_f/ds`.
const MAP_NODES: usize = 4000;

/// A stretch of aperture radii on which `|u_f|` is strictly monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    s_lo: f64,
    s_hi: f64,
    /// `|u_f|` at the two ends.
    u_lo: f64,
    u_hi: f64,
}

/// Aperture-to-screen ray map for one obstacle, particle and velocity.
#[derive(Debug, Clone)]
pub struct RayMap {
    params: DimensionlessParams,
    phase: Option<EikonalPhase>,
    s0: f64,
    /// Beyond this radius the phase is negligible and rays go straight.
    s_free: f64,
    branches: Vec<Branch>,
    /// Aperture radii where `u_f = 0`.
    focal: Vec<f64>,
    /// Screen radii of folds (`du_f/ds = 0`).
    caustics: Vec<f64>,
    norm: f64,
}

impl RayMap {
    pub fn params(&self) -> &DimensionlessParams {
        &self.params
    }

    /// Innermost transmitted radius, `1 + η`.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Aperture radii of rays that hit the screen centre.
    pub fn focal_rays(&self) -> &[f64] {
        &self.focal
    }

    pub fn caustics(&self) -> &[f64] {
        &self.caustics
    }

    /// Landing position `u_f(s)` (signed) and its derivative.
    pub fn landing(&self, s: f64) -> Result<(f64, f64)> {
        if !(s >= self.s0) {
            return Err(domain(
                "RayMap::landing",
                format!("s = {s} is blocked (s0 = {})", self.s0),
            ));
        }
        let ell = self.params.ell;
        match &self.phase {
            Some(p) if s <= self.s_free => {
                let (_, d1, d2) = p.phase_derivatives(s)?;
                let c = 2.0 * PI * self.params.k;
                Ok((ell * s + d1 / c, ell + d2 / c))
            }
            _ => Ok((ell * s, ell)),
        }
    }

    /// Unnormalised `u·w(u)`: `ℓ² Σ s / |du_f/ds|` over every ray landing at
    /// `u > 0`.
    fn flux_density(&self, u: f64) -> f64 {
        let ell2 = self.params.ell * self.params.ell;
        let mut g = 0.0;
        for b in &self.branches {
            let (lo, hi) = if b.u_lo <= b.u_hi {
                (b.u_lo, b.u_hi)
            } else {
                (b.u_hi, b.u_lo)
            };
            if !(u >= lo && u < hi) {
                continue;
            }
            let f = |s: f64| {
                self.landing(s)
                    .map(|(x, _)| x.abs() - u)
                    .unwrap_or(f64::NAN)
            };
            let tol = 1e-13 * b.s_hi.max(1.0);
            if let Ok(s) = bisect(f, b.s_lo, b.s_hi, tol) {
                if let Ok((_, d)) = self.landing(s) {
                    g += ell2 * s / d.abs();
                }
            }
        }
        // straight rays beyond the tabulated phase
        let s = u / self.params.ell;
        if s > self.s_free && s >= self.s0 {
            g += ell2 * s / self.params.ell;
        }
        g
    }

    /// Normalised `u·w(u)`.
    pub fn radial_flux(&self, u: f64) -> f64 {
        self.norm * self.flux_density(u)
    }

    /// Normalised classical intensity at `u > 0`.
    pub fn intensity(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(domain("RayMap::intensity", format!("need u > 0, got {u}")));
        }
        Ok(self.radial_flux(u) / u)
    }

    /// Screen radii where the number of contributing rays changes.
    fn break_radii(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .branches
            .iter()
            .flat_map(|b| [b.u_lo, b.u_hi])
            .collect();
        v.push(self.params.ell * self.s_free.max(self.s0));
        v.extend(&self.caustics);
        v.retain(|x| x.is_finite() && *x > 0.0);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Builds the ray map. Without a phase every ray goes straight and the
/// obstacle casts the geometric shadow `u < ℓ`.
pub fn ray_map(params: &DimensionlessParams, phase: Option<&EikonalPhase>) -> Result<RayMap> {
    params.validate()?;
    let phase = phase.filter(|p| !p.is_negligible()).cloned();
    let s0 = 1.0 + phase.as_ref().map_or(0.0, EikonalPhase::capture_eta);
    let s_free = phase.as_ref().map_or(s0, |p| p.s_negligible());
    let mut map = RayMap {
        params: *params,
        phase,
        s0,
        s_free,
        branches: Vec::new(),
        focal: Vec::new(),
        caustics: Vec::new(),
        norm: 1.0,
    };
    if let Some(p) = &map.phase {
        if s0 < p.s_min() {
            return Err(domain(
                "ray_map",
                format!(
                    "phase table starts at s = {} but rays start at s = {s0}",
                    p.s_min()
                ),
            ));
        }
        if s_free > s0 {
            build_branches(&mut map)?;
        }
    }
    let ref_u = 3.0 * params.ell;
    let raw = map.flux_density(ref_u) / ref_u;
    if !(raw > 0.0 && raw.is_finite()) {
        return Err(domain(
            "ray_map",
            format!("no classical flux reaches the reference radius u = {ref_u}"),
        ));
    }
    map.norm = 1.0 / raw;
    Ok(map)
}

fn build_branches(map: &mut RayMap) -> Result<()> {
    let (a, b) = (map.s0 - 1.0, map.s_free - 1.0);
    let nodes: Vec<f64> = (0..MAP_NODES)
        .map(|i| 1.0 + a * (b / a).powf(i as f64 / (MAP_NODES - 1) as f64))
        .map(|s: f64| s.clamp(map.s0, map.s_free))
        .collect();
    let values = nodes
        .iter()
        .map(|&s| map.landing(s))
        .collect::<Result<Vec<_>>>()?;

    // split points: zeros of u_f (focal rays) and of du_f/ds (folds)
    let mut cuts = vec![nodes[0]];
    for i in 1..nodes.len() {
        let (s_a, s_b) = (nodes[i - 1], nodes[i]);
        let ((fa, da), (fb, db)) = (values[i - 1], values[i]);
        let mut here = Vec::new();
        if (fa > 0.0) != (fb > 0.0) {
            let s = bisect(
                |s| map.landing(s).map(|v| v.0).unwrap_or(f64::NAN),
                s_a,
                s_b,
                1e-14 * s_b,
            )?;
            map.focal.push(s);
            here.push(s);
        }
        if (da > 0.0) != (db > 0.0) {
            let s = bisect(
                |s| map.landing(s).map(|v| v.1).unwrap_or(f64::NAN),
                s_a,
                s_b,
                1e-14 * s_b,
            )?;
            map.caustics.push(map.landing(s)?.0.abs());
            here.push(s);
        }
        here.sort_by(f64::total_cmp);
        cuts.extend(here);
        cuts.push(s_b);
    }
    // merge consecutive sample intervals into monotone branches
    let abs_u = |s: f64| map.landing(s).map(|v| v.0.abs());
    let mut edges = vec![cuts[0]];
    let mut dir = 0i8;
    for w in cuts.windows(2) {
        let (ua, ub) = (abs_u(w[0])?, abs_u(w[1])?);
        let d = if ub > ua { 1 } else { -1 };
        if dir != 0 && d != dir {
            edges.push(w[0]);
        }
        dir = d;
    }
    edges.push(*cuts.last().unwrap());
    let mut branches = Vec::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            branches.push(Branch {
                s_lo: w[0],
                s_hi: w[1],
                u_lo: abs_u(w[0])?,
                u_hi: abs_u(w[1])?,
            });
        }
    }
    map.branches = branches;
    map.caustics.sort_by(f64::total_cmp);
    Ok(())
}

/// Least-squares slope of `ln w` against `ln u` over grid nodes in
/// `[u_lo, u_hi]`.
pub fn log_log_slope(profile: &RadialProfile, u_lo: f64, u_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = profile
        .u
        .iter()
        .zip(&profile.w)
        .filter(|(u, w)| **u >= u_lo && **u <= u_hi && **u > 0.0 && **w > 0.0)
        .map(|(u, w)| (u.ln(), w.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "fewer than two positive nodes in [{u_lo}, {u_hi}]"
        )));
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    Ok(sxy / sxx)
}

/// Classical intensity for a point source. The axis divergence `w ≈ A/u`
/// is recorded as `meta.origin_coefficient`; a `u = 0` node carries the
/// value of the first nonzero node instead of an infinity.
pub fn classical_point_pattern(u_grid: &[f64], map: &RayMap) -> Result<RadialProfile> {
    check_grid(u_grid)?;
    let mut w: Vec<f64> = u_grid
        .par_iter()
        .map(|&u| {
            if u > 0.0 {
                map.intensity(u)
            } else {
                Ok(f64::NAN)
            }
        })
        .collect::<Result<_>>()?;
    let mut meta = ProfileMeta::new(
        ProfileKind::Classical,
        map.params.point_source(),
        map.phase.as_ref(),
    );
    meta.capture_eta = map.s0 - 1.0;
    if w[0].is_nan() {
        w[0] = w.get(1).copied().unwrap_or(0.0);
    }
    if !map.focal.is_empty() {
        meta.origin_coefficient = Some(map.radial_flux(1e-9));
    }
    let u_max = u_grid[u_grid.len() - 1];
    meta.caustics = map
        .caustics
        .iter()
        .copied()
        .filter(|&c| c <= u_max)
        .collect();
    Ok(RadialProfile {
        u: u_grid.to_vec(),
        w,
        meta,
    })
}

/// Classical intensity for a uniform circular source of projected radius
/// `map.params().beta`, using the same disc average as the quantum engine.
pub fn classical_source_averaged(
    u_grid: &[f64],
    map: &RayMap,
    quad: &QuadratureSpec,
) -> Result<RadialProfile> {
    let beta = map.params.beta;
    if beta == 0.0 {
        return classical_point_pattern(u_grid, map);
    }
    check_grid(u_grid)?;
    let breaks = map.break_radii();
    let w = u_grid
        .par_iter()
        .map(|&u| disc_average(|r| map.radial_flux(r), u, beta, &breaks, quad))
        .collect::<Result<Vec<_>>>()?;
    let mut meta = ProfileMeta::new(ProfileKind::Classical, map.params, map.phase.as_ref());
    meta.capture_eta = map.s0 - 1.0;
    meta.source_averaged = true;
    meta.caustics = map.caustics.clone();
    Ok(RadialProfile {
        u: u_grid.to_vec(),
        w,
        meta,
    })
}

/// Classical pattern of `setup`, optionally averaged over the source disc
/// and over the particle's velocity distribution. Each velocity node gets
/// its own phase, capture radius and ray map; patterns are normalised before
/// averaging.
pub fn classical_pattern(
    u_grid: &[f64],
    setup: &PoissonSetup,
    options: &PatternOptions,
    average_source: bool,
    average_velocity: bool,
) -> Result<RadialProfile> {
    check_grid(u_grid)?;
    setup.validate()?;
    let nodes = match (&setup.particle, average_velocity) {
        (Some(p), true) => p.velocity_nodes(options.velocity_nodes)?,
        _ => vec![(setup.nominal_velocity().unwrap_or(f64::NAN), 1.0)],
    };
    let mut total: Option<RadialProfile> = None;
    for &(v, weight) in &nodes {
        let v = v.is_finite().then_some(v);
        let mut params = setup.params_at(v)?;
        if !average_source {
            params = params.point_source();
        }
        let phase = build_phase(setup, v, options)?;
        let map = ray_map(&params, phase.as_ref())?;
        let p = classical_source_averaged(u_grid, &map, &options.quad)?;
        match &mut total {
            None => {
                let mut p = p;
                p.w.iter_mut().for_each(|x| *x *= weight);
                p.meta.capture_eta *= weight;
                p.meta.origin_coefficient = p.meta.origin_coefficient.map(|a| a * weight);
                total = Some(p);
            }
            Some(acc) => {
                for (a, x) in acc.w.iter_mut().zip(&p.w) {
                    *a += weight * x;
                }
                acc.meta.capture_eta += weight * p.meta.capture_eta;
                acc.meta.origin_coefficient =
                    match (acc.meta.origin_coefficient, p.meta.origin_coefficient) {
                        (Some(a), Some(b)) => Some(a + weight * b),
                        (a, b) => a.or(b),
                    };
                acc.meta.caustics.extend(p.meta.caustics);
            }
        }
    }
    let mut profile = total.expect("at least one velocity node");
    profile.meta.params = setup.params()?;
    if !average_source {
        profile.meta.params = profile.meta.params.point_source();
    }
    profile.meta.velocity_nodes = nodes.len();
    profile.meta.caustics.sort_by(f64::total_cmp);
    profile.meta.caustics.dedup();
    profile.meta.setup_digest = Some(setup.digest());
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distinguishability {
    /// Quantum over classical intensity at the first grid node; infinite when
    /// the classical value vanishes.
    pub spot_ratio: f64,
    /// `∫ |w_q - w_cl| du` over grid nodes with `u < ℓ` (trapezoid rule).
    pub l1_distance: f64,
}

pub fn distinguishability(
    quantum: &RadialProfile,
    classical: &RadialProfile,
) -> Result<Distinguishability> {
    if quantum.u != classical.u {
        return Err(Error::GridMismatch(
            "quantum and classical profiles use different grids".into(),
        ));
    }
    check_grid(&quantum.u)?;
    let (q0, c0) = (quantum.w[0], classical.w[0]);
    let spot_ratio = if c0 == 0.0 { f64::INFINITY } else { q0 / c0 };
    let ell = quantum.meta.params.ell;
    let mut l1 = 0.0;
    for i in 1..quantum.u.len() {
        if quantum.u[i] >= ell {
            break;
        }
        let d0 = (quantum.w[i - 1] - classical.w[i - 1]).abs();
        let d1 = (quantum.w[i] - classical.w[i]).abs();
        l1 += 0.5 * (d0 + d1) * (quantum.u[i] - quantum.u[i - 1]);
    }
    Ok(Distinguishability {
        spot_ratio,
        l1_distance: l1,
    })
}
