//! Particle species and the de Broglie / thermal kinematics.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::constants::{amu_to_kg, polarizability_to_c4, ANGSTROM3, BOLTZMANN, PLANCK};
use crate::error::{domain, require_positive, Result};
use crate::kv;
use crate::numerics::gauss_hermite;

/// FWHM of a Gaussian in units of its standard deviation, 2√(2 ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Default bulk density for metal clusters (kg/m³), an upper bound for dense
/// metals, which makes the derived diameter a lower bound.
pub const DEFAULT_DENSITY: f64 = 2e4;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpecies {
    pub name: String,
    /// Mass in amu.
    pub mass: f64,
    /// Polarizability volume (m³).
    pub alpha: f64,
    /// Most probable longitudinal velocity (m/s).
    pub v_long: f64,
    /// Relative velocity spread Δv/v, read as a FWHM.
    pub dv_rel: f64,
    /// Bulk density (kg/m³).
    pub density: f64,
}

impl ParticleSpecies {
    pub fn new(name: impl Into<String>, mass: f64, alpha: f64, v_long: f64) -> Result<Self> {
        let p = Self {
            name: name.into(),
            mass,
            alpha,
            v_long,
            dv_rel: 0.0,
            density: DEFAULT_DENSITY,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_velocity(mut self, v_long: f64) -> Result<Self> {
        self.v_long = v_long;
        self.validate()?;
        Ok(self)
    }

    pub fn with_spread(mut self, dv_rel: f64) -> Result<Self> {
        self.dv_rel = dv_rel;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("ParticleSpecies", "mass", self.mass)?;
        require_positive("ParticleSpecies", "v_long", self.v_long)?;
        require_positive("ParticleSpecies", "density", self.density)?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(domain(
                "ParticleSpecies",
                format!("alpha must be >= 0, got {}", self.alpha),
            ));
        }
        if !(0.0..1.0).contains(&self.dv_rel) {
            return Err(domain(
                "ParticleSpecies",
                format!("dv_rel must lie in [0, 1), got {}", self.dv_rel),
            ));
        }
        Ok(())
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass * crate::constants::AMU
    }

    /// Casimir-Polder coefficient; zero for a non-polarizable particle.
    pub fn c4(&self) -> f64 {
        if self.alpha == 0.0 {
            0.0
        } else {
            polarizability_to_c4(self.alpha).expect("alpha validated positive")
        }
    }

    /// de Broglie wavelength at the most probable velocity.
    pub fn wavelength(&self) -> f64 {
        PLANCK / (self.mass_kg() * self.v_long)
    }

    /// Sphere-equivalent diameter from mass and density.
    pub fn diameter(&self) -> f64 {
        (6.0 * self.mass_kg() / (PI * self.density)).cbrt()
    }

    /// Deterministic quadrature over the longitudinal velocity distribution:
    /// a Gaussian of standard deviation `dv_rel·v_long / 2.355` sampled at
    /// `n` Gauss-Hermite nodes. Nodes at non-positive velocity are dropped and
    /// the remaining weights renormalised. Returns `(v, weight)` pairs whose
    /// weights sum to one; a zero spread gives the single node `(v_long, 1)`.
    pub fn velocity_nodes(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        if self.dv_rel == 0.0 {
            return Ok(vec![(self.v_long, 1.0)]);
        }
        let sigma = self.dv_rel * self.v_long / FWHM_PER_SIGMA;
        let mut nodes: Vec<(f64, f64)> = gauss_hermite(n)?
            .into_iter()
            .map(|(x, w)| (self.v_long + std::f64::consts::SQRT_2 * sigma * x, w))
            .filter(|(v, _)| *v > 0.0)
            .collect();
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for node in &mut nodes {
            node.1 /= total;
        }
        Ok(nodes)
    }

    /// Looks up a built-in species by id (`c60`, `au5000`, `au100`,
    /// `cluster30k`), case-insensitive.
    pub fn preset(id: &str) -> Result<Self> {
        let id = id.to_ascii_lowercase();
        presets()
            .iter()
            .find(|(k, _)| *k == id)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| domain("ParticleSpecies::preset", format!("unknown species `{id}`")))
    }

    pub fn preset_ids() -> Vec<&'static str> {
        presets().iter().map(|(k, _)| k.as_str()).collect()
    }
}

static SPECIES_TABLE: &str = include_str!("../data/species.conf");

fn presets() -> &'static Vec<(String, ParticleSpecies)> {
    static TABLE: OnceLock<Vec<(String, ParticleSpecies)>> = OnceLock::new();
    TABLE
        .get_or_init(|| parse_species_table(SPECIES_TABLE).expect("shipped species table is valid"))
}

/// Parses a species table (see `data/species.conf`). Alpha is given in Å³.
pub fn parse_species_table(text: &str) -> Result<Vec<(String, ParticleSpecies)>> {
    let entries = kv::parse_document(text)?;
    let mut ids: Vec<String> = Vec::new();
    for e in &entries {
        let Some((id, _)) = e.key.split_once('.') else {
            return Err(crate::error::Error::Parse {
                line: e.line,
                column: 1,
                msg: format!("expected `<id>.<field>`, got `{}`", e.key),
            });
        };
        if !ids.iter().any(|i| i == id) {
            ids.push(id.to_string());
        }
    }
    let mut out = Vec::new();
    for id in ids {
        let mut name = id.clone();
        let (mut mass, mut alpha, mut v, mut dv, mut density) =
            (None, None, None, 0.0, DEFAULT_DENSITY);
        for e in entries
            .iter()
            .filter(|e| e.key.split_once('.').map(|p| p.0) == Some(id.as_str()))
        {
            let field = e.key.split_once('.').map(|p| p.1).unwrap_or_default();
            let num = || {
                e.value
                    .parse::<f64>()
                    .map_err(|_| crate::error::Error::Parse {
                        line: e.line,
                        column: e.column,
                        msg: format!("`{}` is not a number", e.value),
                    })
            };
            match field {
                "name" => name = e.value.clone(),
                "mass" => mass = Some(num()?),
                "alpha" => alpha = Some(num()? * ANGSTROM3),
                "velocity" => v = Some(num()?),
                "dv_rel" => dv = num()?,
                "density" => density = num()?,
                other => {
                    return Err(crate::error::Error::Parse {
                        line: e.line,
                        column: 1,
                        msg: format!("unknown species field `{other}`"),
                    })
                }
            }
        }
        let missing = |f: &str| {
            domain(
                "parse_species_table",
                format!("species `{id}` is missing `{f}`"),
            )
        };
        let mut p = ParticleSpecies::new(
            name,
            mass.ok_or_else(|| missing("mass"))?,
            alpha.ok_or_else(|| missing("alpha"))?,
            v.ok_or_else(|| missing("velocity"))?,
        )?;
        p.dv_rel = dv;
        p.density = density;
        p.validate()?;
        out.push((id, p));
    }
    Ok(out)
}

/// λ = h / (m v), mass in amu.
pub fn de_broglie_wavelength(mass_amu: f64, v: f64) -> Result<f64> {
    require_positive("de_broglie_wavelength", "v", v)?;
    Ok(PLANCK / (amu_to_kg(mass_amu)? * v))
}

/// Most probable speed of a Maxwell-Boltzmann gas, √(2 k_B T / m).
pub fn thermal_velocity(mass_amu: f64, temperature: f64) -> Result<f64> {
    require_positive("thermal_velocity", "T", temperature)?;
    Ok((2.0 * BOLTZMANN * temperature / amu_to_kg(mass_amu)?).sqrt())
}

/// λ_th = h / √(2 k_B T m).
pub fn thermal_wavelength(mass_amu: f64, temperature: f64) -> Result<f64> {
    require_positive("thermal_wavelength", "T", temperature)?;
    Ok(PLANCK / (2.0 * BOLTZMANN * temperature * amu_to_kg(mass_amu)?).sqrt())
}
