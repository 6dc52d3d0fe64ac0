//! Scenario configuration: parsing, validation and canonical serialisation.
//!
//! A config is a flat list of `section.key = value` lines (see
//! [`matterwave::kv`]). Sections:
//!
//! * `mode`: `farfield`, `poisson_ideal`, `poisson_quantum`,
//!   `poisson_classical` or `poisson_compare`;
//! * `particle.*`: `preset`, or inline `name`, `mass` (amu), `alpha` (Å³),
//!   `velocity` (m/s), `dv_rel`, `density` (kg/m³); inline keys override a
//!   preset;
//! * `poisson.*` or `farfield.*`: the geometry of the chosen mode;
//! * `numerics.*`, `averaging.*`, `output.*`: optional.
//!
//! Values are stored in config units so that serialisation is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use matterwave::constants::ANGSTROM3;
use matterwave::farfield::{FarFieldSetup, GravityLength};
use matterwave::interaction::{Obstacle, PhaseTableSpec};
use matterwave::kv;
use matterwave::numerics::QuadratureSpec;
use matterwave::particles::{ParticleSpecies, DEFAULT_DENSITY};
use matterwave::poisson::{PatternOptions, PhaseModel, PoissonSetup};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FarField,
    PoissonIdeal,
    PoissonQuantum,
    PoissonClassical,
    PoissonCompare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FarField => "farfield",
            Mode::PoissonIdeal => "poisson_ideal",
            Mode::PoissonQuantum => "poisson_quantum",
            Mode::PoissonClassical => "poisson_classical",
            Mode::PoissonCompare => "poisson_compare",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Mode::FarField,
            Mode::PoissonIdeal,
            Mode::PoissonQuantum,
            Mode::PoissonClassical,
            Mode::PoissonCompare,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
    }

    pub fn is_poisson(self) -> bool {
        self != Mode::FarField
    }
}

/// Particle parameters in config units (mass in amu, alpha in Å³).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    pub name: String,
    pub mass: f64,
    pub alpha: f64,
    pub velocity: f64,
    pub dv_rel: f64,
    pub density: f64,
}

impl ParticleConfig {
    pub fn species(&self) -> matterwave::Result<ParticleSpecies> {
        let mut p = ParticleSpecies::new(
            self.name.clone(),
            self.mass,
            self.alpha * ANGSTROM3,
            self.velocity,
        )?
        .with_spread(self.dv_rel)?;
        p.density = self.density;
        p.validate()?;
        Ok(p)
    }

    fn from_species(p: &ParticleSpecies) -> Self {
        Self {
            name: p.name.clone(),
            mass: p.mass,
            alpha: p.alpha / ANGSTROM3,
            velocity: p.v_long,
            dv_rel: p.dv_rel,
            density: p.density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    Sphere,
    Disc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonConfig {
    pub radius: f64,
    pub source_radius: f64,
    pub l1: f64,
    pub l2: f64,
    pub obstacle: ObstacleKind,
    pub thickness: Option<f64>,
    pub wavelength: Option<f64>,
    pub capture: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldConfig {
    pub slit_width: f64,
    pub slit_height: f64,
    pub l1: f64,
    pub l2: f64,
    pub period: f64,
    pub open_width: f64,
    pub thickness: f64,
    pub theta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    /// Degrees.
    pub latitude: f64,
    pub flight_height: f64,
    pub source_temperature: f64,
    pub transmission: f64,
    pub accumulation_time: f64,
    pub target_count: f64,
    pub gravity_length: GravityLength,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetupConfig {
    FarField(FarFieldConfig),
    Poisson(PoissonConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub grid_points: usize,
    /// Grid end; `None` means 3ℓ.
    pub u_max: Option<f64>,
    pub source_samples: usize,
    pub velocity_nodes: usize,
    pub table_points: usize,
    pub phase_floor: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        let t = PhaseTableSpec::default();
        let o = PatternOptions::default();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            grid_points: 600,
            u_max: None,
            source_samples: o.source_samples,
            velocity_nodes: o.velocity_nodes,
            table_points: t.points,
            phase_floor: t.phase_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub particle: Option<ParticleConfig>,
    pub setup: SetupConfig,
    pub numerics: NumericsConfig,
    pub average_source: bool,
    pub average_velocity: bool,
    pub output_path: String,
}

/// Scalar numeric keys, the valid targets of a parameter sweep.
pub const NUMERIC_KEYS: &[&str] = &[
    "particle.mass",
    "particle.alpha",
    "particle.velocity",
    "particle.dv_rel",
    "particle.density",
    "poisson.R",
    "poisson.R0",
    "poisson.L1",
    "poisson.L2",
    "poisson.b",
    "poisson.wavelength",
    "farfield.slit_width",
    "farfield.slit_height",
    "farfield.L1",
    "farfield.L2",
    "farfield.period",
    "farfield.open_width",
    "farfield.thickness",
    "farfield.theta",
    "farfield.eps1",
    "farfield.eps2",
    "farfield.eps3",
    "farfield.latitude",
    "farfield.flight_height",
    "farfield.source_temperature",
    "farfield.transmission",
    "farfield.accumulation_time",
    "farfield.target_count",
    "numerics.rel_tol",
    "numerics.abs_tol",
    "numerics.max_subdivisions",
    "numerics.grid_points",
    "numerics.u_max",
    "numerics.source_samples",
    "numerics.velocity_nodes",
    "numerics.table_points",
    "numerics.phase_floor",
];

struct Value {
    text: String,
    line: usize,
    column: usize,
}

/// Key-value entries being consumed by the schema.
struct Fields {
    map: BTreeMap<String, Value>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.map.keys().any(|k| k.starts_with(&prefix))
    }

    fn first_in_section(&self, section: &str) -> Option<(&String, &Value)> {
        let prefix = format!("{section}.");
        self.map.iter().find(|(k, _)| k.starts_with(&prefix))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        let x: f64 = v.text.parse().map_err(|_| {
            ConfigError::at(
                v.line,
                v.column,
                key,
                format!("expected a number, got `{}`", v.text),
            )
        })?;
        if !x.is_finite() {
            return Err(ConfigError::at(
                v.line,
                v.column,
                key,
                "value must be finite",
            ));
        }
        Ok(Some(x))
    }

    fn req_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .ok_or_else(|| ConfigError::field(key, "required key is missing"))
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        v.text.parse().map(Some).map_err(|_| {
            ConfigError::at(
                v.line,
                v.column,
                key,
                format!("expected a non-negative integer, got `{}`", v.text),
            )
        })
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        match v.text.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            other => Err(ConfigError::at(
                v.line,
                v.column,
                key,
                format!("expected true or false, got `{other}`"),
            )),
        }
    }

    fn string(&mut self, key: &str) -> Option<(String, usize, usize)> {
        self.take(key).map(|v| (v.text, v.line, v.column))
    }
}

fn parse_particle(f: &mut Fields) -> Result<Option<ParticleConfig>, ConfigError> {
    if !f.has_section("particle") {
        return Ok(None);
    }
    let base = match f.string("particle.preset") {
        Some((id, line, col)) => Some(
            ParticleSpecies::preset(&id)
                .map(|p| ParticleConfig::from_species(&p))
                .map_err(|e| ConfigError::at(line, col, "particle.preset", e.to_string()))?,
        ),
        None => None,
    };
    let name = f.string("particle.name").map(|s| s.0);
    let mass = f.f64("particle.mass")?;
    let alpha = f.f64("particle.alpha")?;
    let velocity = f.f64("particle.velocity")?;
    let dv_rel = f.f64("particle.dv_rel")?;
    let density = f.f64("particle.density")?;
    let p = match base {
        Some(b) => ParticleConfig {
            name: name.unwrap_or(b.name),
            mass: mass.unwrap_or(b.mass),
            alpha: alpha.unwrap_or(b.alpha),
            velocity: velocity.unwrap_or(b.velocity),
            dv_rel: dv_rel.unwrap_or(b.dv_rel),
            density: density.unwrap_or(b.density),
        },
        None => {
            let missing = |k: &str| {
                ConfigError::field(k, "required key is missing (or give particle.preset)")
            };
            ParticleConfig {
                name: name.ok_or_else(|| missing("particle.name"))?,
                mass: mass.ok_or_else(|| missing("particle.mass"))?,
                alpha: alpha.ok_or_else(|| missing("particle.alpha"))?,
                velocity: velocity.ok_or_else(|| missing("particle.velocity"))?,
                dv_rel: dv_rel.unwrap_or(0.0),
                density: density.unwrap_or(DEFAULT_DENSITY),
            }
        }
    };
    p.species()
        .map_err(|e| ConfigError::field("particle", e.to_string()))?;
    Ok(Some(p))
}

fn parse_poisson(f: &mut Fields) -> Result<PoissonConfig, ConfigError> {
    let obstacle = match f.string("poisson.obstacle") {
        Some((s, line, col)) => match s.as_str() {
            "sphere" => ObstacleKind::Sphere,
            "disc" => ObstacleKind::Disc,
            other => {
                return Err(ConfigError::at(
                    line,
                    col,
                    "poisson.obstacle",
                    format!("expected sphere or disc, got `{other}`"),
                ))
            }
        },
        None => {
            return Err(ConfigError::field(
                "poisson.obstacle",
                "required key is missing",
            ))
        }
    };
    let cfg = PoissonConfig {
        radius: f.req_f64("poisson.R")?,
        source_radius: f.f64("poisson.R0")?.unwrap_or(0.0),
        l1: f.req_f64("poisson.L1")?,
        l2: f.req_f64("poisson.L2")?,
        obstacle,
        thickness: f.f64("poisson.b")?,
        wavelength: f.f64("poisson.wavelength")?,
        capture: f.bool("poisson.capture")?.unwrap_or(true),
    };
    match (cfg.obstacle, cfg.thickness) {
        (ObstacleKind::Disc, None) => {
            return Err(ConfigError::field(
                "poisson.b",
                "a disc obstacle needs its thickness",
            ))
        }
        (ObstacleKind::Sphere, Some(_)) => {
            return Err(ConfigError::field(
                "poisson.b",
                "thickness only applies to a disc obstacle",
            ))
        }
        _ => {}
    }
    Ok(cfg)
}

fn parse_farfield(f: &mut Fields) -> Result<FarFieldConfig, ConfigError> {
    let gravity_length = match f.string("farfield.gravity_length") {
        None => GravityLength::L2Only,
        Some((s, line, col)) => match s.as_str() {
            "L2" => GravityLength::L2Only,
            "L1+L2" => GravityLength::L1PlusL2,
            other => {
                return Err(ConfigError::at(
                    line,
                    col,
                    "farfield.gravity_length",
                    format!("expected L2 or L1+L2, got `{other}`"),
                ))
            }
        },
    };
    Ok(FarFieldConfig {
        slit_width: f.req_f64("farfield.slit_width")?,
        slit_height: f.req_f64("farfield.slit_height")?,
        l1: f.req_f64("farfield.L1")?,
        l2: f.req_f64("farfield.L2")?,
        period: f.req_f64("farfield.period")?,
        open_width: f.req_f64("farfield.open_width")?,
        thickness: f.req_f64("farfield.thickness")?,
        theta: f.req_f64("farfield.theta")?,
        eps1: f.req_f64("farfield.eps1")?,
        eps2: f.req_f64("farfield.eps2")?,
        eps3: f.req_f64("farfield.eps3")?,
        latitude: f.req_f64("farfield.latitude")?,
        flight_height: f.req_f64("farfield.flight_height")?,
        source_temperature: f.req_f64("farfield.source_temperature")?,
        transmission: f.req_f64("farfield.transmission")?,
        accumulation_time: f.req_f64("farfield.accumulation_time")?,
        target_count: f.req_f64("farfield.target_count")?,
        gravity_length,
    })
}

fn parse_numerics(f: &mut Fields) -> Result<NumericsConfig, ConfigError> {
    let d = NumericsConfig::default();
    Ok(NumericsConfig {
        rel_tol: f.f64("numerics.rel_tol")?.unwrap_or(d.rel_tol),
        abs_tol: f.f64("numerics.abs_tol")?.unwrap_or(d.abs_tol),
        max_subdivisions: f
            .usize("numerics.max_subdivisions")?
            .unwrap_or(d.max_subdivisions),
        grid_points: f.usize("numerics.grid_points")?.unwrap_or(d.grid_points),
        u_max: f.f64("numerics.u_max")?,
        source_samples: f
            .usize("numerics.source_samples")?
            .unwrap_or(d.source_samples),
        velocity_nodes: f
            .usize("numerics.velocity_nodes")?
            .unwrap_or(d.velocity_nodes),
        table_points: f.usize("numerics.table_points")?.unwrap_or(d.table_points),
        phase_floor: f.f64("numerics.phase_floor")?.unwrap_or(d.phase_floor),
    })
}

/// Parses and validates a scenario config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_entries(kv::parse_document(text).map_err(ConfigError::from)?)
}

/// Parses `base` and then applies `overrides` on top; keys present in both
/// take the override's value.
pub fn parse_layered(base: &str, overrides: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries = kv::parse_document(base).map_err(ConfigError::from)?;
    for e in kv::parse_document(overrides).map_err(ConfigError::from)? {
        entries.retain(|x| x.key != e.key);
        entries.push(e);
    }
    parse_entries(entries)
}

fn parse_entries(entries: Vec<kv::Entry>) -> Result<ScenarioConfig, ConfigError> {
    if entries.is_empty() {
        return Err(ConfigError::at(1, 1, "", "empty configuration"));
    }
    let mut f = Fields {
        map: entries
            .into_iter()
            .map(|e| {
                (
                    e.key,
                    Value {
                        text: e.value,
                        line: e.line,
                        column: e.column,
                    },
                )
            })
            .collect(),
    };
    let mode = match f.string("mode") {
        Some((s, line, col)) => Mode::parse(&s)
            .ok_or_else(|| ConfigError::at(line, col, "mode", format!("unknown mode `{s}`")))?,
        None => return Err(ConfigError::field("mode", "required key is missing")),
    };
    let particle = parse_particle(&mut f)?;

    let (own, other) = if mode.is_poisson() {
        ("poisson", "farfield")
    } else {
        ("farfield", "poisson")
    };
    if let Some((k, v)) = f.first_in_section(other) {
        return Err(ConfigError::at(
            v.line,
            v.column,
            k,
            format!("mode `{}` does not take `{other}.*` keys", mode.as_str()),
        ));
    }
    if !f.has_section(own) {
        return Err(ConfigError::field(
            own,
            format!("mode `{}` needs a `{own}` section", mode.as_str()),
        ));
    }
    let setup = if mode.is_poisson() {
        SetupConfig::Poisson(parse_poisson(&mut f)?)
    } else {
        SetupConfig::FarField(parse_farfield(&mut f)?)
    };
    let numerics = parse_numerics(&mut f)?;
    let average_source = f.bool("averaging.source")?.unwrap_or(true);
    let average_velocity = f.bool("averaging.velocity")?.unwrap_or(true);
    let output_path = f
        .string("output.path")
        .map_or_else(|| "out".to_string(), |s| s.0);
    if let Some((s, line, col)) = f.string("output.format") {
        if s != "csv" {
            return Err(ConfigError::at(
                line,
                col,
                "output.format",
                format!("unsupported format `{s}` (only csv)"),
            ));
        }
    }
    if let Some((k, v)) = f.map.iter().next() {
        return Err(ConfigError::at(v.line, v.column, k, "unknown key"));
    }

    let cfg = ScenarioConfig {
        mode,
        particle,
        setup,
        numerics,
        average_source,
        average_velocity,
        output_path,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Checks cross-field invariants and that the physical setup builds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let needs_particle = matches!(
            self.mode,
            Mode::FarField | Mode::PoissonQuantum | Mode::PoissonClassical | Mode::PoissonCompare
        );
        if needs_particle && self.particle.is_none() {
            return Err(ConfigError::field(
                "particle",
                format!("mode `{}` needs a particle", self.mode.as_str()),
            ));
        }
        match (&self.setup, self.mode.is_poisson()) {
            (SetupConfig::Poisson(_), true) => {
                self.poisson_setup()
                    .map_err(|e| ConfigError::field("poisson", e.to_string()))?;
            }
            (SetupConfig::FarField(_), false) => {
                self.farfield_setup()
                    .map_err(|e| ConfigError::field("farfield", e.to_string()))?;
            }
            _ => {
                return Err(ConfigError::field(
                    "mode",
                    "mode and setup section disagree",
                ))
            }
        }
        let n = &self.numerics;
        self.quadrature()
            .validate()
            .map_err(|e| ConfigError::field("numerics", e.to_string()))?;
        if n.grid_points < 2 {
            return Err(ConfigError::field(
                "numerics.grid_points",
                "need at least 2 grid points",
            ));
        }
        if let Some(u) = n.u_max {
            if !(u > 0.0) {
                return Err(ConfigError::field("numerics.u_max", "must be positive"));
            }
        }
        if n.velocity_nodes == 0 || n.velocity_nodes > 64 {
            return Err(ConfigError::field(
                "numerics.velocity_nodes",
                "must be between 1 and 64",
            ));
        }
        if n.table_points < 4 {
            return Err(ConfigError::field(
                "numerics.table_points",
                "need at least 4 table points",
            ));
        }
        if !(n.phase_floor > 0.0) {
            return Err(ConfigError::field(
                "numerics.phase_floor",
                "must be positive",
            ));
        }
        if self.output_path.is_empty() {
            return Err(ConfigError::field("output.path", "must not be empty"));
        }
        Ok(())
    }

    pub fn species(&self) -> Option<ParticleSpecies> {
        self.particle.as_ref().and_then(|p| p.species().ok())
    }

    pub fn poisson_setup(&self) -> matterwave::Result<PoissonSetup> {
        let SetupConfig::Poisson(c) = &self.setup else {
            return Err(matterwave::Error::Domain {
                op: "ScenarioConfig::poisson_setup",
                msg: "not a near-field scenario".into(),
            });
        };
        let obstacle = match c.obstacle {
            ObstacleKind::Sphere => Obstacle::sphere(c.radius)?,
            ObstacleKind::Disc => Obstacle::disc(c.radius, c.thickness.unwrap_or(f64::NAN))?,
        };
        let particle = match &self.particle {
            Some(p) => Some(p.species()?),
            None => None,
        };
        let setup = PoissonSetup {
            source_radius: c.source_radius,
            l1: c.l1,
            l2: c.l2,
            obstacle,
            particle,
            wavelength: c.wavelength,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn farfield_setup(&self) -> matterwave::Result<FarFieldSetup> {
        let SetupConfig::FarField(c) = &self.setup else {
            return Err(matterwave::Error::Domain {
                op: "ScenarioConfig::farfield_setup",
                msg: "not a far-field scenario".into(),
            });
        };
        let setup = FarFieldSetup {
            slit_width: c.slit_width,
            slit_height: c.slit_height,
            l1: c.l1,
            l2: c.l2,
            period: c.period,
            open_width: c.open_width,
            thickness: c.thickness,
            theta: c.theta,
            eps1: c.eps1,
            eps2: c.eps2,
            eps3: c.eps3,
            latitude: c.latitude.to_radians(),
            flight_height: c.flight_height,
            source_temperature: c.source_temperature,
            transmission: c.transmission,
            accumulation_time: c.accumulation_time,
            target_count: c.target_count,
            gravity_length: c.gravity_length,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.numerics.rel_tol,
            abs_tol: self.numerics.abs_tol,
            max_subdivisions: self.numerics.max_subdivisions,
        }
    }

    pub fn pattern_options(&self, model: PhaseModel) -> PatternOptions {
        PatternOptions {
            model,
            quad: self.quadrature(),
            table: PhaseTableSpec {
                points: self.numerics.table_points,
                phase_floor: self.numerics.phase_floor,
                ..PhaseTableSpec::default()
            },
            source_samples: self.numerics.source_samples,
            velocity_nodes: self.numerics.velocity_nodes,
        }
    }

    /// Canonical text form: every field, fixed key order, shortest
    /// round-trip number formatting.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let num = |x: f64| format!("{x:?}");
        put("mode", self.mode.as_str().to_string());
        if let Some(p) = &self.particle {
            put("particle.name", format!("\"{}\"", p.name));
            put("particle.mass", num(p.mass));
            put("particle.alpha", num(p.alpha));
            put("particle.velocity", num(p.velocity));
            put("particle.dv_rel", num(p.dv_rel));
            put("particle.density", num(p.density));
        }
        match &self.setup {
            SetupConfig::Poisson(c) => {
                put(
                    "poisson.obstacle",
                    match c.obstacle {
                        ObstacleKind::Sphere => "sphere",
                        ObstacleKind::Disc => "disc",
                    }
                    .into(),
                );
                put("poisson.R", num(c.radius));
                put("poisson.R0", num(c.source_radius));
                put("poisson.L1", num(c.l1));
                put("poisson.L2", num(c.l2));
                if let Some(b) = c.thickness {
                    put("poisson.b", num(b));
                }
                if let Some(l) = c.wavelength {
                    put("poisson.wavelength", num(l));
                }
                put("poisson.capture", c.capture.to_string());
            }
            SetupConfig::FarField(c) => {
                put("farfield.slit_width", num(c.slit_width));
                put("farfield.slit_height", num(c.slit_height));
                put("farfield.L1", num(c.l1));
                put("farfield.L2", num(c.l2));
                put("farfield.period", num(c.period));
                put("farfield.open_width", num(c.open_width));
                put("farfield.thickness", num(c.thickness));
                put("farfield.theta", num(c.theta));
                put("farfield.eps1", num(c.eps1));
                put("farfield.eps2", num(c.eps2));
                put("farfield.eps3", num(c.eps3));
                put("farfield.latitude", num(c.latitude));
                put("farfield.flight_height", num(c.flight_height));
                put("farfield.source_temperature", num(c.source_temperature));
                put("farfield.transmission", num(c.transmission));
                put("farfield.accumulation_time", num(c.accumulation_time));
                put("farfield.target_count", num(c.target_count));
                put(
                    "farfield.gravity_length",
                    match c.gravity_length {
                        GravityLength::L2Only => "L2",
                        GravityLength::L1PlusL2 => "L1+L2",
                    }
                    .into(),
                );
            }
        }
        let n = &self.numerics;
        put("numerics.rel_tol", num(n.rel_tol));
        put("numerics.abs_tol", num(n.abs_tol));
        put("numerics.max_subdivisions", n.max_subdivisions.to_string());
        put("numerics.grid_points", n.grid_points.to_string());
        if let Some(u) = n.u_max {
            put("numerics.u_max", num(u));
        }
        put("numerics.source_samples", n.source_samples.to_string());
        put("numerics.velocity_nodes", n.velocity_nodes.to_string());
        put("numerics.table_points", n.table_points.to_string());
        put("numerics.phase_floor", num(n.phase_floor));
        put("averaging.source", self.average_source.to_string());
        put("averaging.velocity", self.average_velocity.to_string());
        put("output.path", format!("\"{}\"", self.output_path));
        put("output.format", "csv".into());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2A: &str = include_str!("../presets/fig2a.conf");

    #[test]
    fn fig2a_geometry() {
        let c = parse_config(FIG2A).unwrap();
        let SetupConfig::Poisson(p) = &c.setup else {
            panic!()
        };
        assert_eq!(c.mode, Mode::PoissonIdeal);
        assert_eq!(p.radius, 500e-9);
        assert_eq!((p.l1, p.l2), (0.125, 0.125));
        assert_eq!(p.wavelength, Some(10e-12));
        let params = c.poisson_setup().unwrap().params().unwrap();
        assert!((params.k - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_config("").is_err());
        assert!(parse_config("# nothing\n").is_err());
    }

    #[test]
    fn mode_setup_consistency() {
        let text = "mode = farfield\nparticle.preset = au5000\npoisson.R = 5e-7\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.path, "poisson.R");
        assert_eq!(e.line, Some(3));
        let text = "mode = poisson_quantum\npoisson.R = 5e-7\npoisson.L1 = 0.1\npoisson.L2 = 0.1\npoisson.obstacle = sphere\n";
        assert_eq!(parse_config(text).unwrap_err().path, "particle");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{FIG2A}\npoisson.radius = 1\n");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.path, "poisson.radius");
        assert!(e.to_string().contains("unknown key"));
    }

    #[test]
    fn bad_values_carry_positions() {
        let e = parse_config("mode = poisson_ideal\npoisson.R = big\npoisson.obstacle = sphere\n")
            .unwrap_err();
        assert_eq!((e.line, e.column), (Some(2), Some(13)));
        let e = parse_config("mode = poisson_ideal\npoisson.obstacle = cube\n").unwrap_err();
        assert_eq!(e.path, "poisson.obstacle");
        let text = FIG2A.replace("obstacle = sphere", "obstacle = disc");
        assert_eq!(parse_config(&text).unwrap_err().path, "poisson.b");
    }

    #[test]
    fn canonical_round_trip() {
        for text in crate::presets::PRESETS.iter().map(|p| p.1) {
            let c = parse_config(text).unwrap();
            let canon = c.to_canonical();
            let again = parse_config(&canon).unwrap();
            assert_eq!(again, c);
            assert_eq!(again.to_canonical(), canon);
        }
    }

    #[test]
    fn layered_overrides() {
        let c = parse_layered(FIG2A, "poisson.R0 = 2.5e-7\n").unwrap();
        let SetupConfig::Poisson(p) = &c.setup else {
            panic!()
        };
        assert_eq!(p.source_radius, 2.5e-7);
    }

    #[test]
    fn preset_particle_with_overrides() {
        let text = "mode = farfield\nparticle.preset = au100\nparticle.velocity = 3\n";
        // the farfield section is missing, but the particle resolved first
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.path, "farfield");
        let mut f = Fields {
            map: kv::parse_document("particle.preset = au100\nparticle.velocity = 3\n")
                .unwrap()
                .into_iter()
                .map(|e| {
                    (
                        e.key,
                        Value {
                            text: e.value,
                            line: e.line,
                            column: e.column,
                        },
                    )
                })
                .collect(),
        };
        let p = parse_particle(&mut f).unwrap().unwrap();
        assert_eq!(p.velocity, 3.0);
        assert_eq!(p.mass, 19700.0);
    }
}
