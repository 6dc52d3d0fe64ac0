//! Scenario execution and parameter sweeps.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use matterwave::classical::{classical_pattern, distinguishability};
use matterwave::farfield::feasibility_report;
use matterwave::poisson::{
    first_minimum, monochromatic_pattern, uniform_grid, visibility_checks,
    wavelength_averaged_pattern, PhaseModel, RadialProfile,
};

use crate::config::{parse_layered, Mode, ScenarioConfig, SetupConfig, NUMERIC_KEYS};
use crate::error::{CliError, ConfigError};
use crate::output;

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Primary profile at the first grid node (quantum in compare mode).
    pub w0: Option<f64>,
    /// First minimum of the primary profile.
    pub spot_radius: Option<f64>,
    /// Quantum/classical spot ratio (compare mode).
    pub distinguishability: Option<f64>,
    pub files: Vec<PathBuf>,
}

/// Writes all artifacts or none: on the first failure every file written so
/// far is removed again.
fn commit(dir: &Path, artifacts: Vec<(&str, String)>) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for (name, content) in artifacts {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, content) {
            remove_all(&written);
            return Err(io(&path)(e));
        }
        written.push(path);
    }
    Ok(written)
}

fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}

struct Poisson<'a> {
    cfg: &'a ScenarioConfig,
    setup: matterwave::poisson::PoissonSetup,
    grid: Vec<f64>,
    average_source: bool,
    average_velocity: bool,
}

impl Poisson<'_> {
    fn quantum(&self, model: PhaseModel) -> Result<RadialProfile, CliError> {
        let options = self.cfg.pattern_options(model);
        Ok(if self.average_velocity {
            wavelength_averaged_pattern(&self.grid, &self.setup, &options, self.average_source)?
        } else {
            monochromatic_pattern(&self.grid, &self.setup, &options, self.average_source)?
        })
    }

    fn classical(&self, capture: bool) -> Result<RadialProfile, CliError> {
        let options = self.cfg.pattern_options(PhaseModel::Eikonal { capture });
        Ok(classical_pattern(
            &self.grid,
            &self.setup,
            &options,
            self.average_source,
            self.average_velocity,
        )?)
    }
}

/// Runs one scenario and writes its artifacts into `out_dir`:
///
/// * far field: `report.txt`, `report.kv`;
/// * `poisson_ideal`, `poisson_quantum`, `poisson_classical`: `profile.csv`;
/// * `poisson_compare`: `quantum.csv`, `classical.csv`,
///   `distinguishability.kv`;
/// * every near-field mode also writes the visibility checks as
///   `report.txt` and `report.kv`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let mut summary = RunSummary {
        w0: None,
        spot_radius: None,
        distinguishability: None,
        files: Vec::new(),
    };
    let mut artifacts: Vec<(&str, String)> = Vec::new();

    match (&cfg.setup, cfg.mode) {
        (SetupConfig::FarField(_), Mode::FarField) => {
            let setup = cfg.farfield_setup()?;
            let particle = cfg
                .species()
                .ok_or_else(|| ConfigError::field("particle", "far-field mode needs a particle"))?;
            let reports = feasibility_report(&setup, &particle);
            let title = format!("far-field feasibility for {}", particle.name);
            artifacts.push(("report.txt", output::report_text(&title, &reports)));
            artifacts.push(("report.kv", output::report_kv(&reports)));
        }
        (SetupConfig::Poisson(pc), mode) => {
            let setup = cfg.poisson_setup()?;
            let ell = setup.params()?.ell;
            let u_max = cfg.numerics.u_max.unwrap_or(3.0 * ell);
            let spread = setup.particle.as_ref().map_or(0.0, |p| p.dv_rel);
            let run = Poisson {
                cfg,
                grid: uniform_grid(u_max, cfg.numerics.grid_points)?,
                average_source: cfg.average_source && setup.source_radius > 0.0,
                average_velocity: cfg.average_velocity && spread > 0.0,
                setup,
            };
            let checks = visibility_checks(&run.setup)?;
            let eikonal = PhaseModel::Eikonal {
                capture: pc.capture,
            };
            let primary = match mode {
                Mode::PoissonIdeal => run.quantum(PhaseModel::Ideal)?,
                Mode::PoissonQuantum => run.quantum(eikonal)?,
                Mode::PoissonClassical => run.classical(pc.capture)?,
                Mode::PoissonCompare => {
                    let q = run.quantum(eikonal)?;
                    let c = run.classical(pc.capture)?;
                    let d = distinguishability(&q, &c)?;
                    summary.distinguishability = Some(d.spot_ratio);
                    artifacts.push(("classical.csv", output::profile_csv(&c)));
                    artifacts.push((
                        "distinguishability.kv",
                        output::distinguishability_kv(&d, &q, &c),
                    ));
                    q
                }
                Mode::FarField => unreachable!("validated above"),
            };
            summary.w0 = Some(primary.center());
            summary.spot_radius = first_minimum(&primary);
            let name = if mode == Mode::PoissonCompare {
                "quantum.csv"
            } else {
                "profile.csv"
            };
            artifacts.insert(0, (name, output::profile_csv(&primary)));
            artifacts.push((
                "report.txt",
                output::report_text("near-field visibility", &checks),
            ));
            artifacts.push(("report.kv", output::report_kv(&checks)));
        }
        _ => return Err(ConfigError::field("mode", "mode and setup section disagree").into()),
    }
    summary.files = commit(out_dir, artifacts)?;
    Ok(summary)
}

/// A parsed `KEY=v1,v2,...` sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let (key, list) = text
            .split_once('=')
            .ok_or_else(|| ConfigError::field("--sweep", "expected KEY=v1,v2,..."))?;
        let key = key.trim().to_string();
        if !NUMERIC_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::field(&key, "not a sweepable numeric key"));
        }
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        ConfigError::field(&key, format!("bad sweep value `{}`", v.trim()))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(ConfigError::field(&key, "no sweep values"));
        }
        Ok(Self { key, values })
    }

    fn label(&self, value: f64) -> String {
        format!("{}={value:?}", self.key)
    }
}

/// Runs `base` once per sweep value, each into `out_dir/KEY=value/`, and
/// writes `out_dir/summary.csv` with columns
/// `value,w0,spot_radius,distinguishability`. Every config is validated
/// before any computation starts; if any run fails, all sweep outputs are
/// removed.
pub fn sweep(
    base: &str,
    overrides: &str,
    spec: &SweepSpec,
    out_dir: &Path,
) -> Result<Vec<RunSummary>, CliError> {
    let configs = spec
        .values
        .iter()
        .map(|&v| {
            let line = format!("{} = {v:?}\n", spec.key);
            parse_layered(base, &format!("{overrides}\n{line}"))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let results: Vec<Result<RunSummary, CliError>> = configs
        .par_iter()
        .zip(&spec.values)
        .map(|(cfg, &v)| run_scenario(cfg, &out_dir.join(spec.label(v))))
        .collect();
    if let Some(pos) = results.iter().position(Result::is_err) {
        for (r, &v) in results.iter().zip(&spec.values) {
            if let Ok(s) = r {
                remove_all(&s.files);
            }
            let _ = fs::remove_dir(out_dir.join(spec.label(v)));
        }
        return Err(results.into_iter().nth(pos).unwrap().unwrap_err());
    }
    let summaries: Vec<RunSummary> = results.into_iter().map(Result::unwrap).collect();

    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), output::number);
    let mut csv = String::from("value,w0,spot_radius,distinguishability\n");
    for (s, &v) in summaries.iter().zip(&spec.values) {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            output::number(v),
            opt(s.w0),
            opt(s.spot_radius),
            opt(s.distinguishability)
        ));
    }
    let path = out_dir.join("summary.csv");
    if let Err(source) = fs::write(&path, csv) {
        for s in &summaries {
            remove_all(&s.files);
        }
        return Err(CliError::Io { path, source });
    }
    Ok(summaries)
}
