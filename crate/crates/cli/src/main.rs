use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use matterwave_cli::{
    parse_layered, presets, run_scenario, sweep, CliError, ConfigError, SweepSpec,
};

/// Matter-wave diffraction scenarios: far-field feasibility reports and
/// near-field Poisson spot patterns.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// Scenario config file; its keys override the preset when both are given.
    config: Option<PathBuf>,
    /// Output directory (default: the config's `output.path`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Named preset used as the base configuration.
    #[arg(long)]
    preset: Option<String>,
    /// Sweep one numeric key over a list of values: KEY=v1,v2,...
    #[arg(long)]
    sweep: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<(String, String), CliError> {
    let base = match &args.preset {
        Some(name) => presets::preset(name)
            .ok_or_else(|| {
                let known: Vec<&str> = presets::names().collect();
                ConfigError::field(
                    "--preset",
                    format!("unknown preset `{name}` (known: {})", known.join(", ")),
                )
            })?
            .to_string(),
        None => String::new(),
    };
    let overrides = match &args.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| ConfigError::field("", format!("cannot read {}: {e}", path.display())))?,
        None if args.preset.is_none() => {
            return Err(ConfigError::field("", "a config file or --preset is required").into());
        }
        None => String::new(),
    };
    Ok((base, overrides))
}

fn execute(args: &Args) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(ConfigError::field("--threads", "must be at least 1").into());
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let (base, overrides) = load(args)?;
    let cfg = parse_layered(&base, &overrides)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_path));
    match &args.sweep {
        Some(text) => {
            let spec = SweepSpec::parse(text)?;
            let runs = sweep(&base, &overrides, &spec, &out)?;
            println!("{} runs written to {}", runs.len(), out.display());
        }
        None => {
            let summary = run_scenario(&cfg, &out)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
