//! `centralspin`: run one scenario from a JSON config and/or flags and write
//! a CSV or JSON table.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 when the computation fails.

mod config;
mod output;
mod scenarios;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{BathConfig, Format, GridConfig, OutputConfig, RunConfig, Scenario, DEFAULT_RANDOM_MAX_N};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "centralspin", version, allow_negative_numbers = true, about = "Central spin decoherence: closed forms, oracles and master equation")]
struct Args {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Bath preset, or `random` for a seeded random sector spec.
    #[arg(long)]
    preset: Option<String>,
    /// Bath size (maximum size for `random`).
    #[arg(long)]
    n: Option<usize>,
    /// Coupling K.
    #[arg(long)]
    k: Option<f64>,
    /// Last time of the grid, in units of 1/K.
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

fn merge(args: Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = args.scenario {
        cfg.scenario = Some(s);
    }
    cfg.bath = match (args.preset, args.n, cfg.bath.take()) {
        (Some(p), n, _) if p == "random" => {
            Some(BathConfig::Random { random_max_n: n.unwrap_or(DEFAULT_RANDOM_MAX_N) })
        }
        (Some(p), n, _) => Some(BathConfig::Preset { preset: p, n }),
        (None, Some(n), Some(BathConfig::Preset { preset, .. })) => Some(BathConfig::Preset { preset, n: Some(n) }),
        (None, Some(n), Some(BathConfig::Random { .. })) => Some(BathConfig::Random { random_max_n: n }),
        (None, Some(_), Some(BathConfig::Explicit { .. })) => {
            return Err(CliError::Usage("--n cannot resize an explicit bath".into()))
        }
        (None, Some(n), None) => Some(BathConfig::Preset { preset: "unpolarized".into(), n: Some(n) }),
        (None, None, b) => b,
    };
    if let Some(k) = args.k {
        cfg.coupling = Some(k);
    }
    if args.tmax.is_some() || args.points.is_some() {
        let grid = cfg.grid.get_or_insert(GridConfig { t_max: None, n_points: None });
        grid.t_max = args.tmax.or(grid.t_max);
        grid.n_points = args.points.or(grid.n_points);
    }
    if args.out.is_some() || args.format.is_some() {
        let out = cfg.output.get_or_insert(OutputConfig { path: None, format: Format::Csv });
        if let Some(p) = args.out {
            out.path = Some(p);
        }
        if let Some(f) = args.format {
            out.format = f;
        }
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    Ok(cfg)
}

fn execute(args: Args) -> Result<(), CliError> {
    let resolved = config::resolve(merge(args)?)?;
    let table = scenarios::run(&resolved)?;
    let text = output::render(&table, &resolved)?;
    match &resolved.out_path {
        Some(path) => {
            output::write_atomic(path, &text)?;
            for (name, v) in &table.notes {
                println!("{name} = {v:.3e}");
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("centralspin: {e}");
            ExitCode::from(e.code())
        }
    }
}
