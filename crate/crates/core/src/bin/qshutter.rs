use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qshutter::config::{Mode, ScenarioConfig, ScenarioFile};
use qshutter::runner::run_scenario;
use qshutter::Error;

/// Transient tunneling through a double barrier after a shutter opens.
///
/// Exit status: 0 success, 2 bad configuration or arguments, 3 numerical or
/// i/o failure. Set QSHUTTER_LOG (e.g. `info`, `debug`) for diagnostics.
#[derive(Debug, Parser)]
#[command(name = "qshutter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario file as written; its `mode` key selects the output.
    Run(Common),
    /// Resonance pole table.
    Poles(Common),
    /// Wave function against x at fixed times.
    Snapshot(Common),
    /// Density against t at a fixed position.
    Trace(Common),
    /// Buildup time scales as JSON.
    Timescales(Common),
    /// Crank–Nicolson cross-check of the analytic solution.
    Validate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (flat TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Number of poles in the expansion; overrides `pole_count`.
    #[arg(long)]
    poles: Option<usize>,
    /// Locate poles from the real-axis scan over EMIN:EMAX meV instead of the full sweep.
    #[arg(long, value_name = "EMIN:EMAX", value_parser = parse_range)]
    seed_scan: Option<[f64; 2]>,
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or("expected EMIN:EMAX")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("EMIN: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("EMAX: {e}"))?;
    Ok([lo, hi])
}

fn scenario(mode: Option<Mode>, args: &Common) -> Result<ScenarioConfig, Error> {
    let mut file = match &args.config {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };
    if let Some(m) = mode {
        file.mode = Some(m);
    }
    if let Some(out) = &args.out {
        file.output_dir = Some(out.clone());
    }
    if let Some(n) = args.poles {
        file.pole_count = Some(n);
    }
    if let Some(r) = args.seed_scan {
        file.seed_scan_mev = Some(r);
    }
    ScenarioConfig::resolve(&file)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QSHUTTER_LOG", "warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Run(a) => (None, a),
        Command::Poles(a) => (Some(Mode::Poles), a),
        Command::Snapshot(a) => (Some(Mode::Snapshot), a),
        Command::Trace(a) => (Some(Mode::Trace), a),
        Command::Timescales(a) => (Some(Mode::Timescales), a),
        Command::Validate(a) => (Some(Mode::Validate), a),
    };
    let outcome = scenario(mode, args).and_then(|cfg| {
        log::info!("running {} into {}", cfg.mode.name(), cfg.output_dir.display());
        run_scenario(&cfg)
    });
    match outcome {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            println!("{}", out.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qshutter: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
