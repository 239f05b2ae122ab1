use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use rotordyn_cli::{execute, parse_config_with, sidecar_path, Command, Overrides, THREADS_ENV};

/// Quadrotor dynamics experiments: model comparison, identity checks and
/// closed-loop tracking.
#[derive(Debug, Parser)]
#[command(name = "rotordyn", version, allow_negative_numbers = true)]
struct Cli {
    /// Experiment to run; overrides `command` in the config file.
    command: Option<Command>,
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV output file (stdout when absent).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Step size, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time, s.
    #[arg(long)]
    duration: Option<f64>,
    /// euler or rk4.
    #[arg(long)]
    integrator: Option<String>,
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let text = match &cli.config {
        Some(path) => {
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => String::new(),
    };
    let overrides = Overrides {
        command: cli.command,
        dt: cli.dt,
        duration: cli.duration,
        integrator: cli.integrator,
        seed: cli.seed,
        out: cli.out,
    };
    let cfg = parse_config_with(&text, &overrides).with_context(|| match &cli.config {
        Some(p) => format!("in {}", p.display()),
        None => "in command-line configuration".into(),
    })?;
    let effective = cfg.effective_toml();
    let result = execute(&cfg)?;

    match &cfg.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, &result.csv)
                .with_context(|| format!("writing {}", path.display()))?;
            let side = sidecar_path(path);
            std::fs::write(&side, &effective)
                .with_context(|| format!("writing {}", side.display()))?;
            println!("# effective configuration ({})", side.display());
            for line in effective.lines() {
                println!("# {line}");
            }
            print!("{}", result.summary);
            println!("wrote {}", path.display());
        }
        None => {
            for line in effective.lines() {
                eprintln!("# {line}");
            }
            eprint!("{}", result.summary);
            print!("{}", result.csv);
        }
    }
    Ok(result.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
