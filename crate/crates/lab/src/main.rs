use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use repat_lab::commands;
use repat_lab::report::OutDir;
use repat_lab::{Config, LabError, Overrides};

/// Periodic orbits with repetitive pattern: build, certify and measure.
#[derive(Parser)]
#[command(name = "repat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the stage list and write it with its certificate.
    Build(Common),
    /// Re-certify a stored stage list.
    Validate(WithStages),
    /// Distance bounds between consecutive stage orbits.
    Fk(WithStages),
    /// Strip occupancy, spanning, Lyapunov and disintegration reports.
    Measure(WithStages),
    /// Build, certify and run every report.
    ReportAll(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else `./out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Truncate the schedule after this many stages.
    #[arg(long)]
    max_stage: Option<usize>,
}

#[derive(Args)]
struct WithStages {
    #[command(flatten)]
    common: Common,
    /// Stage file written by `build` (default: `<out>/stages.json`).
    #[arg(long)]
    stages: Option<PathBuf>,
}

fn setup(c: &Common) -> Result<(Config, OutDir), LabError> {
    let mut cfg = Config::load(&c.config)?;
    cfg.apply(&Overrides { seed: c.seed, max_stage: c.max_stage, out: c.out.clone() });
    let out = OutDir::create(&cfg.out_dir())?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<String, LabError> {
    match cli.command {
        Command::Build(c) => {
            let (cfg, out) = setup(&c)?;
            let b = commands::cmd_build(&cfg, &out)?;
            let last = b.stages.last().expect("stage 0 is always built");
            Ok(format!("VALID certificate for {} stages, final period {}", b.stages.len(), last.pi))
        }
        Command::Validate(w) => {
            let (cfg, out) = setup(&w.common)?;
            let path = w.stages.unwrap_or_else(|| out.path("stages.json"));
            let cert = commands::cmd_validate(&cfg, &path, &out)?;
            Ok(format!("VALID certificate, {} checks", cert.checks.len()))
        }
        Command::Fk(w) => {
            let (cfg, out) = setup(&w.common)?;
            let path = w.stages.unwrap_or_else(|| out.path("stages.json"));
            let (_, stages) = commands::load_stages(&cfg, &path)?;
            let r = commands::cmd_fk(&cfg, &stages, &out)?;
            Ok(format!("{} distance rows, all within bounds", r.rows.len()))
        }
        Command::Measure(w) => {
            let (cfg, out) = setup(&w.common)?;
            let path = w.stages.unwrap_or_else(|| out.path("stages.json"));
            let (fam, stages) = commands::load_stages(&cfg, &path)?;
            let r = commands::cmd_measure(&cfg, &fam, &stages, &out)?;
            Ok(format!("{} measure checks passed", r.verdicts.len()))
        }
        Command::ReportAll(c) => {
            let (cfg, out) = setup(&c)?;
            commands::cmd_report_all(&cfg, &out)?;
            Ok("all reports written, every check passed".to_string())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
