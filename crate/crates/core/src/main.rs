use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdcavity::config::{parse_config, Config, Preset, RunConfig, SweepConfig};
use qdcavity::runner::{self, OracleReport};
use qdcavity::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_ORACLE_MISMATCH: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qdcavity", version, about = "Rabi dynamics of a phonon-dressed quantum dot in a chi(2) cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Maximum integrator step.
    #[arg(long, global = true)]
    step: Option<f64>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Also run the Fock-space oracle comparison.
    #[arg(long, global = true)]
    oracle: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a single run configuration.
    Run { config: PathBuf },
    /// Run every point of a sweep configuration.
    Sweep { config: PathBuf },
    /// Compare the integrator with the Fock-space oracle.
    Check { config: PathBuf },
    /// Run one of the built-in figure presets.
    Preset { name: String },
}

fn load(path: &Path) -> Result<Config, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn apply_flags(cfg: &mut RunConfig, cli: &Cli) -> Result<(), Error> {
    if let Some(h) = cli.step {
        cfg.grid.max_step = h;
        cfg.grid.validate()?;
    }
    if cli.oracle {
        cfg.oracle = true;
    }
    Ok(())
}

fn out_dir(cli: &Cli, cfg: &RunConfig, fallback: &str) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn expect_run(config: Config) -> Result<RunConfig, Error> {
    match config {
        Config::Run(r) => Ok(r),
        Config::Sweep(_) => Err(Error::Config("this is a sweep config; use `sweep`".into())),
    }
}

fn report_oracle(report: &OracleReport) -> u8 {
    match report.max_deviation {
        Some(d) => println!("oracle ({}) max deviation {d:.3e}", report.mode),
        None => println!("oracle ({}) max leakage {:.3e}", report.mode, report.max_leakage),
    }
    if report.passed() {
        0
    } else {
        eprintln!("oracle deviation exceeds {:e}", runner::ORACLE_TOLERANCE);
        EXIT_ORACLE_MISMATCH
    }
}

fn single(cli: &Cli, mut cfg: RunConfig, fallback: &str) -> Result<u8, Error> {
    apply_flags(&mut cfg, cli)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let dir = out_dir(cli, &cfg, fallback);
    let outcome = runner::run(&cfg, &dir)?;
    println!(
        "wrote {} samples to {} (max norm drift {:.3e})",
        outcome.series.len(),
        dir.display(),
        outcome.series.max_norm_drift()
    );
    Ok(outcome.oracle.as_ref().map_or(0, report_oracle))
}

fn sweep(cli: &Cli, mut cfg: SweepConfig) -> Result<u8, Error> {
    apply_flags(&mut cfg.template, cli)?;
    let dir = out_dir(cli, &cfg.template, "out");
    let outcome = runner::sweep(&cfg, &dir, cli.workers)?;
    let failed = outcome.failures();
    println!(
        "swept {} points into {} ({failed} failed)",
        outcome.points.len(),
        dir.display()
    );
    for p in outcome.points.iter().filter(|p| p.result.is_err()) {
        if let Err(e) = &p.result {
            eprintln!("point {:?} failed: {e}", p.values);
        }
    }
    Ok(if failed > 0 { EXIT_NUMERICAL } else { 0 })
}

fn dispatch(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Run { config } => single(cli, expect_run(load(config)?)?, "out"),
        Command::Sweep { config } => match load(config)? {
            Config::Sweep(s) => sweep(cli, s),
            Config::Run(_) => Err(Error::Config("config has no [sweep] section".into())),
        },
        Command::Check { config } => {
            let mut cfg = expect_run(load(config)?)?;
            cfg.oracle = true;
            single(cli, cfg, "out")
        }
        Command::Preset { name } => {
            let preset: Preset = name.parse()?;
            single(cli, RunConfig::preset(preset), &format!("out/{}", preset.name()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
