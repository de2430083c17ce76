mod config;
mod verify;

use clap::{Parser, Subcommand};
use config::RunConfig;
use dspec_core::io::to_json;
use dspec_core::transform::apply_chain;
use dspec_core::{spectrum, Error};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dspec", version, about = "Spectra and Darboux transformations of singular Schrödinger problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Number of eigenvalues, overriding the config.
    #[arg(long)]
    count: Option<usize>,
    /// Relative integration tolerance, overriding the config.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, norming constants and beta_n.
    Solve(Common),
    /// Apply the configured chain of transformation steps.
    Transform(Common),
    /// Run verification checks and write a report.
    Verify(Common),
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let text = to_json(value).map_err(|e| Failure::Numerical(format!("serialization failed: {e}")))?;
    write_file(dir, name, &text)
}

fn prepare(c: &Common) -> Result<RunConfig, Failure> {
    let cfg = RunConfig::load(&c.config, c.count, c.tol)?;
    std::fs::create_dir_all(&c.out)
        .map_err(|e| Failure::Input(format!("cannot create {}: {e}", c.out.display())))?;
    Ok(cfg)
}

fn solve(c: &Common) -> Result<bool, Failure> {
    let cfg = prepare(c)?;
    let data = spectrum::spectral_data(&cfg.problem, cfg.count, &cfg.opts)?;
    write_json(&c.out, "spectral.json", &data)?;
    write_file(&c.out, "spectral.csv", &data.to_csv())?;
    Ok(true)
}

#[derive(Serialize)]
struct ChainFile<'a> {
    steps: &'a [dspec_core::transform::ChainStep],
    problems: Vec<String>,
}

fn transform(c: &Common) -> Result<bool, Failure> {
    let cfg = prepare(c)?;
    if cfg.steps.is_empty() {
        return Err(Failure::Input("the config lists no transformation steps".into()));
    }
    let record = apply_chain(&cfg.problem, &cfg.steps, &cfg.opts)?;
    let mut names = Vec::new();
    for (k, p) in record.problems.iter().enumerate() {
        let name = format!("problem_{k}.json");
        write_json(&c.out, &name, p)?;
        names.push(name);
    }
    write_json(
        &c.out,
        "chain.json",
        &ChainFile {
            steps: &record.steps,
            problems: names,
        },
    )?;
    Ok(true)
}

fn run_verify(c: &Common) -> Result<bool, Failure> {
    let cfg = prepare(c)?;
    let report = verify::run(&cfg.problem, &cfg.suite, cfg.count, &cfg.opts);
    write_json(&c.out, "report.json", &report)?;
    for check in &report.checks {
        eprintln!("{:<16} {:?}", check.name, check.status);
    }
    Ok(!report.failed())
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("DSPEC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Input(format!("DSPEC_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Solve(c) => solve(c),
        Command::Transform(c) => transform(c),
        Command::Verify(c) => run_verify(c),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
