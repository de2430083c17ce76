use dspec_core::transform::StepSpec;
use dspec_core::{Error, Problem, Result, SolverOptions};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const DEFAULT_COUNT: usize = 10;

/// A problem given inline or as a path relative to the config file.
#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemSource {
    Path(String),
    Inline(Box<Problem>),
}

#[derive(Deserialize, Default, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum Suite {
    #[default]
    All,
    Named(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: ProblemSource,
    #[serde(default)]
    count: Option<usize>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    steps: Vec<StepSpec>,
    #[serde(default)]
    suite: Option<Suite>,
}

pub struct RunConfig {
    pub problem: Problem,
    pub count: usize,
    pub opts: SolverOptions,
    pub steps: Vec<StepSpec>,
    pub suite: Vec<String>,
}

pub const CHECKS: [&str; 7] = [
    "asymptotics",
    "oscillation",
    "trace",
    "invariant",
    "transformation",
    "chain",
    "symmetry",
];

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(path: &Path, count: Option<usize>, tol: Option<f64>) -> Result<RunConfig> {
        let raw: RawConfig = parse(&read(path)?, path)?;
        let problem = match raw.problem {
            ProblemSource::Inline(p) => *p,
            ProblemSource::Path(rel) => {
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                let file: PathBuf = base.join(rel);
                parse(&read(&file)?, &file)?
            }
        };
        let count = count.or(raw.count).unwrap_or(DEFAULT_COUNT);
        if count == 0 {
            return Err(Error::InvalidInput("count must be at least 1".into()));
        }
        let mut opts = SolverOptions::default();
        if let Some(t) = tol.or(raw.tol) {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1), got {t}")));
            }
            opts = opts.with_rtol(t);
        }
        let suite = match raw.suite.unwrap_or_default() {
            Suite::All => CHECKS.iter().map(|s| s.to_string()).collect(),
            Suite::Named(s) if s == "all" => CHECKS.iter().map(|s| s.to_string()).collect(),
            Suite::Named(s) => vec![s],
            Suite::List(v) => v,
        };
        if let Some(bad) = suite.iter().find(|s| !CHECKS.contains(&s.as_str())) {
            return Err(Error::InvalidInput(format!(
                "unknown check '{bad}'; available: {}",
                CHECKS.join(", ")
            )));
        }
        Ok(RunConfig {
            problem,
            count,
            opts,
            steps: raw.steps,
            suite,
        })
    }
}
