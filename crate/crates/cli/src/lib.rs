//! Command-line front end: load a JSON distribution spec and evaluate curves,
//! validate, compute moments, sample or fit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use wavpert::config::SpecConfig;
use wavpert::fitting::{fit, FitRequest};
use wavpert::moments::moment_report;
use wavpert::numerics::linspace;
use wavpert::perturbation::EFFECTIVE_SUPPORT_TAIL;

pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_KMAX: u32 = 4;
pub const DEFAULT_BUDGET: usize = 500;
pub const VALIDATION_TOLERANCE: f64 = 1e-6;
pub const MOMENT_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Parser)]
#[command(name = "wavpert", version, about = "Wavelet-perturbed probability distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,

    /// JSON distribution spec
    #[arg(long, global = true, value_name = "PATH")]
    pub spec: Option<PathBuf>,

    /// Grid points for eval and validate
    #[arg(long, global = true, default_value_t = DEFAULT_GRID, value_name = "N")]
    pub grid: usize,

    /// Highest moment order
    #[arg(long, global = true, default_value_t = DEFAULT_KMAX, value_name = "K")]
    pub kmax: u32,

    /// Number of samples
    #[arg(long, global = true, value_name = "N")]
    pub n: Option<usize>,

    #[arg(long, global = true, default_value_t = 0, value_name = "S")]
    pub seed: u64,

    /// Observations for fit, one per line
    #[arg(long, global = true, value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Output file (default: standard output)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Objective evaluations allowed in fit
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET, value_name = "B")]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandArg {
    /// CSV of base and perturbed CDF/PDF over a grid
    Eval,
    /// JSON validity report; exit status 1 if any check fails
    Validate,
    /// CSV of raw moments with corrections and direct checks
    Moments,
    /// Inverse-transform samples, one per line
    Sample,
    /// Fit beta-wavelet parameters to data by KS distance
    Fit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Eval,
    Validate,
    Moments,
    Sample { n: usize },
    Fit { data_path: PathBuf, budget: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec_path: PathBuf,
    pub command: Command,
    pub grid_points: usize,
    pub k_max: u32,
    pub seed: u64,
    pub out_path: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid spec: {0}")]
    Spec(wavpert::Error),

    #[error("{0}")]
    Computation(wavpert::Error),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage, input and spec problems; 1 for failures while computing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Parse { .. } | CliError::Spec(_) => 2,
            CliError::Computation(_) | CliError::Write { .. } => 1,
        }
    }
}

/// The rendered document and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub document: String,
    pub exit_code: u8,
}

impl TryFrom<Cli> for RunConfig {
    type Error = CliError;

    fn try_from(cli: Cli) -> Result<Self, CliError> {
        let spec_path = cli
            .spec
            .ok_or_else(|| CliError::Usage("--spec is required".to_string()))?;
        if cli.grid < 2 {
            return Err(CliError::Usage(format!("--grid must be at least 2, got {}", cli.grid)));
        }
        let command = match cli.command {
            CommandArg::Eval => Command::Eval,
            CommandArg::Validate => {
                if cli.grid < wavpert::perturbation::MIN_VALIDATION_GRID {
                    return Err(CliError::Usage(format!(
                        "validate needs --grid of at least {}, got {}",
                        wavpert::perturbation::MIN_VALIDATION_GRID,
                        cli.grid
                    )));
                }
                Command::Validate
            }
            CommandArg::Moments => {
                if cli.kmax > wavpert::moments::MAX_MOMENT_ORDER {
                    return Err(CliError::Usage(format!(
                        "--kmax must be at most {}, got {}",
                        wavpert::moments::MAX_MOMENT_ORDER,
                        cli.kmax
                    )));
                }
                Command::Moments
            }
            CommandArg::Sample => match cli.n {
                Some(n) if n >= 1 => Command::Sample { n },
                _ => return Err(CliError::Usage("sample needs --n of at least 1".to_string())),
            },
            CommandArg::Fit => {
                let data_path = cli
                    .data
                    .ok_or_else(|| CliError::Usage("fit needs --data".to_string()))?;
                if cli.budget < wavpert::fitting::MIN_BUDGET {
                    return Err(CliError::Usage(format!(
                        "--budget must be at least {}, got {}",
                        wavpert::fitting::MIN_BUDGET,
                        cli.budget
                    )));
                }
                Command::Fit {
                    data_path,
                    budget: cli.budget,
                }
            }
        };
        Ok(RunConfig {
            spec_path,
            command,
            grid_points: cli.grid,
            k_max: cli.kmax,
            seed: cli.seed,
            out_path: cli.out,
        })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_spec(path: &Path) -> Result<SpecConfig, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// One decimal observation per line; blank lines are skipped.
pub fn load_data(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read(path)?;
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|e: std::num::ParseFloatError| CliError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            column: 1,
            message: format!("'{line}' is not a number ({e})"),
        })?;
        if !value.is_finite() {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                column: 1,
                message: format!("'{line}' is not finite"),
            });
        }
        data.push(value);
    }
    if data.is_empty() {
        return Err(CliError::Usage(format!("{} holds no observations", path.display())));
    }
    Ok(data)
}

#[derive(Serialize)]
struct BetaParameters {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize)]
struct FitDocument {
    spec: SpecConfig,
    parameters: Vec<BetaParameters>,
    ks_before: f64,
    ks_after: f64,
    evaluations: usize,
    converged: bool,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_default();
    s.push('\n');
    s
}

/// Runs one command and renders its document.
pub fn run(config: &RunConfig) -> Result<Output, CliError> {
    let spec = load_spec(&config.spec_path)?;
    if let Command::Fit { data_path, budget } = &config.command {
        return run_fit(&spec, data_path, *budget);
    }

    let pd = spec.build().map_err(CliError::Spec)?;
    let mut doc = String::new();
    let exit_code = match &config.command {
        Command::Eval => {
            let (lo, hi) = pd.effective_support(EFFECTIVE_SUPPORT_TAIL);
            doc.push_str("x,cdf_base,cdf_new,pdf_base,pdf_new\n");
            for x in linspace(lo, hi, config.grid_points) {
                let base = pd.base();
                let _ = writeln!(doc, "{x},{},{},{},{}", base.cdf(x), pd.cdf(x), base.pdf(x), pd.pdf(x));
            }
            0
        }
        Command::Validate => {
            let report = pd
                .validate(config.grid_points, VALIDATION_TOLERANCE)
                .map_err(CliError::Computation)?;
            doc = to_json(&report);
            if report.passes {
                0
            } else {
                1
            }
        }
        Command::Moments => {
            let rows = moment_report(&pd, config.k_max, MOMENT_TOLERANCE).map_err(CliError::Computation)?;
            doc.push_str("k,base_moment,correction,new_moment,direct_check,residual\n");
            for r in rows {
                let _ = writeln!(
                    doc,
                    "{},{},{},{},{},{}",
                    r.order, r.base_moment, r.correction, r.new_moment, r.direct_check, r.residual
                );
            }
            0
        }
        Command::Sample { n } => {
            for x in pd.sample(*n, config.seed).map_err(CliError::Computation)? {
                let _ = writeln!(doc, "{x}");
            }
            0
        }
        Command::Fit { .. } => unreachable!("handled above"),
    };
    Ok(Output { document: doc, exit_code })
}

fn run_fit(spec: &SpecConfig, data_path: &Path, budget: usize) -> Result<Output, CliError> {
    let base = spec.base.build().map_err(CliError::Spec)?;
    let mut data = load_data(data_path)?;
    data.sort_by(f64::total_cmp);
    let req = FitRequest::new(data, base, spec.perturbation.level()).map_err(CliError::Spec)?;
    let result = fit(&req, budget).map_err(CliError::Computation)?;
    let doc = FitDocument {
        spec: SpecConfig::from_parts(&base, &result.spec).map_err(CliError::Computation)?,
        parameters: result
            .parameters
            .iter()
            .map(|&(alpha, beta)| BetaParameters { alpha, beta })
            .collect(),
        ks_before: result.ks_before,
        ks_after: result.ks_after,
        evaluations: result.evaluations,
        converged: result.converged,
    };
    Ok(Output {
        document: to_json(&doc),
        exit_code: 0,
    })
}

/// Writes `doc` to `path`, or to standard output when `path` is `None`.
pub fn emit(doc: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, doc).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(doc.as_bytes()).map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("wavpert").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let c: RunConfig = cli(&["eval", "--spec", "s.json"]).try_into().unwrap();
        assert_eq!(c.grid_points, DEFAULT_GRID);
        assert_eq!(c.k_max, DEFAULT_KMAX);
        assert_eq!(c.seed, 0);
        assert_eq!(c.command, Command::Eval);
    }

    #[test]
    fn required_fields() {
        let e = RunConfig::try_from(cli(&["eval"])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(RunConfig::try_from(cli(&["sample", "--spec", "s"])).is_err());
        assert!(RunConfig::try_from(cli(&["fit", "--spec", "s"])).is_err());
        assert!(RunConfig::try_from(cli(&["eval", "--spec", "s", "--grid", "1"])).is_err());
        assert!(RunConfig::try_from(cli(&["validate", "--spec", "s", "--grid", "50"])).is_err());
        let c: RunConfig = cli(&["sample", "--spec", "s", "--n", "3", "--seed", "7"]).try_into().unwrap();
        assert_eq!(c.command, Command::Sample { n: 3 });
        assert_eq!(c.seed, 7);
    }
}
