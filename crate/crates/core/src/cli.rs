//! Command-line pipelines.
//!
//! Each subcommand prints one JSON document on standard output. Exit codes:
//! 0 on success, 1 when a hypothesis violation, a failed certified check or
//! non-convergence is found, 2 on I/O, validation or usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::generate::{generate_finite_instance, GenParams, GenerateError};
use crate::hypothesis::{assess, find_epsilon_chain, Assessment, HypothesisError, HypothesisReport, Mode, Verdict};
use crate::instance::{parse_instance, Instance, InstanceError};
use crate::oracle::{oracle_report, OracleError, OracleReport};
use crate::solver::{
    collapse_check, picard_solve, verify_lemma_decay, CollapseMode, CollapseVerdict, LemmaCertificate, LemmaParams,
    LemmaReport, SolveConfig, SolveResult, SolveStatus, SolverError,
};
use crate::space::{OrderedMetricSpace, Point, ProductPair};
use crate::trace::{emit_trace, point_value, TraceFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDING: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Instance {
        path: PathBuf,
        #[source]
        source: InstanceError,
    },
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "coupled-fixpoint", version, about = "Coupled fixed points of mixed monotone maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Instance file.
    file: Option<PathBuf>,
    /// Run on every `*.json` file in a directory.
    #[arg(long, value_name = "DIR")]
    all: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report every hypothesis.
    Check {
        #[command(flatten)]
        target: Target,
    },
    /// Run the Picard iteration with bound and collapse checks.
    Solve {
        #[command(flatten)]
        target: Target,
        /// Write the per-iterate trace here.
        #[arg(long, value_name = "PATH")]
        trace_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "jsonl")]
        trace_format: TraceArg,
    },
    /// Minimal ε-chain between two points.
    Chain {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long)]
        eps: f64,
    },
    /// Brute-force ground truth on a finite instance.
    Oracle {
        #[command(flatten)]
        target: Target,
    },
    /// Track the decay bound from the seeds and their first images.
    VerifyLemma {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
    },
    /// Generate a random finite instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        size: usize,
    },
}

/// Hypothesis reports for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: Option<String>,
    pub epsilon: f64,
    pub reports: Vec<HypothesisReport>,
    pub contraction_vacuous: bool,
    /// `λ` usable in bounds, if any.
    pub lambda: Option<f64>,
    pub chain_n: Option<usize>,
    pub existence_certified: bool,
    pub uniqueness_certified: bool,
    pub order_limit_closure: bool,
}

impl CheckSummary {
    pub fn any_violated(&self) -> bool {
        self.reports.iter().any(HypothesisReport::is_violated)
    }
}

pub fn check_instance(inst: &Instance) -> Result<(CheckSummary, Assessment), CliError> {
    let a = assess(&inst.map, &inst.x0, &inst.y0, inst.epsilon, &inst.plan)?;
    let summary = CheckSummary {
        name: inst.name.clone(),
        epsilon: inst.epsilon,
        reports: a.reports(),
        contraction_vacuous: a.contraction_vacuous,
        lambda: a.lambda(inst.lambda_claimed),
        chain_n: a.chain_n(),
        existence_certified: a.existence_certified(inst.lambda_claimed),
        uniqueness_certified: a.uniqueness_certified(inst.lambda_claimed),
        order_limit_closure: inst.order_limit_closure,
    };
    Ok((summary, a))
}

/// `λ` for the solver: the certified value when there is one, otherwise the
/// claimed value, the sampled estimate, or 1/2, in that order. Bounds built
/// from the fallbacks are advisory.
fn solver_lambda(inst: &Instance, a: &Assessment) -> (f64, bool) {
    if let Some(l) = a.lambda(inst.lambda_claimed) {
        return (l, true);
    }
    let fallback = inst
        .lambda_claimed
        .or(a.contraction.lambda_hat.filter(|l| *l > 0.0 && *l < 1.0))
        .unwrap_or(0.5);
    (fallback, false)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundSummary {
    pub lambda: f64,
    pub n: usize,
    pub epsilon: f64,
    /// The bound rests on established hypotheses; otherwise it is advisory.
    pub certified: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseSummary {
    pub gap: f64,
    pub tolerance: f64,
    pub pair_bounds: CollapseVerdict,
    pub comparable_seeds: CollapseVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub name: Option<String>,
    pub status: SolveStatus,
    pub fixed_point: [Value; 2],
    pub residual: f64,
    pub residual_tolerance: f64,
    pub iterations_used: usize,
    pub existence_certified: bool,
    pub monotone_trajectories: bool,
    pub bound: BoundSummary,
    pub collapse: CollapseSummary,
    pub violated: Vec<String>,
}

impl SolveSummary {
    /// A failure the solve itself establishes: no convergence, or a certified
    /// bound or collapse check that does not hold.
    pub fn failed(&self) -> bool {
        self.status != SolveStatus::Converged
            || (self.bound.certified && !self.bound.holds)
            || (self.existence_certified && !self.monotone_trajectories)
            || matches!(self.collapse.pair_bounds, CollapseVerdict::Fails { .. })
            || matches!(self.collapse.comparable_seeds, CollapseVerdict::Fails { .. })
    }
}

pub fn solve_instance(inst: &Instance) -> Result<(SolveSummary, SolveResult), CliError> {
    let (check, a) = check_instance(inst)?;
    let (lambda, lambda_certified) = solver_lambda(inst, &a);
    let n = a.chain_n().unwrap_or(1);
    let cfg = SolveConfig {
        max_iterations: inst.max_iterations,
        residual_tolerance: inst.tolerance,
        lambda,
        epsilon: inst.epsilon,
        chain_n: n,
        record_trace: true,
    };
    let result = picard_solve(&inst.map, &inst.x0, &inst.y0, &cfg)?;
    let space = inst.space();
    let pair_bounds_certified = check.existence_certified && a.pair_bounds.verdict == Verdict::Holds;
    let summary = SolveSummary {
        name: inst.name.clone(),
        status: result.status,
        fixed_point: [point_value(&result.fixed_pair.first), point_value(&result.fixed_pair.second)],
        residual: result.residual,
        residual_tolerance: result.residual_tolerance,
        iterations_used: result.iterations_used,
        existence_certified: check.existence_certified,
        monotone_trajectories: result.monotone_trajectories(space).map_err(SolverError::from)?,
        bound: BoundSummary {
            lambda,
            n,
            epsilon: inst.epsilon,
            certified: lambda_certified && check.existence_certified,
            holds: result.bound_holds,
        },
        collapse: CollapseSummary {
            gap: result.collapse.gap,
            tolerance: cfg.collapse_tolerance(),
            pair_bounds: collapse_check(
                &result,
                CollapseMode::PairBounds {
                    certified: pair_bounds_certified,
                },
                space,
            )?,
            comparable_seeds: collapse_check(
                &result,
                CollapseMode::ComparableSeeds {
                    existence_certified: check.existence_certified,
                },
                space,
            )?,
        },
        violated: check
            .reports
            .iter()
            .filter(|r| r.is_violated())
            .map(|r| r.hypothesis.to_string())
            .collect(),
    };
    Ok((summary, result))
}

/// The decay lemma from `(a, b) = (x0, F(x0, y0))` and
/// `(a*, b*) = (y0, F(y0, x0))`; these are ordered exactly when the seed
/// condition holds.
pub fn lemma_instance(inst: &Instance, horizon: usize) -> Result<LemmaReport, CliError> {
    let (_, a) = check_instance(inst)?;
    let (lambda, _) = solver_lambda(inst, &a);
    let (x1, y1) = inst.map.step(&inst.x0, &inst.y0).map_err(SolverError::from)?;
    let certificate = LemmaCertificate::from_assessment(&a, lambda);
    let mut report = verify_lemma_decay(
        &inst.map,
        &ProductPair::new(inst.x0.clone(), x1),
        &ProductPair::new(inst.y0.clone(), y1),
        &LemmaParams {
            lambda,
            epsilon: inst.epsilon,
            horizon,
        },
        &inst.plan,
        certificate,
    )?;
    if a.seed_condition.verdict != Verdict::Holds {
        report.uncertified.push("seed_condition".into());
    }
    Ok(report)
}

fn lemma_failed(r: &LemmaReport) -> bool {
    r.certified() && !r.all_below_bound
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&bytes).map_err(|source| CliError::Instance {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a point argument: an index or label on finite spaces, a number or
/// comma-separated coordinates on boxes.
fn parse_point_arg(space: &OrderedMetricSpace, text: &str) -> Result<Point, CliError> {
    let bad = || CliError::Usage(format!("cannot read `{text}` as a point of this space"));
    let point = match space {
        OrderedMetricSpace::Finite(s) => match text.parse::<usize>() {
            Ok(i) => Point::Index(i),
            Err(_) => Point::Index(s.labels().iter().position(|l| l == text).ok_or_else(bad)?),
        },
        OrderedMetricSpace::Box(_) => Point::Coords(
            text.split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?,
        ),
    };
    space.validate(&point).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(point)
}

fn json_out(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summaries always serialize");
    s.push('\n');
    s
}

type Outcome = Result<(Value, i32), CliError>;

fn run_check(path: &Path) -> Outcome {
    let inst = load_instance(path)?;
    let (summary, _) = check_instance(&inst)?;
    let code = if summary.any_violated() { EXIT_FINDING } else { EXIT_OK };
    Ok((serde_json::to_value(summary).expect("serializable"), code))
}

fn run_solve(path: &Path, trace: Option<(&Path, TraceFormat)>) -> Outcome {
    let inst = load_instance(path)?;
    let (summary, result) = solve_instance(&inst)?;
    if let Some((out, format)) = trace {
        fs::write(out, emit_trace(&result, format)).map_err(|source| CliError::Io {
            path: out.to_path_buf(),
            source,
        })?;
    }
    let code = if summary.failed() { EXIT_FINDING } else { EXIT_OK };
    Ok((serde_json::to_value(summary).expect("serializable"), code))
}

fn run_oracle(path: &Path) -> Outcome {
    let inst = load_instance(path)?;
    let report: OracleReport = oracle_report(&inst.map, inst.epsilon)?;
    Ok((serde_json::to_value(report).expect("serializable"), EXIT_OK))
}

fn run_lemma(path: &Path, horizon: usize) -> Outcome {
    let inst = load_instance(path)?;
    let report = lemma_instance(&inst, horizon)?;
    let code = if lemma_failed(&report) { EXIT_FINDING } else { EXIT_OK };
    Ok((serde_json::to_value(report).expect("serializable"), code))
}

fn run_chain(path: &Path, from: &str, to: &str, eps: f64) -> Outcome {
    let inst = load_instance(path)?;
    let space = inst.space();
    let a = parse_point_arg(space, from)?;
    let b = parse_point_arg(space, to)?;
    let candidates = inst.plan.sample(space)?.points;
    let chain = find_epsilon_chain(space, &a, &b, eps, &candidates)?;
    let value = json!({
        "from": point_value(&a),
        "to": point_value(&b),
        "epsilon": eps,
        "n": chain.as_ref().map(|c| c.n()),
        "points": chain.as_ref().map(|c| c.points.iter().map(point_value).collect::<Vec<_>>()),
        "exhaustive": inst.plan.sample(space)?.mode == Mode::Exhaustive,
    });
    Ok((value, if chain.is_some() { EXIT_OK } else { EXIT_FINDING }))
}

/// Runs `one` on a single file, or on every `*.json` file of a directory in
/// name order. Batch output is an array of per-file results and the exit
/// code is the largest per-file code.
fn run_target(target: &Target, out: &mut dyn Write, err: &mut dyn Write, one: impl Fn(&Path) -> Outcome) -> i32 {
    if let Some(file) = &target.file {
        return match one(file) {
            Ok((value, code)) => {
                let _ = out.write_all(json_out(&value).as_bytes());
                code
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        };
    }
    let dir = target.all.as_deref().expect("clap enforces one target");
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", dir.display());
            return EXIT_ERROR;
        }
    };
    files.sort();
    let mut worst = EXIT_OK;
    let mut rows = Vec::new();
    for f in &files {
        let (row, code) = match one(f) {
            Ok((value, code)) => (json!({ "file": f.display().to_string(), "exit": code, "result": value }), code),
            Err(e) => (
                json!({ "file": f.display().to_string(), "exit": EXIT_ERROR, "error": e.to_string() }),
                EXIT_ERROR,
            ),
        };
        worst = worst.max(code);
        rows.push(row);
    }
    let _ = out.write_all(json_out(&rows).as_bytes());
    worst
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_ERROR
                }
            };
        }
    };
    match cli.command {
        Command::Check { target } => run_target(&target, out, err, run_check),
        Command::Solve {
            target,
            trace_out,
            trace_format,
        } => {
            if trace_out.is_some() && target.all.is_some() {
                let _ = writeln!(err, "error: --trace-out takes a single instance file");
                return EXIT_ERROR;
            }
            let format = match trace_format {
                TraceArg::Jsonl => TraceFormat::Jsonl,
                TraceArg::Csv => TraceFormat::Csv,
            };
            run_target(&target, out, err, |p| {
                run_solve(p, trace_out.as_deref().map(|t| (t, format)))
            })
        }
        Command::Oracle { target } => run_target(&target, out, err, run_oracle),
        Command::VerifyLemma { target, horizon } => run_target(&target, out, err, |p| run_lemma(p, horizon)),
        Command::Chain { file, from, to, eps } => {
            let target = Target {
                file: Some(file),
                all: None,
            };
            run_target(&target, out, err, |p| run_chain(p, &from, &to, eps))
        }
        Command::Gen { seed, size } => match generate_finite_instance(seed, size, &GenParams::default()) {
            Ok(file) => {
                let _ = out.write_all(file.to_json().as_bytes());
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        },
    }
}
