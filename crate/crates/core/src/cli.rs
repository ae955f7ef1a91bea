//! Command-line front end.
//!
//! Every subcommand writes a single document to standard output (or
//! `--output`): JSON by default, an aligned table with `--table`, CSV for
//! `simulate`. Exit status is 0 on success, 1 for user errors, 2 when the
//! acceptance sampler stalls, and 3 for numerical failures.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::engine::{analyze, probe_acceptance, AnalysisConfig, AnalysisResult};
use crate::error::{Error, Result};
use crate::io::{load_counts, write_records_csv};
use crate::lp::{charnes_cooper_problem, stratum_problem, Direction, Observed};
use crate::model::{
    empirical_proportions, estimand, AssumptionLabel, AssumptionSet, CountsTable, EstimandKind,
};
use crate::oracle::{exact_counts_feasible, plug_in_bounds};
use crate::sampler::{propose, RngStream};
use crate::sim::{
    bayesian_comparator, coverage_experiment, format_coverage_table, simulate,
    write_coverage_csv, CoverageConfig, CoverageRow, Method, ScenarioId, ScenarioSpec,
    PRIOR_BAYES1, PRIOR_BAYES2,
};

#[derive(Debug, Parser)]
#[command(name = "fiducial-iv", version, about = "Fiducial bounds for binary instrumental-variable models")]
pub struct Cli {
    /// Base random seed.
    #[arg(long, global = true, env = "FIDUCIAL_IV_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Render a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pub table: bool,

    /// Write the document here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// CSV in `z,a,y` (records) or `z,a,y,count` (counts) layout.
    #[arg(long, short)]
    pub input: PathBuf,

    #[arg(long, default_value = "ate", value_parser = parse_estimand)]
    pub estimand: EstimandKind,

    #[arg(long, default_value = "core", value_parser = parse_assumptions)]
    pub assumptions: AssumptionLabel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliMethod {
    Fiducial,
    Bayes1,
    Bayes2,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Fiducial => Method::Fiducial,
            CliMethod::Bayes1 => Method::Bayes1,
            CliMethod::Bayes2 => Method::Bayes2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DumpSource {
    /// Equality constraints at the empirical proportions.
    PlugIn,
    /// Inequality constraints of one fiducial proposal drawn with `--seed`.
    Draw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DumpDirection {
    Min,
    Max,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fiducial sampling, per-draw bounds and confidence intervals.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        n_mcmc: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Cap on proposals (default 1000 per requested draw).
        #[arg(long)]
        max_attempts: Option<u64>,
        #[arg(long, value_enum, default_value = "fiducial")]
        method: CliMethod,
        /// Eight Dirichlet prior weights in (z,a,y) order, Bayesian methods only.
        #[arg(long)]
        prior: Option<String>,
        /// Also dump raw bound samples as CSV (`j,l,u,degenerate`).
        #[arg(long)]
        samples_csv: Option<PathBuf>,
        /// Leave the per-draw samples out of the JSON document.
        #[arg(long)]
        summary_only: bool,
    },
    /// Sharp bounds at the empirical proportions, without sampling.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Emit a synthetic record-level CSV.
    Simulate {
        #[arg(long, value_parser = parse_scenario)]
        scenario: ScenarioId,
        #[arg(long)]
        n: usize,
    },
    /// Error rates and widths of intervals over repeated synthetic trials.
    Coverage {
        /// `key = value` file; flags given on the command line take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_scenario)]
        scenario: Option<ScenarioId>,
        /// Comma-separated sample sizes.
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        n_mcmc: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<CliMethod>,
        #[arg(long)]
        prior: Option<String>,
        #[arg(long, value_parser = parse_estimand)]
        estimand: Option<EstimandKind>,
        #[arg(long, value_parser = parse_assumptions)]
        assumptions: Option<AssumptionLabel>,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Acceptance rate of raw proposals, a check on the IV assumptions.
    Diagnose {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value = "core", value_parser = parse_assumptions)]
        assumptions: AssumptionLabel,
        #[arg(long, default_value_t = 1000)]
        n_probe: usize,
    },
    /// Print the linear program behind one bound.
    LpDump {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "plug-in")]
        source: DumpSource,
        #[arg(long, value_enum, default_value = "min")]
        direction: DumpDirection,
    },
}

fn parse_estimand(s: &str) -> std::result::Result<EstimandKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_assumptions(s: &str) -> std::result::Result<AssumptionLabel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scenario(s: &str) -> std::result::Result<ScenarioId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_prior(s: &str) -> Result<[f64; 8]> {
    let mut cfg = CoverageConfig::default();
    cfg.set("prior", s)?;
    Ok(cfg.prior.expect("prior set"))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::AcceptanceStalled { .. } => 2,
        Error::NumericalFailure(_) => 3,
        _ => 1,
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct BoundsReport {
    estimand: EstimandKind,
    assumptions: AssumptionLabel,
    lower: f64,
    upper: f64,
    n: u64,
}

#[derive(Serialize)]
struct DiagnoseReport {
    assumptions: AssumptionLabel,
    n_probe: usize,
    accepted: usize,
    acceptance_rate: f64,
    plug_in_feasible: bool,
    interpretation: &'static str,
}

const INTERPRETATION: &str = "The acceptance rate estimates the fiducial probability that the \
observed distribution is compatible with the assumptions. As the sample grows it tends to 1 \
when the true distribution satisfies them strictly and to 0 when it violates them.";

#[derive(Serialize)]
struct DumpReport<'a> {
    names: &'a [String],
    lp: &'a str,
}

fn analysis_table(r: &AnalysisResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "estimand        {}", r.estimand);
    let _ = writeln!(s, "assumptions     {}", r.assumptions);
    let _ = writeln!(s, "accepted        {} of {} ({:.4})", r.accepted, r.attempts, r.acceptance_rate);
    let _ = writeln!(s, "lower bound     {:.4}  CI ({:.4}, {:.4})", r.lower_point, r.lower_ci.low, r.lower_ci.high);
    let _ = writeln!(s, "upper bound     {:.4}  CI ({:.4}, {:.4})", r.upper_point, r.upper_ci.low, r.upper_ci.high);
    let _ = writeln!(s, "level           {}", r.level);
    let _ = writeln!(s, "degenerate      {:.4}", r.degenerate_fraction);
    s
}

fn coverage_config(
    config: Option<&Path>,
    seed: u64,
    overrides: Vec<(&str, Option<String>)>,
) -> Result<CoverageConfig> {
    let mut cfg = match config {
        Some(p) => CoverageConfig::from_config_text(
            &fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )?,
        None => CoverageConfig::default(),
    };
    // A config-file seed stands unless one is given explicitly.
    if config.is_none() || seed != 0 {
        cfg.seed = seed;
    }
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli, err: &mut Vec<u8>) -> Result<String> {
    match &cli.command {
        Command::Analyze {
            model,
            n_mcmc,
            level,
            max_attempts,
            method,
            prior,
            samples_csv,
            summary_only,
        } => {
            let counts = load_counts(&model.input)?;
            let method = Method::from(*method);
            let mut result = match method {
                Method::Fiducial => analyze(
                    &counts,
                    &AnalysisConfig {
                        estimand: model.estimand,
                        assumptions: model.assumptions,
                        n_mcmc: *n_mcmc,
                        seed: cli.seed,
                        level: *level,
                        max_attempts: *max_attempts,
                    },
                ),
                Method::Bayes1 | Method::Bayes2 => {
                    let prior = match prior {
                        Some(p) => parse_prior(p)?,
                        None if method == Method::Bayes2 => PRIOR_BAYES2,
                        None => PRIOR_BAYES1,
                    };
                    bayesian_comparator(
                        &counts,
                        &prior,
                        *n_mcmc,
                        cli.seed,
                        model.estimand,
                        model.assumptions,
                        *level,
                    )
                }
            }
            .inspect_err(|e| {
                if let Error::AcceptanceStalled { accepted, requested, attempts } = e {
                    let _ = writeln!(
                        err,
                        "diagnostics: accepted {accepted} of {requested} requested draws in \
                         {attempts} attempts; the data look inconsistent with the {} assumptions",
                        model.assumptions
                    );
                }
            })?;
            if let Some(path) = samples_csv {
                let mut buf = Vec::new();
                result.write_samples_csv(&mut buf)?;
                write_file(path, &buf)?;
            }
            if *summary_only {
                result.samples.clear();
            }
            Ok(if cli.table { analysis_table(&result) } else { json(&result) })
        }
        Command::Bounds { model } => {
            let counts = load_counts(&model.input)?;
            let (lower, upper) = plug_in_bounds(
                &counts,
                &estimand(model.estimand),
                &AssumptionSet::new(model.assumptions),
            )?;
            let report = BoundsReport {
                estimand: model.estimand,
                assumptions: model.assumptions,
                lower,
                upper,
                n: counts.total(),
            };
            Ok(if cli.table {
                format!("{} under {}: [{lower:.4}, {upper:.4}]\n", model.estimand, model.assumptions)
            } else {
                json(&report)
            })
        }
        Command::Simulate { scenario, n } => {
            if *n == 0 {
                return Err(Error::InvalidValue("--n must be at least 1".into()));
            }
            let records = simulate(&ScenarioSpec::new(*scenario), *n, cli.seed);
            let mut buf = Vec::new();
            write_records_csv(&records, &mut buf)?;
            Ok(String::from_utf8(buf).expect("ASCII CSV"))
        }
        Command::Coverage {
            config,
            scenario,
            n_list,
            replications,
            n_mcmc,
            level,
            method,
            prior,
            estimand,
            assumptions,
            csv,
        } => {
            let cfg = coverage_config(
                config.as_deref(),
                cli.seed,
                vec![
                    ("scenario", scenario.map(|s| s.to_string())),
                    ("n_list", n_list.clone()),
                    ("replications", replications.map(|v| v.to_string())),
                    ("n_mcmc", n_mcmc.map(|v| v.to_string())),
                    ("level", level.map(|v| v.to_string())),
                    ("method", method.map(|m| Method::from(m).to_string())),
                    ("prior", prior.clone()),
                    ("estimand", estimand.map(|e| e.to_string())),
                    ("assumptions", assumptions.map(|a| a.to_string())),
                ],
            )?;
            let rows: Vec<CoverageRow> = coverage_experiment(&cfg)?;
            if let Some(path) = csv {
                let mut buf = Vec::new();
                write_coverage_csv(&rows, &mut buf)?;
                write_file(path, &buf)?;
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a CoverageConfig,
                rows: &'a [CoverageRow],
            }
            Ok(if cli.table {
                format_coverage_table(&rows)
            } else {
                json(&Doc { config: &cfg, rows: &rows })
            })
        }
        Command::Diagnose { input, assumptions, n_probe } => {
            let counts = load_counts(input)?;
            let set = AssumptionSet::new(*assumptions);
            let (accepted, acceptance_rate) = probe_acceptance(&counts, &set, *n_probe, cli.seed)?;
            let plug_in_feasible = exact_counts_feasible(&counts, &set)?;
            let report = DiagnoseReport {
                assumptions: *assumptions,
                n_probe: *n_probe,
                accepted,
                acceptance_rate,
                plug_in_feasible,
                interpretation: INTERPRETATION,
            };
            Ok(if cli.table {
                format!(
                    "acceptance rate {acceptance_rate:.4} ({accepted} of {n_probe})\n\
                     empirical proportions feasible: {plug_in_feasible}\n{INTERPRETATION}\n"
                )
            } else {
                json(&report)
            })
        }
        Command::LpDump { model, source, direction } => {
            let counts: CountsTable = load_counts(&model.input)?;
            let set = AssumptionSet::new(model.assumptions);
            let est = estimand(model.estimand);
            let dir = match direction {
                DumpDirection::Min => Direction::Min,
                DumpDirection::Max => Direction::Max,
            };
            let q = empirical_proportions(&counts)?;
            let draw = propose(&counts, &mut RngStream::new(cli.seed, 0).generator())?;
            let observed = match source {
                DumpSource::PlugIn => Observed::Exact(&q),
                DumpSource::Draw => Observed::Draw(&draw),
            };
            let lp = if est.is_linear() {
                stratum_problem(observed, &set, &est.numerator, dir.sense())
            } else {
                charnes_cooper_problem(observed, &set, &est, dir.sense(), None)
            };
            let names = lp.column_names();
            let text = lp.problem.to_text(Some(&names));
            Ok(if cli.table { text } else { json(&DumpReport { names: &names, lp: &text }) })
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 1;
        }
    };
    if cli.workers == Some(0) {
        let _ = writeln!(err, "error: --workers must be at least 1");
        return 1;
    }
    let mut diagnostics = Vec::new();
    let outcome = pool.install(|| execute(&cli, &mut diagnostics));
    let _ = err.write_all(&diagnostics);
    match outcome {
        Ok(doc) => {
            let written = match &cli.output {
                Some(path) => write_file(path, doc.as_bytes()),
                None => out.write_all(doc.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
