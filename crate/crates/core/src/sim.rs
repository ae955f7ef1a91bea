//! Synthetic trials, coverage studies and a Bayesian comparator.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{analyze, AnalysisConfig, AnalysisResult, BoundsSample, Interval};
use crate::error::{Error, Result};
use crate::lp::{Observed, StratumSolver};
use crate::model::{
    estimand, summarize, AssumptionLabel, AssumptionSet, CountsTable, EstimandKind,
    ObservableDist, TrialRecord,
};
use crate::oracle::observed_bounds;
use crate::sampler::{derive_seed, dirichlet_draw, RngStream};

const TAG_SIMULATE: u64 = 0x5349_4d55;
const TAG_DATA: u64 = 0x4441_5441;
const TAG_ANALYSIS: u64 = 0x414e_414c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    /// Binary unmeasured confounder `U` shared by treatment and outcome.
    Scenario1,
    /// No unmeasured confounding.
    Scenario2,
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "scenario1" | "scenario-1" | "scenario_1" => Ok(ScenarioId::Scenario1),
            "2" | "scenario2" | "scenario-2" | "scenario_2" => Ok(ScenarioId::Scenario2),
            other => Err(Error::InvalidValue(format!("unknown scenario `{other}`"))),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ScenarioId::Scenario1 => "1",
            ScenarioId::Scenario2 => "2",
        })
    }
}

/// Structural model `U, Z ~ Bernoulli(1/2)` independent, then `A | U, Z`, then `Y | U, A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// `P(A=1 | U, Z) = a_u U + a_z Z + a_0`.
    pub a_u: f64,
    pub a_z: f64,
    pub a_0: f64,
    /// `P(Y=1 | U, A) = y_u U + y_a A + y_0`.
    pub y_u: f64,
    pub y_a: f64,
    pub y_0: f64,
}

impl ScenarioSpec {
    pub fn new(id: ScenarioId) -> Self {
        match id {
            ScenarioId::Scenario1 => Self {
                id,
                a_u: 1.0 / 16.0,
                a_z: 2.0 / 5.0,
                a_0: 1.0 / 2.0,
                y_u: 1.0 / 16.0,
                y_a: 1.0 / 5.0,
                y_0: 1.0 / 15.0,
            },
            ScenarioId::Scenario2 => Self {
                id,
                a_u: 0.0,
                a_z: 1.0 / 5.0,
                a_0: 1.0 / 5.0,
                y_u: 0.0,
                y_a: 1.0 / 5.0,
                y_0: 1.0 / 15.0,
            },
        }
    }

    pub fn p_treated(&self, u: u8, z: u8) -> f64 {
        self.a_u * f64::from(u) + self.a_z * f64::from(z) + self.a_0
    }

    pub fn p_outcome(&self, u: u8, a: u8) -> f64 {
        self.y_u * f64::from(u) + self.y_a * f64::from(a) + self.y_0
    }

    /// Average effect of `A` on `Y` implied by the structural equations.
    pub fn true_ate(&self) -> f64 {
        (0..2u8)
            .map(|u| 0.5 * (self.p_outcome(u, 1) - self.p_outcome(u, 0)))
            .sum()
    }
}

/// `n` independent units by ancestral sampling.
pub fn simulate(scenario: &ScenarioSpec, n: usize, seed: u64) -> Vec<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_SIMULATE, 0));
    (0..n)
        .map(|_| {
            let u = u8::from(rng.random_bool(0.5));
            let z = u8::from(rng.random_bool(0.5));
            let a = u8::from(rng.random_bool(scenario.p_treated(u, z)));
            let y = u8::from(rng.random_bool(scenario.p_outcome(u, a)));
            TrialRecord { z, a, y }
        })
        .collect()
}

/// Observable distribution implied by the scenario, marginalizing over `U`.
pub fn true_q(scenario: &ScenarioSpec) -> ObservableDist {
    let mut q = [[0.0; 4]; 2];
    for (z, arm) in q.iter_mut().enumerate() {
        for u in 0..2u8 {
            let pa = scenario.p_treated(u, z as u8);
            for a in 0..2u8 {
                let a_prob = if a == 1 { pa } else { 1.0 - pa };
                let py = scenario.p_outcome(u, a);
                arm[crate::model::cell(a, 0)] += 0.5 * a_prob * (1.0 - py);
                arm[crate::model::cell(a, 1)] += 0.5 * a_prob * py;
            }
        }
    }
    ObservableDist::new(q).expect("scenario probabilities form two distributions")
}

/// Sharp bounds at the scenario's true observable distribution.
pub fn true_bounds(
    scenario: &ScenarioSpec,
    kind: EstimandKind,
    assumptions: AssumptionLabel,
) -> Result<(f64, f64)> {
    observed_bounds(&true_q(scenario), &estimand(kind), &AssumptionSet::new(assumptions))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fiducial,
    Bayes1,
    Bayes2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fiducial => "fiducial",
            Method::Bayes1 => "bayes1",
            Method::Bayes2 => "bayes2",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fiducial" => Ok(Method::Fiducial),
            "bayes1" => Ok(Method::Bayes1),
            "bayes2" => Ok(Method::Bayes2),
            other => Err(Error::InvalidValue(format!(
                "unknown method `{other}` (expected fiducial, bayes1 or bayes2)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// Dirichlet prior over the eight cells in `(z, a, y)` lexicographic order.
/// Both default priors put no mass on treated units in the control arm.
pub const PRIOR_BAYES1: [f64; 8] = [1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
pub const PRIOR_BAYES2: [f64; 8] = [0.5, 0.5, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];

/// Posterior draws of `q`, rejecting those outside the feasibility set and
/// bounding the rest with the equality-constrained program.
pub fn bayesian_comparator(
    counts: &CountsTable,
    prior: &[f64; 8],
    n_draws: usize,
    seed: u64,
    kind: EstimandKind,
    assumptions: AssumptionLabel,
    level: f64,
) -> Result<AnalysisResult> {
    counts.require_both_arms()?;
    if n_draws == 0 {
        return Err(Error::InvalidValue("n_draws must be at least 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidValue(format!(
            "level {level} must lie strictly between 0 and 1"
        )));
    }
    if prior.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
        return Err(Error::InvalidValue("prior entries must be finite and nonnegative".into()));
    }
    let est = estimand(kind);
    let set = AssumptionSet::new(assumptions);
    let kept: Vec<Option<BoundsSample>> = (0..n_draws)
        .into_par_iter()
        .map_init(StratumSolver::new, |solver, j| {
            let mut rng = RngStream::new(seed, j as u64).generator();
            let mut q = [[0.0; 4]; 2];
            for (z, arm) in q.iter_mut().enumerate() {
                let alpha: Vec<f64> = (0..4)
                    .map(|k| prior[4 * z + k] + counts.arm(z as u8)[k] as f64)
                    .collect();
                arm.copy_from_slice(&dirichlet_draw(&alpha, &mut rng)?);
            }
            let q = ObservableDist::from_raw(q);
            if !solver.feasible(Observed::Exact(&q), &set)? {
                return Ok(None);
            }
            let (l, u, degenerate) = solver.interval(Observed::Exact(&q), &est, &set)?;
            Ok(Some(BoundsSample { l, u, degenerate }))
        })
        .collect::<Result<_>>()?;
    let samples: Vec<BoundsSample> = kept.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::AllDrawsInfeasible);
    }
    let config = AnalysisConfig {
        estimand: kind,
        assumptions,
        n_mcmc: n_draws,
        seed,
        level,
        max_attempts: None,
    };
    AnalysisResult::summarize(samples, n_draws as u64, &config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Lower,
    Upper,
}

impl fmt::Display for BoundSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            BoundSide::Lower => "lower",
            BoundSide::Upper => "upper",
        })
    }
}

/// Error rates (percent) and mean width of intervals for one true bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub n: usize,
    pub side: BoundSide,
    pub method: Method,
    pub target: f64,
    /// Percent of replications whose interval lies entirely above the target.
    pub lr: f64,
    /// Percent of replications whose interval lies entirely below the target.
    pub ur: f64,
    pub wd: f64,
    pub used: usize,
    /// Replications excluded because sampling stalled or an arm was empty.
    pub stalled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub scenario: ScenarioId,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub n_mcmc: usize,
    pub level: f64,
    pub seed: u64,
    pub method: Method,
    pub estimand: EstimandKind,
    pub assumptions: AssumptionLabel,
    /// Overrides the method's default prior for the Bayesian methods.
    pub prior: Option<[f64; 8]>,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioId::Scenario1,
            n_list: vec![25, 50, 100],
            replications: 200,
            n_mcmc: 1000,
            level: 0.95,
            seed: 0,
            method: Method::Fiducial,
            estimand: EstimandKind::Ate,
            assumptions: AssumptionLabel::CoreIv,
            prior: None,
        }
    }
}

fn parse_list<T: FromStr>(value: &str, what: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("{what}: cannot parse `{s}`")))
        })
        .collect()
}

fn parse_prior(value: &str) -> Result<[f64; 8]> {
    let v: Vec<f64> = parse_list(value, "prior")?;
    v.try_into()
        .map_err(|v: Vec<f64>| Error::Config(format!("prior needs 8 entries, found {}", v.len())))
}

impl CoverageConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: Error| Error::Config(format!("{key}: {e}"));
        let num = |what: &str| Error::Config(format!("{what}: cannot parse `{value}`"));
        match key.trim().replace('-', "_").as_str() {
            "scenario" => self.scenario = value.parse().map_err(bad)?,
            "n_list" | "n" => self.n_list = parse_list(value, "n_list")?,
            "replications" => self.replications = value.trim().parse().map_err(|_| num(key))?,
            "n_mcmc" => self.n_mcmc = value.trim().parse().map_err(|_| num(key))?,
            "level" => self.level = value.trim().parse().map_err(|_| num(key))?,
            "seed" => self.seed = value.trim().parse().map_err(|_| num(key))?,
            "method" => self.method = value.parse().map_err(bad)?,
            "estimand" => self.estimand = value.parse().map_err(bad)?,
            "assumptions" => self.assumptions = value.parse().map_err(bad)?,
            "prior" => self.prior = Some(parse_prior(value)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(k, v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::Config("n_list must hold positive sample sizes".into()));
        }
        if self.n_mcmc == 0 {
            return Err(Error::Config("n_mcmc must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level <= 1.0) {
            return Err(Error::Config(format!("level {} outside (0, 1]", self.level)));
        }
        Ok(())
    }

    fn prior(&self) -> [f64; 8] {
        self.prior.unwrap_or(match self.method {
            Method::Bayes2 => PRIOR_BAYES2,
            _ => PRIOR_BAYES1,
        })
    }
}

/// Interval pair for one analyzed dataset, `None` if the replication is excluded.
fn replicate(cfg: &CoverageConfig, n: usize, r: usize) -> Result<Option<(Interval, Interval)>> {
    if cfg.level >= 1.0 {
        // The full-confidence interval is the estimand's whole range.
        let full = Interval { low: -1.0, high: 1.0 };
        return Ok(Some((full, full)));
    }
    let spec = ScenarioSpec::new(cfg.scenario);
    let records = simulate(&spec, n, derive_seed(cfg.seed, TAG_DATA ^ n as u64, r as u64));
    let counts = match summarize(&records) {
        Ok(c) => c,
        Err(Error::MissingArm { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let seed = derive_seed(cfg.seed, TAG_ANALYSIS ^ n as u64, r as u64);
    let result = match cfg.method {
        Method::Fiducial => analyze(
            &counts,
            &AnalysisConfig {
                estimand: cfg.estimand,
                assumptions: cfg.assumptions,
                n_mcmc: cfg.n_mcmc,
                seed,
                level: cfg.level,
                max_attempts: None,
            },
        ),
        Method::Bayes1 | Method::Bayes2 => bayesian_comparator(
            &counts,
            &cfg.prior(),
            cfg.n_mcmc,
            seed,
            cfg.estimand,
            cfg.assumptions,
            cfg.level,
        ),
    };
    match result {
        Ok(res) => Ok(Some((res.lower_ci, res.upper_ci))),
        Err(Error::AcceptanceStalled { .. } | Error::AllDrawsInfeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Simulate, analyze and score `replications` datasets for every `n`.
///
/// Datasets depend only on `(seed, n, replication)`, so different methods
/// run with the same seed see the same data.
pub fn coverage_experiment(cfg: &CoverageConfig) -> Result<Vec<CoverageRow>> {
    cfg.validate()?;
    let (true_l, true_u) =
        true_bounds(&ScenarioSpec::new(cfg.scenario), cfg.estimand, cfg.assumptions)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let outcomes: Vec<Option<(Interval, Interval)>> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| replicate(cfg, n, r))
            .collect::<Result<_>>()?;
        let used: Vec<(Interval, Interval)> = outcomes.iter().flatten().copied().collect();
        let stalled = outcomes.len() - used.len();
        for side in [BoundSide::Lower, BoundSide::Upper] {
            let (target, cis): (f64, Vec<Interval>) = match side {
                BoundSide::Lower => (true_l, used.iter().map(|p| p.0).collect()),
                BoundSide::Upper => (true_u, used.iter().map(|p| p.1).collect()),
            };
            let m = cis.len() as f64;
            let pct = |k: usize| 100.0 * k as f64 / m;
            rows.push(CoverageRow {
                n,
                side,
                method: cfg.method,
                target,
                lr: pct(cis.iter().filter(|c| target < c.low).count()),
                ur: pct(cis.iter().filter(|c| target > c.high).count()),
                wd: cis.iter().map(Interval::width).sum::<f64>() / m,
                used: cis.len(),
                stalled,
            });
        }
    }
    Ok(rows)
}

/// Aligned plain-text rendering.
pub fn format_coverage_table(rows: &[CoverageRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6}  {:<5}  {:<8}  {:>9}  {:>6}  {:>6}  {:>7}  {:>5}  {:>7}",
        "n", "bound", "method", "target", "LR", "UR", "WD", "used", "stalled"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6}  {:<5}  {:<8}  {:>9.4}  {:>6.1}  {:>6.1}  {:>7.3}  {:>5}  {:>7}",
            r.n, r.side, r.method, r.target, r.lr, r.ur, r.wd, r.used, r.stalled
        );
    }
    out
}

pub fn write_coverage_csv<W: Write>(rows: &[CoverageRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
