//! Acceptance sampling, per-draw bounds and interval summaries.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Observed, StratumSolver};
use crate::model::{AssumptionLabel, AssumptionSet, CountsTable, Estimand, EstimandKind, FiducialDraw};
use crate::sampler::{propose, RngStream};

/// Attempts allowed per requested draw when no explicit cap is given.
pub const DEFAULT_ATTEMPTS_PER_DRAW: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSample {
    pub l: f64,
    pub u: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedDraws {
    pub draws: Vec<FiducialDraw>,
    pub attempts: u64,
}

impl AcceptedDraws {
    pub fn acceptance_rate(&self) -> f64 {
        self.draws.len() as f64 / self.attempts as f64
    }
}

/// Outcome of one iteration run with an attempt budget.
enum Iteration {
    Accepted(FiducialDraw, u64),
    Exhausted,
}

fn run_iteration(
    counts: &CountsTable,
    assumptions: &AssumptionSet,
    stream: RngStream,
    budget: u64,
    solver: &mut StratumSolver,
) -> Result<Iteration> {
    let mut rng = stream.generator();
    for k in 1..=budget {
        let draw = propose(counts, &mut rng)?;
        if solver.feasible(Observed::Draw(&draw), assumptions)? {
            return Ok(Iteration::Accepted(draw, k));
        }
    }
    Ok(Iteration::Exhausted)
}

/// Propose and test until `n_mcmc` draws are accepted.
///
/// Iteration `j` draws from stream `j` of `seed` until it accepts. Budgets
/// are reconciled in index order, so the result, including where a stall
/// happens, does not depend on how iterations are spread over threads.
pub fn run_acceptance_sampler(
    counts: &CountsTable,
    assumptions: &AssumptionSet,
    n_mcmc: usize,
    seed: u64,
    max_attempts: Option<u64>,
) -> Result<AcceptedDraws> {
    counts.require_both_arms()?;
    if n_mcmc == 0 {
        return Err(Error::InvalidValue("n_mcmc must be at least 1".into()));
    }
    let max_attempts = max_attempts.unwrap_or(DEFAULT_ATTEMPTS_PER_DRAW * n_mcmc as u64);
    if max_attempts < n_mcmc as u64 {
        return Err(Error::InvalidValue(format!(
            "max_attempts ({max_attempts}) is below n_mcmc ({n_mcmc})"
        )));
    }
    // Every iteration of a chunk may spend the whole remaining budget when
    // data are infeasible, so a single thread works strictly one at a time.
    let threads = rayon::current_num_threads().max(1);
    let chunk = if threads == 1 { 1 } else { 4 * threads };
    let mut draws = Vec::with_capacity(n_mcmc);
    let mut attempts = 0u64;
    let mut start = 0usize;
    while start < n_mcmc {
        let end = (start + chunk).min(n_mcmc);
        let budget = max_attempts - attempts;
        let outcomes: Vec<Iteration> = (start..end)
            .into_par_iter()
            .map_init(StratumSolver::new, |solver, j| {
                run_iteration(counts, assumptions, RngStream::new(seed, j as u64), budget, solver)
            })
            .collect::<Result<_>>()?;
        for outcome in outcomes {
            let remaining = max_attempts - attempts;
            match outcome {
                Iteration::Accepted(draw, k) if k <= remaining => {
                    attempts += k;
                    draws.push(draw);
                }
                _ => {
                    return Err(Error::AcceptanceStalled {
                        accepted: draws.len(),
                        requested: n_mcmc,
                        attempts: max_attempts,
                    })
                }
            }
        }
        start = end;
    }
    Ok(AcceptedDraws { draws, attempts })
}

/// Fraction of `n_probe` independent proposals that pass the feasibility test.
pub fn probe_acceptance(
    counts: &CountsTable,
    assumptions: &AssumptionSet,
    n_probe: usize,
    seed: u64,
) -> Result<(usize, f64)> {
    counts.require_both_arms()?;
    if n_probe == 0 {
        return Err(Error::InvalidValue("n_probe must be at least 1".into()));
    }
    let flags: Vec<bool> = (0..n_probe)
        .into_par_iter()
        .map_init(StratumSolver::new, |solver, j| {
            let draw = propose(counts, &mut RngStream::new(seed, j as u64).generator())?;
            solver.feasible(Observed::Draw(&draw), assumptions)
        })
        .collect::<Result<_>>()?;
    let accepted = flags.iter().filter(|&&f| f).count();
    Ok((accepted, accepted as f64 / n_probe as f64))
}

/// Lower and upper bound of the estimand over each draw's polytope.
pub fn bounds_for_draws(
    draws: &[FiducialDraw],
    estimand: &Estimand,
    assumptions: &AssumptionSet,
) -> Result<Vec<BoundsSample>> {
    draws
        .par_iter()
        .map_init(StratumSolver::new, |solver, draw| {
            let (l, u, degenerate) = solver.interval(Observed::Draw(draw), estimand, assumptions)?;
            Ok(BoundsSample { l, u, degenerate })
        })
        .collect()
}

/// Position of the `p` quantile among `m` sorted values: the `ceil(p m)`-th
/// order statistic, clamped to `1..=m`, returned 0-based.
fn order_index(p: f64, m: usize) -> usize {
    let x = p * m as f64;
    // Treat products within rounding of an integer as that integer, so that
    // e.g. 0.05 * 100 selects the 5th value rather than the 6th.
    let k = if (x - x.round()).abs() <= 1e-9 * (1.0 + x.abs()) {
        x.round()
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, m) - 1
}

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidValue("NaN in samples".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidValue(format!("quantile level {p} outside [0, 1]")));
    }
    let v = sorted(values)?;
    Ok(v[order_index(p, v.len())])
}

pub fn quantile_ci(values: &[f64], prob_low: f64, prob_high: f64) -> Result<Interval> {
    if !(0.0 <= prob_low && prob_low < prob_high && prob_high <= 1.0) {
        return Err(Error::InvalidValue(format!(
            "quantile levels ({prob_low}, {prob_high}) must satisfy 0 <= low < high <= 1"
        )));
    }
    let v = sorted(values)?;
    Ok(Interval {
        low: v[order_index(prob_low, v.len())],
        high: v[order_index(prob_high, v.len())],
    })
}

pub fn median(values: &[f64]) -> Result<f64> {
    let v = sorted(values)?;
    let m = v.len();
    Ok(if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub estimand: EstimandKind,
    pub assumptions: AssumptionLabel,
    pub n_mcmc: usize,
    pub seed: u64,
    pub level: f64,
    pub max_attempts: Option<u64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            estimand: EstimandKind::Ate,
            assumptions: AssumptionLabel::CoreIv,
            n_mcmc: 1000,
            seed: 0,
            level: 0.95,
            max_attempts: None,
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidValue(format!(
                "level {} must lie strictly between 0 and 1",
                self.level
            )));
        }
        if self.n_mcmc == 0 {
            return Err(Error::InvalidValue("n_mcmc must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub samples: Vec<BoundsSample>,
    pub accepted: usize,
    pub attempts: u64,
    pub acceptance_rate: f64,
    pub lower_point: f64,
    pub upper_point: f64,
    pub lower_ci: Interval,
    pub upper_ci: Interval,
    pub degenerate_fraction: f64,
    pub estimand: EstimandKind,
    pub assumptions: AssumptionLabel,
    pub seed: u64,
    pub level: f64,
}

impl AnalysisResult {
    /// Summaries of bound samples at two-sided `level`.
    pub fn summarize(
        samples: Vec<BoundsSample>,
        attempts: u64,
        config: &AnalysisConfig,
    ) -> Result<Self> {
        let l: Vec<f64> = samples.iter().map(|s| s.l).collect();
        let u: Vec<f64> = samples.iter().map(|s| s.u).collect();
        let alpha = 1.0 - config.level;
        let (lo, hi) = (alpha / 2.0, 1.0 - alpha / 2.0);
        let accepted = samples.len();
        let degenerate = samples.iter().filter(|s| s.degenerate).count();
        Ok(Self {
            lower_point: median(&l)?,
            upper_point: median(&u)?,
            lower_ci: quantile_ci(&l, lo, hi)?,
            upper_ci: quantile_ci(&u, lo, hi)?,
            degenerate_fraction: degenerate as f64 / accepted as f64,
            accepted,
            attempts,
            acceptance_rate: accepted as f64 / attempts as f64,
            samples,
            estimand: config.estimand,
            assumptions: config.assumptions,
            seed: config.seed,
            level: config.level,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Raw bound samples as CSV with columns `j,l,u,degenerate`.
    pub fn write_samples_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["j", "l", "u", "degenerate"]).map_err(io)?;
        for (j, s) in self.samples.iter().enumerate() {
            w.write_record([
                j.to_string(),
                format!("{:?}", s.l),
                format!("{:?}", s.u),
                s.degenerate.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Accept draws, bound each one, and summarize.
pub fn analyze(counts: &CountsTable, config: &AnalysisConfig) -> Result<AnalysisResult> {
    config.validate()?;
    let assumptions = AssumptionSet::new(config.assumptions);
    let estimand = crate::model::estimand(config.estimand);
    let accepted = run_acceptance_sampler(
        counts,
        &assumptions,
        config.n_mcmc,
        config.seed,
        config.max_attempts,
    )?;
    let samples = bounds_for_draws(&accepted.draws, &estimand, &assumptions)?;
    AnalysisResult::summarize(samples, accepted.attempts, config)
}
