//! Dense two-phase primal simplex for the small, fixed-size programs that
//! describe the stratum polytope.
//!
//! The entering column is the lowest eligible index. Ratio-test ties prefer
//! the largest pivot element, falling back to the lowest basic index (Bland)
//! once a run of degenerate pivots suggests stalling. Either way a given
//! problem always follows the same pivot path. Every equality and `>=` row gets an
//! artificial column in phase 1; no row is ever split into a `<=`/`>=` pair.

mod stratum;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stratum::{
    bound_fractional, bound_linear, charnes_cooper_problem, feasible, stratum_problem, Bound,
    Direction, FractionalBound, Observed, StratumLp, StratumSolver, DEGENERATE_DENOMINATOR,
};

/// Phase-1 infeasibility above this is reported as INFEASIBLE.
pub const FEASIBILITY_TOL: f64 = 1e-8;
const OPTIMALITY_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 32;
const MAX_ITERATIONS: usize = 5_000;
/// Consecutive degenerate pivots before the ratio test switches to Bland ties.
const BLAND_AFTER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `optimize c.x` subject to `E x = e`, `G x >= g`, `x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ge_rows: Vec<Vec<f64>>,
    pub ge_rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        Self {
            sense,
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ge_rows: Vec::new(),
            ge_rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.ge_rows.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ge_rows.push(row);
        self.ge_rhs.push(rhs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.eq_rows.len() != self.eq_rhs.len() || self.ge_rows.len() != self.ge_rhs.len() {
            return Err(Error::InvalidValue("row and right-hand-side counts differ".into()));
        }
        let rows = self.eq_rows.iter().chain(&self.ge_rows);
        for (i, row) in rows.enumerate() {
            if row.len() != n {
                return Err(Error::InvalidValue(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.len()
                )));
            }
        }
        let all = self
            .objective
            .iter()
            .chain(self.eq_rows.iter().flatten())
            .chain(self.ge_rows.iter().flatten())
            .chain(&self.eq_rhs)
            .chain(&self.ge_rhs);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::InvalidValue("non-finite LP coefficient".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint (bounds included) at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(r, b)| (dot(r) - b).abs());
        let ge = self
            .ge_rows
            .iter()
            .zip(&self.ge_rhs)
            .map(|(r, b)| (b - dot(r)).max(0.0));
        let lb = x.iter().map(|&v| (-v).max(0.0));
        eq.chain(ge).chain(lb).fold(0.0, f64::max)
    }

    /// Line-oriented dump: a header, the objective row, then one row per
    /// constraint as `eq|ge  c_1 .. c_n  rhs`.
    pub fn to_text(&self, names: Option<&[String]>) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        let _ = writeln!(out, "# lp-dump v1");
        let _ = writeln!(
            out,
            "# vars {} eq {} ge {}",
            self.num_vars(),
            self.eq_rows.len(),
            self.ge_rows.len()
        );
        if let Some(names) = names {
            let _ = writeln!(out, "names {}", names.join(" "));
        }
        let fmt_row = |row: &[f64]| {
            row.iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "{sense} {}", fmt_row(&self.objective));
        for (row, b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let _ = writeln!(out, "eq {} {b:?}", fmt_row(row));
        }
        for (row, b) in self.ge_rows.iter().zip(&self.ge_rhs) {
            let _ = writeln!(out, "ge {} {b:?}", fmt_row(row));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        let value = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NAN,
        };
        Self {
            status,
            value,
            point: Vec::new(),
        }
    }
}

enum Phase {
    Done,
    Unbounded,
}

/// Simplex solver with reusable scratch memory; keep one per worker.
#[derive(Debug, Default, Clone)]
pub struct Solver {
    m: usize,
    n: usize,
    surplus: usize,
    width: usize,
    /// Original standard-form matrix with the right-hand side as last column.
    base: Vec<f64>,
    tableau: Vec<f64>,
    reduced: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    inverse: Vec<f64>,
    scratch: Vec<f64>,
}

impl Solver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, problem: &LpProblem) -> Result<LpSolution> {
        problem.validate()?;
        self.load(problem);
        if !self.phase_one()? {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        self.set_phase_two_cost(problem);
        match self.iterate(self.n + self.surplus)? {
            Phase::Unbounded => {
                let mut sol = LpSolution::without_point(LpStatus::Unbounded);
                if problem.sense == Sense::Minimize {
                    sol.value = f64::NEG_INFINITY;
                }
                Ok(sol)
            }
            Phase::Done => {
                self.refactor()?;
                let point = self.primal();
                let value = problem
                    .objective
                    .iter()
                    .zip(&point)
                    .map(|(c, x)| c * x)
                    .sum();
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    value,
                    point,
                })
            }
        }
    }

    /// Phase 1 only: is the constraint system nonempty?
    pub fn is_feasible(&mut self, problem: &LpProblem) -> Result<bool> {
        problem.validate()?;
        self.load(problem);
        self.phase_one()
    }

    fn cols(&self) -> usize {
        self.width - 1
    }

    fn load(&mut self, p: &LpProblem) {
        let n = p.num_vars();
        let me = p.eq_rows.len();
        let mg = p.ge_rows.len();
        let m = me + mg;
        let cols = n + mg + m;
        self.m = m;
        self.n = n;
        self.surplus = mg;
        self.width = cols + 1;
        self.base.clear();
        self.base.resize(m * self.width, 0.0);
        let rows = p
            .eq_rows
            .iter()
            .zip(&p.eq_rhs)
            .chain(p.ge_rows.iter().zip(&p.ge_rhs));
        for (r, (row, &rhs)) in rows.enumerate() {
            let w = self.width;
            let line = &mut self.base[r * w..(r + 1) * w];
            line[..n].copy_from_slice(row);
            if r >= me {
                line[n + (r - me)] = -1.0;
            }
            line[cols] = rhs;
            if rhs < 0.0 {
                line[..n + mg].iter_mut().for_each(|v| *v = -*v);
                line[cols] = -rhs;
            }
            line[n + mg + r] = 1.0;
        }
        self.tableau.clone_from(&self.base);
        self.basis.clear();
        self.basis.extend((0..m).map(|r| n + mg + r));
        self.cost.clear();
        self.cost.resize(cols, 0.0);
        self.reduced.clear();
        self.reduced.resize(self.width, 0.0);
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n + self.surplus
    }

    fn phase_one(&mut self) -> Result<bool> {
        let cols = self.cols();
        let first_art = self.n + self.surplus;
        for j in 0..cols {
            self.cost[j] = if j >= first_art { 1.0 } else { 0.0 };
        }
        self.price();
        // Phase 1 is bounded below by zero; an unbounded report means breakdown.
        if let Phase::Unbounded = self.iterate(cols)? {
            return Err(Error::NumericalFailure("phase 1 reported unbounded".into()));
        }
        self.refactor()?;
        let w = self.width;
        let infeasibility: f64 = (0..self.m)
            .filter(|&r| self.is_artificial(self.basis[r]))
            .map(|r| self.tableau[r * w + cols].max(0.0))
            .sum();
        if infeasibility > FEASIBILITY_TOL {
            return Ok(false);
        }
        self.drive_out_artificials();
        Ok(true)
    }

    /// Pivot zero-level artificials out of the basis where a structural
    /// column allows it; rows where none does are redundant and keep their
    /// artificial basic at zero (it can never re-enter).
    fn drive_out_artificials(&mut self) {
        let w = self.width;
        let structural = self.n + self.surplus;
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row = &self.tableau[r * w..r * w + structural];
            if let Some(j) = row.iter().position(|v| v.abs() > PIVOT_TOL) {
                self.pivot(r, j);
            }
        }
    }

    fn set_phase_two_cost(&mut self, p: &LpProblem) {
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for (c, &o) in self.cost.iter_mut().zip(&p.objective) {
            *c = sign * o;
        }
        self.price();
    }

    /// Recompute the reduced-cost row from the current tableau.
    fn price(&mut self) {
        let w = self.width;
        for j in 0..w {
            let mut v = if j < self.cols() { self.cost[j] } else { 0.0 };
            for r in 0..self.m {
                v -= self.cost[self.basis[r]] * self.tableau[r * w + j];
            }
            self.reduced[j] = v;
        }
    }

    fn iterate(&mut self, allowed: usize) -> Result<Phase> {
        let w = self.width;
        let rhs = self.cols();
        let mut stalled = 0;
        for iter in 1..=MAX_ITERATIONS {
            if iter % REFACTOR_EVERY == 0 {
                self.refactor()?;
                self.price();
            }
            let Some(enter) = (0..allowed).find(|&j| self.reduced[j] < -OPTIMALITY_TOL) else {
                return Ok(Phase::Done);
            };
            // Ties go to the largest pivot, so a roundoff-sized entry in a
            // degenerate row never wins; after a long degenerate run they go
            // to the lowest basic index instead, which cannot cycle.
            let bland = stalled >= BLAND_AFTER;
            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.m {
                let a = self.tableau[r * w + enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.tableau[r * w + rhs].max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio, a)),
                    Some((br, best, ba)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let wins = if tie && bland {
                            self.basis[r] < self.basis[br]
                        } else if tie {
                            a > ba
                        } else {
                            ratio < best
                        };
                        if wins {
                            Some((r, ratio, a))
                        } else {
                            Some((br, best, ba))
                        }
                    }
                };
            }
            let Some((row, ratio, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            stalled = if ratio == 0.0 { stalled + 1 } else { 0 };
            self.pivot(row, enter);
        }
        Err(Error::NumericalFailure(format!(
            "no convergence within {MAX_ITERATIONS} pivots"
        )))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.tableau[row * w + col];
        for j in 0..w {
            self.tableau[row * w + j] /= p;
        }
        self.tableau[row * w + col] = 1.0;
        self.scratch.clear();
        self.scratch
            .extend_from_slice(&self.tableau[row * w..(row + 1) * w]);
        for r in 0..self.m {
            if r == row {
                continue;
            }
            let f = self.tableau[r * w + col];
            if f == 0.0 {
                continue;
            }
            let line = &mut self.tableau[r * w..(r + 1) * w];
            for (t, s) in line.iter_mut().zip(&self.scratch) {
                *t -= f * s;
            }
            line[col] = 0.0;
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (t, s) in self.reduced.iter_mut().zip(&self.scratch) {
                *t -= f * s;
            }
            self.reduced[col] = 0.0;
        }
        let last = w - 1;
        for r in 0..self.m {
            let v = &mut self.tableau[r * w + last];
            if *v < 0.0 && *v > -PIVOT_TOL {
                *v = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Rebuild the tableau as `B^-1 [A | b]` from the original matrix.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let w = self.width;
        // Augmented [B | I], Gauss-Jordan with partial pivoting.
        let aw = 2 * m;
        self.inverse.clear();
        self.inverse.resize(m * aw, 0.0);
        for r in 0..m {
            for (k, &bj) in self.basis.iter().enumerate() {
                self.inverse[r * aw + k] = self.base[r * w + bj];
            }
            self.inverse[r * aw + m + r] = 1.0;
        }
        for k in 0..m {
            let (piv, mag) = (k..m)
                .map(|r| (r, self.inverse[r * aw + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag < SINGULAR_TOL {
                return Err(Error::NumericalFailure(format!(
                    "basis matrix is singular (pivot {mag:e})"
                )));
            }
            if piv != k {
                for j in 0..aw {
                    self.inverse.swap(k * aw + j, piv * aw + j);
                }
            }
            let p = self.inverse[k * aw + k];
            for j in 0..aw {
                self.inverse[k * aw + j] /= p;
            }
            for r in 0..m {
                if r == k {
                    continue;
                }
                let f = self.inverse[r * aw + k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..aw {
                    self.inverse[r * aw + j] -= f * self.inverse[k * aw + j];
                }
            }
        }
        // Row k of the eliminated system corresponds to basis position k.
        for r in 0..m {
            for j in 0..w {
                let mut v = 0.0;
                for i in 0..m {
                    v += self.inverse[r * aw + m + i] * self.base[i * w + j];
                }
                self.tableau[r * w + j] = v;
            }
            let rhs = &mut self.tableau[r * w + w - 1];
            if *rhs < 0.0 && *rhs > -PIVOT_TOL {
                *rhs = 0.0;
            }
        }
        Ok(())
    }

    fn primal(&self) -> Vec<f64> {
        let w = self.width;
        let mut x = vec![0.0; self.n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.tableau[r * w + w - 1].max(0.0);
            }
        }
        x
    }
}

/// Solve with a fresh solver.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    Solver::new().solve(problem)
}
