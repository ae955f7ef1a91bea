//! Reference computations for validating the floating-point pipeline.
//!
//! The exact side works on integers: every row of the standard-form system
//! is scaled to integer coefficients and the simplex tableau is kept in
//! fraction-free (integer-preserving) form, where each entry is a numerator
//! over one shared positive denominator, the current basis determinant.
//! Vertex enumeration walks the graph of feasible bases from a starting
//! basis, taking every minimum-ratio pivot, so degenerate vertices are
//! traversed through all of their bases.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lp::{stratum_problem, LpProblem, Observed, Sense, StratumSolver};
use crate::model::{
    empirical_proportions, AssumptionSet, CountsTable, Estimand, ObservableDist, NUM_STRATA,
};

pub const MAX_VARIABLES: usize = 24;
pub const MAX_ROWS: usize = 14;
const MAX_BASES: usize = 2_000_000;

/// Exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(pub Vec<BigRational>);

impl RationalVector {
    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn dot(&self, coefs: &[BigRational]) -> BigRational {
        self.0
            .iter()
            .zip(coefs)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactOptimum {
    Optimal(BigRational),
    Infeasible,
    Unbounded,
}

impl ExactOptimum {
    pub fn value(&self) -> Option<f64> {
        match self {
            ExactOptimum::Optimal(v) => v.to_f64(),
            _ => None,
        }
    }
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

pub fn rationals(xs: &[f64]) -> Vec<BigRational> {
    xs.iter().map(|&x| rational(x)).collect()
}

/// Fraction-free simplex tableau: actual entry = `cells / denom`.
#[derive(Debug, Clone)]
struct Tableau {
    width: usize,
    cells: Vec<BigInt>,
    reduced: Vec<BigInt>,
    denom: BigInt,
    basis: Vec<usize>,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, r: usize, j: usize) -> &BigInt {
        &self.cells[r * self.width + j]
    }

    fn rhs(&self, r: usize) -> &BigInt {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        let w = self.width;
        let p = self.cells[row * w + col].clone();
        let pivot_row: Vec<BigInt> = self.cells[row * w..(row + 1) * w].to_vec();
        let exact_div = |num: BigInt, den: &BigInt| -> Result<BigInt> {
            let (q, r) = num.div_rem(den);
            if r.is_zero() {
                Ok(q)
            } else {
                Err(Error::NumericalFailure("inexact fraction-free pivot".into()))
            }
        };
        for r in 0..self.rows() {
            if r == row {
                continue;
            }
            let f = self.cells[r * w + col].clone();
            for (cell, pj) in self.cells[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                let num = &p * &*cell - &f * pj;
                *cell = exact_div(num, &self.denom)?;
            }
        }
        let f = self.reduced[col].clone();
        for (red, pj) in self.reduced.iter_mut().zip(&pivot_row) {
            let num = &p * &*red - &f * pj;
            *red = exact_div(num, &self.denom)?;
        }
        if p.is_negative() {
            self.cells.iter_mut().for_each(|c| *c = -&*c);
            self.reduced.iter_mut().for_each(|c| *c = -&*c);
            self.denom = -p;
        } else {
            self.denom = p;
        }
        self.basis[row] = col;
        Ok(())
    }

    /// Rows attaining the minimum ratio for entering column `col`.
    fn min_ratio_rows(&self, col: usize) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        for r in 0..self.rows() {
            let a = self.at(r, col);
            if !a.is_positive() {
                continue;
            }
            match best.first() {
                None => best.push(r),
                Some(&b) => {
                    // rhs_r / a_r  vs  rhs_b / a_b, denominators positive.
                    let lhs = self.rhs(r) * self.at(b, col);
                    let rhs = self.rhs(b) * a;
                    match lhs.cmp(&rhs) {
                        std::cmp::Ordering::Less => {
                            best.clear();
                            best.push(r);
                        }
                        std::cmp::Ordering::Equal => best.push(r),
                        std::cmp::Ordering::Greater => {}
                    }
                }
            }
        }
        best
    }

    /// Bland's rule over columns `0..allowed`; returns false if unbounded.
    fn run_bland(&mut self, allowed: usize) -> Result<bool> {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.reduced[j].is_negative()) else {
                return Ok(true);
            };
            let rows = self.min_ratio_rows(enter);
            let Some(&leave) = rows.iter().min_by_key(|&&r| self.basis[r]) else {
                return Ok(false);
            };
            self.pivot(leave, enter)?;
        }
    }
}

/// Standard form `[A | -I_surplus] x = b`, `b >= 0`, rows scaled to integers.
struct StandardForm {
    n: usize,
    structural: usize,
    rows: Vec<Vec<BigInt>>, // structural coefficients then rhs
}

/// Constraint data in exact rationals: `E x = e`, `G x >= g`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalProblem {
    pub num_vars: usize,
    pub eq: Vec<(Vec<BigRational>, BigRational)>,
    pub ge: Vec<(Vec<BigRational>, BigRational)>,
}

impl RationalProblem {
    /// Exact image of a floating-point program's constraints.
    pub fn from_lp(problem: &LpProblem) -> Result<Self> {
        problem.validate()?;
        let conv = |rows: &[Vec<f64>], rhs: &[f64]| {
            rows.iter()
                .zip(rhs)
                .map(|(r, &b)| (rationals(r), rational(b)))
                .collect()
        };
        Ok(Self {
            num_vars: problem.num_vars(),
            eq: conv(&problem.eq_rows, &problem.eq_rhs),
            ge: conv(&problem.ge_rows, &problem.ge_rhs),
        })
    }
}

fn standard_form(problem: &RationalProblem) -> Result<StandardForm> {
    let n = problem.num_vars;
    let total_rows = problem.eq.len() + problem.ge.len();
    if n > MAX_VARIABLES || total_rows > MAX_ROWS + 1 {
        return Err(Error::InstanceTooLarge(format!(
            "{n} variables and {total_rows} rows (limits {MAX_VARIABLES} and {MAX_ROWS})"
        )));
    }
    let mut exact_rows: Vec<(Vec<BigRational>, BigRational, bool)> = Vec::new();
    for (row, b) in &problem.eq {
        exact_rows.push((row.clone(), b.clone(), false));
    }
    for (row, b) in &problem.ge {
        // `a.x >= b` with `a >= 0` and `b <= 0` holds for every `x >= 0`.
        if row.iter().all(|a| !a.is_negative()) && !b.is_positive() {
            continue;
        }
        exact_rows.push((row.clone(), b.clone(), true));
    }
    let surplus = exact_rows.iter().filter(|r| r.2).count();
    if exact_rows.len() > MAX_ROWS {
        return Err(Error::InstanceTooLarge(format!(
            "{} active rows (limit {MAX_ROWS})",
            exact_rows.len()
        )));
    }
    let structural = n + surplus;
    let mut rows = Vec::with_capacity(exact_rows.len());
    let mut next_surplus = n;
    for (coefs, b, is_ge) in exact_rows {
        let mut line: Vec<BigRational> = coefs;
        line.resize(structural, BigRational::zero());
        if is_ge {
            line[next_surplus] = -BigRational::one();
            next_surplus += 1;
        }
        line.push(b);
        if line[structural].is_negative() {
            line.iter_mut().for_each(|v| *v = -&*v);
        }
        let scale = line
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        rows.push(
            line.iter()
                .map(|v| (v * BigRational::from_integer(scale.clone())).to_integer())
                .collect(),
        );
    }
    Ok(StandardForm {
        n,
        structural,
        rows,
    })
}

/// Exact phase 1. Returns a feasible tableau over structural columns only,
/// with redundant rows removed, or `None` when the system is infeasible.
fn phase_one(sf: &StandardForm) -> Result<Option<Tableau>> {
    let m = sf.rows.len();
    let s = sf.structural;
    let width = s + m + 1;
    let mut cells = vec![BigInt::zero(); m * width];
    for (r, row) in sf.rows.iter().enumerate() {
        cells[r * width..r * width + s].clone_from_slice(&row[..s]);
        cells[r * width + s + r] = BigInt::one();
        cells[r * width + width - 1] = row[s].clone();
    }
    let mut reduced = vec![BigInt::zero(); width];
    for (j, red) in reduced.iter_mut().enumerate() {
        if j < s || j == width - 1 {
            *red = -(0..m).fold(BigInt::zero(), |acc, r| acc + &cells[r * width + j]);
        }
    }
    let mut t = Tableau {
        width,
        cells,
        reduced,
        denom: BigInt::one(),
        basis: (s..s + m).collect(),
    };
    let bounded = t.run_bland(s + m)?;
    debug_assert!(bounded, "phase 1 objective is bounded below");
    if !t.reduced[width - 1].is_zero() {
        return Ok(None);
    }
    // Pivot zero-level artificials out; drop rows where that is impossible.
    let mut r = 0;
    while r < t.rows() {
        if t.basis[r] < s {
            r += 1;
            continue;
        }
        if let Some(j) = (0..s).find(|&j| !t.at(r, j).is_zero()) {
            t.pivot(r, j)?;
            r += 1;
        } else {
            t.cells.drain(r * width..(r + 1) * width);
            t.basis.remove(r);
        }
    }
    // Artificial columns never re-enter; keep structural columns and rhs.
    let new_width = s + 1;
    let rows = t.rows();
    let mut cells = Vec::with_capacity(rows * new_width);
    for r in 0..rows {
        cells.extend_from_slice(&t.cells[r * width..r * width + s]);
        cells.push(t.cells[r * width + width - 1].clone());
    }
    Ok(Some(Tableau {
        width: new_width,
        cells,
        reduced: vec![BigInt::zero(); new_width],
        denom: t.denom,
        basis: t.basis,
    }))
}

/// Is `{x >= 0 : E x = e, G x >= g}` nonempty, decided exactly?
pub fn exact_feasible(problem: &LpProblem) -> Result<bool> {
    exact_feasible_rational(&RationalProblem::from_lp(problem)?)
}

pub fn exact_feasible_rational(problem: &RationalProblem) -> Result<bool> {
    Ok(phase_one(&standard_form(problem)?)?.is_some())
}

/// All vertices and extreme directions of a polyhedron in exact arithmetic.
#[derive(Debug, Clone)]
pub struct VertexEnumeration {
    pub feasible: bool,
    pub vertices: Vec<RationalVector>,
    pub rays: Vec<RationalVector>,
    pub bases_visited: usize,
}

impl VertexEnumeration {
    pub fn optimum(&self, objective: &[BigRational], sense: Sense) -> ExactOptimum {
        if !self.feasible {
            return ExactOptimum::Infeasible;
        }
        let better = |a: &BigRational| match sense {
            Sense::Maximize => a.is_positive(),
            Sense::Minimize => a.is_negative(),
        };
        if self.rays.iter().any(|r| better(&r.dot(objective))) {
            return ExactOptimum::Unbounded;
        }
        let values = self.vertices.iter().map(|v| v.dot(objective));
        let best = match sense {
            Sense::Maximize => values.max(),
            Sense::Minimize => values.min(),
        };
        best.map_or(ExactOptimum::Infeasible, ExactOptimum::Optimal)
    }
}

/// Enumerate every basic feasible solution of the problem's constraint set.
pub fn vertex_enumerate(problem: &LpProblem) -> Result<VertexEnumeration> {
    vertex_enumerate_rational(&RationalProblem::from_lp(problem)?)
}

pub fn vertex_enumerate_rational(problem: &RationalProblem) -> Result<VertexEnumeration> {
    let sf = standard_form(problem)?;
    let Some(start) = phase_one(&sf)? else {
        return Ok(VertexEnumeration {
            feasible: false,
            vertices: Vec::new(),
            rays: Vec::new(),
            bases_visited: 0,
        });
    };
    let n = sf.n;
    let s = sf.structural;
    let key = |basis: &[usize]| {
        let mut k = basis.to_vec();
        k.sort_unstable();
        k
    };
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut vertices: HashSet<RationalVector> = HashSet::new();
    let mut rays: HashSet<RationalVector> = HashSet::new();
    visited.insert(key(&start.basis));
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let mut x = vec![BigRational::zero(); n];
        for (r, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = BigRational::new(t.rhs(r).clone(), t.denom.clone());
            }
        }
        vertices.insert(RationalVector(x));
        for j in (0..s).filter(|j| !t.basis.contains(j)) {
            let rows = t.min_ratio_rows(j);
            if rows.is_empty() {
                let mut d = vec![BigRational::zero(); n];
                if j < n {
                    d[j] = BigRational::one();
                }
                for (r, &b) in t.basis.iter().enumerate() {
                    if b < n {
                        d[b] = BigRational::new(-t.at(r, j).clone(), t.denom.clone());
                    }
                }
                if d.iter().any(|v| !v.is_zero()) {
                    rays.insert(RationalVector(d));
                }
                continue;
            }
            for r in rows {
                let mut next_basis = t.basis.clone();
                next_basis[r] = j;
                if visited.insert(key(&next_basis)) {
                    if visited.len() > MAX_BASES {
                        return Err(Error::InstanceTooLarge(format!(
                            "more than {MAX_BASES} feasible bases"
                        )));
                    }
                    let mut next = t.clone();
                    next.pivot(r, j)?;
                    queue.push_back(next);
                }
            }
        }
    }
    let mut vertices: Vec<RationalVector> = vertices.into_iter().collect();
    vertices.sort();
    let mut rays: Vec<RationalVector> = rays.into_iter().collect();
    rays.sort();
    Ok(VertexEnumeration {
        feasible: true,
        vertices,
        rays,
        bases_visited: visited.len(),
    })
}

/// Exact optimum of the problem's own objective and sense.
pub fn exact_optimum(problem: &LpProblem) -> Result<ExactOptimum> {
    let ve = vertex_enumerate(problem)?;
    Ok(ve.optimum(&rationals(&problem.objective), problem.sense))
}

/// Vertices of a stratum polytope, expanded to all 16 strata.
#[derive(Debug, Clone)]
pub struct StratumVertices {
    pub vertices: Vec<RationalVector>,
}

impl StratumVertices {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Exact `(min, max)` of a linear functional.
    pub fn linear_range(&self, coefs: &[f64; NUM_STRATA]) -> Option<(BigRational, BigRational)> {
        let c = rationals(coefs);
        let values: Vec<BigRational> = self.vertices.iter().map(|v| v.dot(&c)).collect();
        Some((values.iter().min()?.clone(), values.iter().max()?.clone()))
    }

    /// Exact `(min, max)` of an estimand. For ratios the extremes over a
    /// polytope are attained at vertices with positive denominator; vertices
    /// with zero denominator also have zero numerator and drop out.
    pub fn estimand_range(&self, estimand: &Estimand) -> Option<(BigRational, BigRational)> {
        if estimand.is_linear() {
            return self.linear_range(&estimand.numerator);
        }
        let num = rationals(&estimand.numerator);
        let den = rationals(&estimand.denominator_coefficients());
        let ratios: Vec<BigRational> = self
            .vertices
            .iter()
            .filter_map(|v| {
                let d = v.dot(&den);
                d.is_positive().then(|| v.dot(&num) / d)
            })
            .collect();
        Some((ratios.iter().min()?.clone(), ratios.iter().max()?.clone()))
    }
}

pub fn stratum_vertices(
    observed: Observed<'_>,
    assumptions: &AssumptionSet,
) -> Result<StratumVertices> {
    let lp = stratum_problem(observed, assumptions, &[0.0; NUM_STRATA], Sense::Minimize);
    let ve = vertex_enumerate(&lp.problem)?;
    let vertices = ve
        .vertices
        .into_iter()
        .map(|v| {
            let mut full = vec![BigRational::zero(); NUM_STRATA];
            for (s, x) in lp.columns.iter().zip(v.0) {
                full[s.index()] = x;
            }
            RationalVector(full)
        })
        .collect();
    Ok(StratumVertices { vertices })
}

/// Exact feasibility of a stratum polytope.
///
/// Floating-point proportions rarely sum to exactly one, so for plug-in
/// checks prefer [`exact_counts_feasible`], which uses the ratios themselves.
pub fn exact_stratum_feasible(observed: Observed<'_>, assumptions: &AssumptionSet) -> Result<bool> {
    let lp = stratum_problem(observed, assumptions, &[0.0; NUM_STRATA], Sense::Minimize);
    exact_feasible(&lp.problem)
}

/// Equality-constrained stratum program at the exact proportions `n_zc / n_z`.
pub fn counts_problem(counts: &CountsTable, assumptions: &AssumptionSet) -> Result<RationalProblem> {
    let q = empirical_proportions(counts)?;
    let lp = stratum_problem(Observed::Exact(&q), assumptions, &[0.0; NUM_STRATA], Sense::Minimize);
    let mut exact = RationalProblem::from_lp(&lp.problem)?;
    // Rows: total mass first, then group rows in order 4z + cell.
    for z in 0..2u8 {
        let total = BigInt::from(counts.arm_total(z));
        for (c, &n) in counts.arm(z).iter().enumerate() {
            exact.eq[1 + 4 * z as usize + c].1 = BigRational::new(BigInt::from(n), total.clone());
        }
    }
    Ok(exact)
}

/// Is the empirical distribution of `counts` exactly inside the feasibility set?
pub fn exact_counts_feasible(counts: &CountsTable, assumptions: &AssumptionSet) -> Result<bool> {
    exact_feasible_rational(&counts_problem(counts, assumptions)?)
}

/// Bounds of the estimand over every stratum vector reproducing the plug-in
/// proportions exactly.
pub fn plug_in_bounds(
    counts: &CountsTable,
    estimand: &Estimand,
    assumptions: &AssumptionSet,
) -> Result<(f64, f64)> {
    let q = empirical_proportions(counts)?;
    observed_bounds(&q, estimand, assumptions)
}

/// Same as [`plug_in_bounds`] for a given observable distribution.
pub fn observed_bounds(
    q: &ObservableDist,
    estimand: &Estimand,
    assumptions: &AssumptionSet,
) -> Result<(f64, f64)> {
    let mut solver = StratumSolver::new();
    if !solver.feasible(Observed::Exact(q), assumptions)? {
        return Err(Error::InfeasibleAtPlugIn);
    }
    let (lo, hi, _) = solver.interval(Observed::Exact(q), estimand, assumptions)?;
    Ok((lo, hi))
}

/// Complier effect under monotonicity, as a ratio of observable contrasts.
pub fn monotone_cace_closed_form(q: &ObservableDist) -> Result<f64> {
    let g = |z, a, y| q.get(z, a, y);
    let numerator = g(0, 0, 0) - g(1, 1, 0) - g(1, 0, 0) + g(0, 1, 0);
    let denominator = (g(0, 0, 0) + g(1, 1, 0) + g(0, 0, 1) + g(1, 1, 1)
        - g(1, 0, 0)
        - g(0, 1, 0)
        - g(1, 0, 1)
        - g(0, 1, 1))
        / 2.0;
    if denominator.abs() <= 1e-12 {
        return Err(Error::ZeroComplianceMass);
    }
    Ok(numerator / denominator)
}
