//! Programs over the stratum polytope.
//!
//! For a fiducial draw the polytope is `{p >= 0 : sum p = 1, G_c p >= v_c}`
//! where `G_c p` is the mass the strata put on observable cell `c`. For an
//! observed distribution the inequalities become equalities `G_c p = q_c`.
//! Strata forced to zero by the assumption set are dropped from the columns.

use serde::{Deserialize, Serialize};

use super::{LpProblem, LpStatus, Sense, Solver};
use crate::error::{Error, Result};
use crate::model::{
    group_matrix, AssumptionSet, Estimand, FiducialDraw, ObservableDist, Stratum, NUM_CELLS,
    NUM_STRATA,
};

/// Minimum denominator below which a fractional estimand is flagged degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    pub fn sense(self) -> Sense {
        match self {
            Direction::Min => Sense::Minimize,
            Direction::Max => Sense::Maximize,
        }
    }
}

/// The data side of the polytope.
#[derive(Debug, Clone, Copy)]
pub enum Observed<'a> {
    /// Cell masses bounded below by a fiducial draw.
    Draw(&'a FiducialDraw),
    /// Cell masses pinned to an observable distribution.
    Exact(&'a ObservableDist),
}

impl Observed<'_> {
    fn cells(&self) -> [f64; NUM_CELLS] {
        match self {
            Observed::Draw(d) => d.flat(),
            Observed::Exact(q) => q.flat(),
        }
    }
}

/// A stratum program plus the stratum behind each leading column.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumLp {
    pub problem: LpProblem,
    pub columns: Vec<Stratum>,
    /// True when the last column is the Charnes–Cooper scale `t`.
    pub homogenized: bool,
}

impl StratumLp {
    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.columns.iter().map(|s| s.to_string()).collect();
        if self.homogenized {
            names.push("t".into());
        }
        names
    }

    /// Expand a primal point back to all 16 strata; for homogenized programs
    /// this divides by `t`.
    pub fn strata_point(&self, x: &[f64]) -> [f64; NUM_STRATA] {
        let scale = if self.homogenized {
            x[self.columns.len()]
        } else {
            1.0
        };
        let mut p = [0.0; NUM_STRATA];
        for (s, v) in self.columns.iter().zip(x) {
            p[s.index()] = v / scale;
        }
        p
    }
}

fn restrict(coefs: &[f64; NUM_STRATA], columns: &[Stratum]) -> Vec<f64> {
    columns.iter().map(|s| coefs[s.index()]).collect()
}

/// `optimize objective . p` over the polytope.
pub fn stratum_problem(
    observed: Observed<'_>,
    assumptions: &AssumptionSet,
    objective: &[f64; NUM_STRATA],
    sense: Sense,
) -> StratumLp {
    let columns = assumptions.free_strata();
    let groups = group_matrix();
    let mut problem = LpProblem::new(sense, restrict(objective, &columns));
    problem.add_eq(vec![1.0; columns.len()], 1.0);
    for (row, rhs) in groups.iter().zip(observed.cells()) {
        let coefs = restrict(row, &columns);
        match observed {
            Observed::Draw(_) => problem.add_ge(coefs, rhs),
            Observed::Exact(_) => problem.add_eq(coefs, rhs),
        };
    }
    StratumLp {
        problem,
        columns,
        homogenized: false,
    }
}

/// Charnes–Cooper transform of `numerator . p / denominator . p`:
/// variables `y = t p` and `t >= 0`, homogenized rows, `denominator . y = 1`.
/// With `max_scale`, adds `t <= max_scale`, i.e. `denominator . p >= 1 / max_scale`.
pub fn charnes_cooper_problem(
    observed: Observed<'_>,
    assumptions: &AssumptionSet,
    estimand: &Estimand,
    sense: Sense,
    max_scale: Option<f64>,
) -> StratumLp {
    let columns = assumptions.free_strata();
    let k = columns.len();
    let groups = group_matrix();
    let with_t = |mut row: Vec<f64>, t: f64| {
        row.push(t);
        row
    };
    let mut objective = restrict(&estimand.numerator, &columns);
    objective.push(0.0);
    let mut problem = LpProblem::new(sense, objective);
    problem.add_eq(with_t(vec![1.0; k], -1.0), 0.0);
    for (row, rhs) in groups.iter().zip(observed.cells()) {
        let coefs = with_t(restrict(row, &columns), -rhs);
        match observed {
            Observed::Draw(_) => problem.add_ge(coefs, 0.0),
            Observed::Exact(_) => problem.add_eq(coefs, 0.0),
        };
    }
    problem.add_eq(
        with_t(restrict(&estimand.denominator_coefficients(), &columns), 0.0),
        1.0,
    );
    if let Some(cap) = max_scale {
        let mut row = vec![0.0; k + 1];
        row[k] = -1.0;
        problem.add_ge(row, -cap);
    }
    StratumLp {
        problem,
        columns,
        homogenized: true,
    }
}

/// An optimum with the strata attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub degenerate: bool,
    pub witness: [f64; NUM_STRATA],
}

/// Result of a fractional bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalBound {
    pub value: f64,
    pub degenerate: bool,
}

/// `c.x / d.x` lies between the extreme ratios `c_s / d_s` whenever every
/// stratum in the numerator also carries denominator mass. Near the
/// Charnes–Cooper cap the LP value is only good to about `cap * eps`, so pull
/// it back inside that range.
fn clamp_to_mediants(value: f64, num: &[f64; NUM_STRATA], den: &[f64; NUM_STRATA]) -> f64 {
    if num.iter().zip(den).any(|(&c, &d)| c != 0.0 && d <= 0.0) {
        return value;
    }
    let ratios = num.iter().zip(den).filter(|(_, &d)| d > 0.0).map(|(c, d)| c / d);
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r), hi.max(r))
    });
    if lo > hi {
        value
    } else {
        value.clamp(lo, hi)
    }
}

/// Stratum programs sharing one simplex workspace.
#[derive(Debug, Default, Clone)]
pub struct StratumSolver {
    solver: Solver,
}

impl StratumSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn feasible(&mut self, observed: Observed<'_>, assumptions: &AssumptionSet) -> Result<bool> {
        let lp = stratum_problem(observed, assumptions, &[0.0; NUM_STRATA], Sense::Minimize);
        self.solver.is_feasible(&lp.problem)
    }

    fn linear(
        &mut self,
        observed: Observed<'_>,
        assumptions: &AssumptionSet,
        objective: &[f64; NUM_STRATA],
        direction: Direction,
    ) -> Result<Bound> {
        let lp = stratum_problem(observed, assumptions, objective, direction.sense());
        let sol = self.solver.solve(&lp.problem)?;
        match sol.status {
            LpStatus::Optimal => Ok(Bound {
                value: sol.value,
                degenerate: false,
                witness: lp.strata_point(&sol.point),
            }),
            LpStatus::Infeasible => Err(Error::InfeasibleDraw),
            LpStatus::Unbounded => Err(Error::NumericalFailure(
                "bounded polytope reported unbounded".into(),
            )),
        }
    }

    fn fractional(
        &mut self,
        observed: Observed<'_>,
        assumptions: &AssumptionSet,
        estimand: &Estimand,
        direction: Direction,
    ) -> Result<Bound> {
        let denominator = estimand.denominator_coefficients();
        let low = self.linear(observed, assumptions, &denominator, Direction::Min)?;
        let degenerate = low.value <= DEGENERATE_DENOMINATOR;
        if degenerate {
            let high = self.linear(observed, assumptions, &denominator, Direction::Max)?;
            if high.value <= DEGENERATE_DENOMINATOR {
                return Err(Error::ZeroDenominator);
            }
        }
        let cap = degenerate.then_some(1.0 / DEGENERATE_DENOMINATOR);
        let lp = charnes_cooper_problem(observed, assumptions, estimand, direction.sense(), cap);
        let sol = self.solver.solve(&lp.problem)?;
        match sol.status {
            LpStatus::Optimal => Ok(Bound {
                value: clamp_to_mediants(sol.value, &estimand.numerator, &denominator),
                degenerate,
                witness: lp.strata_point(&sol.point),
            }),
            LpStatus::Infeasible => Err(Error::NumericalFailure(
                "Charnes–Cooper program infeasible on a feasible polytope".into(),
            )),
            LpStatus::Unbounded => Err(Error::NumericalFailure(
                "Charnes–Cooper program unbounded".into(),
            )),
        }
    }

    /// Optimum of any estimand, dispatching on linear vs fractional.
    pub fn bound(
        &mut self,
        observed: Observed<'_>,
        estimand: &Estimand,
        assumptions: &AssumptionSet,
        direction: Direction,
    ) -> Result<Bound> {
        if estimand.is_linear() {
            self.linear(observed, assumptions, &estimand.numerator, direction)
        } else {
            self.fractional(observed, assumptions, estimand, direction)
        }
    }

    /// `(min, max)` and whether either side was degenerate.
    pub fn interval(
        &mut self,
        observed: Observed<'_>,
        estimand: &Estimand,
        assumptions: &AssumptionSet,
    ) -> Result<(f64, f64, bool)> {
        let lo = self.bound(observed, estimand, assumptions, Direction::Min)?;
        let hi = self.bound(observed, estimand, assumptions, Direction::Max)?;
        // Both optima are LP values over the same polytope; clamp rounding-level inversions.
        let upper = hi.value.max(lo.value);
        Ok((lo.value, upper, lo.degenerate || hi.degenerate))
    }
}

/// Does some stratum vector satisfy the draw's constraints?
pub fn feasible(draw: &FiducialDraw, assumptions: &AssumptionSet) -> Result<bool> {
    StratumSolver::new().feasible(Observed::Draw(draw), assumptions)
}

/// Extreme value of a linear estimand over the draw's polytope.
pub fn bound_linear(
    draw: &FiducialDraw,
    estimand: &Estimand,
    assumptions: &AssumptionSet,
    direction: Direction,
) -> Result<f64> {
    if !estimand.is_linear() {
        return Err(Error::InvalidValue(format!(
            "{} is fractional; use bound_fractional",
            estimand.kind
        )));
    }
    StratumSolver::new()
        .bound(Observed::Draw(draw), estimand, assumptions, direction)
        .map(|b| b.value)
}

/// Extreme value of a ratio estimand over the draw's polytope.
pub fn bound_fractional(
    draw: &FiducialDraw,
    estimand: &Estimand,
    assumptions: &AssumptionSet,
    direction: Direction,
) -> Result<FractionalBound> {
    if estimand.is_linear() {
        return Err(Error::InvalidValue(format!(
            "{} is linear; use bound_linear",
            estimand.kind
        )));
    }
    StratumSolver::new()
        .bound(Observed::Draw(draw), estimand, assumptions, direction)
        .map(|b| FractionalBound {
            value: b.value,
            degenerate: b.degenerate,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{estimand, EstimandKind};

    fn vacuous() -> FiducialDraw {
        FiducialDraw::new([1.0; 2], [[0.0; 4]; 2]).unwrap()
    }

    #[test]
    fn vacuous_draw_is_feasible_with_full_ate_range() {
        let d = vacuous();
        let ate = estimand(EstimandKind::Ate);
        let core = AssumptionSet::core();
        assert!(feasible(&d, &core).unwrap());
        let lo = bound_linear(&d, &ate, &core, Direction::Min).unwrap();
        let hi = bound_linear(&d, &ate, &core, Direction::Max).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_groups_each_needing_full_mass_are_infeasible() {
        let mut v = [[0.0; 4]; 2];
        v[0][0] = 1.0; // q000
        v[1][1] = 1.0; // q101
        let d = FiducialDraw::new([0.0; 2], v).unwrap();
        assert!(!feasible(&d, &AssumptionSet::core()).unwrap());
        let ate = estimand(EstimandKind::Ate);
        assert_eq!(
            bound_linear(&d, &ate, &AssumptionSet::core(), Direction::Min),
            Err(Error::InfeasibleDraw)
        );
    }

    #[test]
    fn vacuous_draw_cace_is_degenerate_but_bounded() {
        let d = vacuous();
        let cace = estimand(EstimandKind::Cace);
        for dir in [Direction::Min, Direction::Max] {
            let b = bound_fractional(&d, &cace, &AssumptionSet::core(), dir).unwrap();
            assert!(b.degenerate);
            assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&b.value), "{b:?}");
        }
        let lo = bound_fractional(&d, &cace, &AssumptionSet::core(), Direction::Min).unwrap();
        let hi = bound_fractional(&d, &cace, &AssumptionSet::core(), Direction::Max).unwrap();
        assert!((lo.value + 1.0).abs() < 1e-6 && (hi.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn defier_effect_undefined_under_monotonicity() {
        let d = vacuous();
        let e = estimand(EstimandKind::DefierAce);
        assert_eq!(
            bound_fractional(&d, &e, &AssumptionSet::monotonicity(), Direction::Max),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn linear_and_fractional_entry_points_check_kind() {
        let d = vacuous();
        let core = AssumptionSet::core();
        assert!(bound_linear(&d, &estimand(EstimandKind::Cace), &core, Direction::Min).is_err());
        assert!(bound_fractional(&d, &estimand(EstimandKind::Ate), &core, Direction::Min).is_err());
    }

    #[test]
    fn forced_zero_strata_are_dropped() {
        let d = vacuous();
        let lp = stratum_problem(
            Observed::Draw(&d),
            &AssumptionSet::new_drug(),
            &[0.0; NUM_STRATA],
            Sense::Minimize,
        );
        assert_eq!(lp.columns.len(), 8);
        assert_eq!(lp.problem.num_rows(), 9);
        let cc = charnes_cooper_problem(
            Observed::Draw(&d),
            &AssumptionSet::core(),
            &estimand(EstimandKind::Cace),
            Sense::Minimize,
            None,
        );
        assert_eq!(cc.problem.num_vars(), 17);
        assert_eq!(cc.column_names().last().map(String::as_str), Some("t"));
    }

    #[test]
    fn mediant_clamp_only_when_numerator_is_covered() {
        let mut num = [0.0; NUM_STRATA];
        let mut den = [0.0; NUM_STRATA];
        num[0] = 1.0;
        num[1] = -1.0;
        den[0] = 1.0;
        den[1] = 1.0;
        den[2] = 1.0;
        assert_eq!(clamp_to_mediants(-1.000_000_05, &num, &den), -1.0);
        assert_eq!(clamp_to_mediants(0.25, &num, &den), 0.25);
        den[1] = 0.0;
        assert_eq!(clamp_to_mediants(-3.0, &num, &den), -3.0);
    }
}
