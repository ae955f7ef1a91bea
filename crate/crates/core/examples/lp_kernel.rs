//! The linear programs behind a single fiducial draw, solved in floating
//! point and checked against exact rational vertex enumeration.

use fiducial_iv::lp::{stratum_problem, Direction, Observed, Sense, StratumSolver};
use fiducial_iv::model::{estimand, AssumptionSet, CountsTable, EstimandKind};
use fiducial_iv::oracle::stratum_vertices;
use fiducial_iv::sampler::{propose, RngStream};
use num_traits::ToPrimitive;

fn main() -> fiducial_iv::Result<()> {
    let counts = CountsTable::new([[30, 25, 20, 25], [10, 20, 35, 35]]);
    let core = AssumptionSet::core();
    let mut rng = RngStream::new(1, 0).generator();
    let mut solver = StratumSolver::new();
    let draw = loop {
        let d = propose(&counts, &mut rng)?;
        if solver.feasible(Observed::Draw(&d), &core)? {
            break d;
        }
    };
    let ate = estimand(EstimandKind::Ate);
    let lp = stratum_problem(Observed::Draw(&draw), &core, &ate.numerator, Sense::Minimize);
    print!("{}", lp.problem.to_text(Some(&lp.column_names())));

    let vertices = stratum_vertices(Observed::Draw(&draw), &core)?;
    println!("{} vertices", vertices.vertices.len());
    for kind in [EstimandKind::Ate, EstimandKind::Cace] {
        let est = estimand(kind);
        let lo = solver.bound(Observed::Draw(&draw), &est, &core, Direction::Min)?;
        let hi = solver.bound(Observed::Draw(&draw), &est, &core, Direction::Max)?;
        let (elo, ehi) = vertices.estimand_range(&est).expect("nonempty polytope");
        println!(
            "{kind}: simplex [{:.12}, {:.12}]  exact [{:.12}, {:.12}]",
            lo.value,
            hi.value,
            elo.to_f64().unwrap(),
            ehi.to_f64().unwrap()
        );
    }
    Ok(())
}
