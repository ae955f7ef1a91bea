//! The acceptance rate as evidence for or against the IV assumptions.
//!
//! Two synthetic tables with the same sample size: one generated from a
//! distribution satisfying the instrumental inequalities, one violating them.

use fiducial_iv::engine::probe_acceptance;
use fiducial_iv::model::{AssumptionSet, CountsTable};
use fiducial_iv::oracle::exact_counts_feasible;

fn main() -> fiducial_iv::Result<()> {
    let core = AssumptionSet::core();
    let tables = [
        ("compatible", [[0.5, 0.1, 0.2, 0.2], [0.1, 0.45, 0.2, 0.25]]),
        ("violating", [[0.6, 0.1, 0.15, 0.15], [0.1, 0.5, 0.2, 0.2]]),
    ];
    for (name, q) in tables {
        println!("{name}:");
        for n in [50.0, 500.0, 5000.0] {
            let counts = CountsTable::new(q.map(|arm| arm.map(|p: f64| (p * n).round() as u64)));
            let (_, rate) = probe_acceptance(&counts, &core, 2000, 0)?;
            let inside = exact_counts_feasible(&counts, &core)?;
            println!("  n = {n:>5} per arm  rate {rate:.3}  proportions feasible: {inside}");
        }
    }
    Ok(())
}
