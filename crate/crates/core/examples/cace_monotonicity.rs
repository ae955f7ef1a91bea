//! Under monotonicity the complier effect is point identified; without it,
//! only bounded.

use fiducial_iv::model::{estimand, observable_map, AssumptionSet, EstimandKind, Stratum, StratumVector};
use fiducial_iv::oracle::{monotone_cace_closed_form, observed_bounds};

fn main() -> fiducial_iv::Result<()> {
    // A population without defiers.
    let mut p = [0.0; 16];
    p[Stratum::from_bits(0, 1, 0, 1).index()] = 0.25;
    p[Stratum::from_bits(0, 1, 0, 0).index()] = 0.15;
    p[Stratum::from_bits(0, 1, 1, 1).index()] = 0.10;
    p[Stratum::from_bits(0, 0, 0, 0).index()] = 0.20;
    p[Stratum::from_bits(0, 0, 1, 1).index()] = 0.10;
    p[Stratum::from_bits(1, 1, 0, 1).index()] = 0.12;
    p[Stratum::from_bits(1, 1, 1, 1).index()] = 0.08;
    let q = observable_map(&StratumVector::new(p)?);
    let cace = estimand(EstimandKind::Cace);

    let (l, u) = observed_bounds(&q, &cace, &AssumptionSet::monotonicity())?;
    println!("monotonicity: [{l:.6}, {u:.6}]");
    println!("closed form:  {:.6}", monotone_cace_closed_form(&q)?);
    let (l, u) = observed_bounds(&q, &cace, &AssumptionSet::core())?;
    println!("core only:    [{l:.6}, {u:.6}]");
    Ok(())
}
