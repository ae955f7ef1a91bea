//! Sharp bounds on the vitamin A mortality effect at the observed proportions.
//!
//!     cargo run --example vitamin_a_bounds

use fiducial_iv::datasets::vitamin_a;
use fiducial_iv::model::{estimand, AssumptionSet, EstimandKind};
use fiducial_iv::oracle::plug_in_bounds;

fn main() -> fiducial_iv::Result<()> {
    let counts = vitamin_a();
    println!("arm sizes: {} control, {} treated", counts.arm_total(0), counts.arm_total(1));
    let core = AssumptionSet::core();
    for kind in [EstimandKind::Ate, EstimandKind::Cace, EstimandKind::NeverTakerAce] {
        match plug_in_bounds(&counts, &estimand(kind), &core) {
            Ok((l, u)) => println!("{kind:>16}: [{l:+.4}, {u:+.4}]"),
            Err(e) => println!("{kind:>16}: {e}"),
        }
    }
    Ok(())
}
