//! Every supported estimand under every assumption set, for one dataset.

use fiducial_iv::engine::{analyze, AnalysisConfig};
use fiducial_iv::model::{AssumptionLabel, CountsTable, EstimandKind};

fn main() {
    // Some control-arm subjects are treated, so the new-drug rows stall.
    let counts = CountsTable::new([[420, 310, 110, 160], [180, 140, 290, 390]]);
    for assumptions in AssumptionLabel::ALL {
        for estimand in EstimandKind::ALL {
            let cfg = AnalysisConfig {
                estimand,
                assumptions,
                n_mcmc: 400,
                max_attempts: Some(20_000),
                ..AnalysisConfig::default()
            };
            match analyze(&counts, &cfg) {
                Ok(r) => println!(
                    "{assumptions:>12} {estimand:>16}  [{:+.3}, {:+.3}]  rate {:.2}  degenerate {:.2}",
                    r.lower_point, r.upper_point, r.acceptance_rate, r.degenerate_fraction
                ),
                Err(e) => println!("{assumptions:>12} {estimand:>16}  {e}"),
            }
        }
    }
}
