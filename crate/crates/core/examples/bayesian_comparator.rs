//! Fiducial intervals next to Dirichlet-posterior intervals on the same data.

use fiducial_iv::engine::{analyze, AnalysisConfig};
use fiducial_iv::model::{summarize, AssumptionLabel, EstimandKind};
use fiducial_iv::sim::{bayesian_comparator, simulate, ScenarioId, ScenarioSpec, PRIOR_BAYES1, PRIOR_BAYES2};

fn main() -> fiducial_iv::Result<()> {
    let counts = summarize(&simulate(&ScenarioSpec::new(ScenarioId::Scenario2), 200, 3))?;
    let fid = analyze(&counts, &AnalysisConfig::default())?;
    println!("fiducial  lower CI ({:+.3}, {:+.3})  upper CI ({:+.3}, {:+.3})",
        fid.lower_ci.low, fid.lower_ci.high, fid.upper_ci.low, fid.upper_ci.high);
    for (name, prior) in [("bayes1", PRIOR_BAYES1), ("bayes2", PRIOR_BAYES2)] {
        let b = bayesian_comparator(&counts, &prior, 1000, 0, EstimandKind::Ate, AssumptionLabel::CoreIv, 0.95)?;
        println!(
            "{name}    lower CI ({:+.3}, {:+.3})  upper CI ({:+.3}, {:+.3})  kept {}/{}",
            b.lower_ci.low, b.lower_ci.high, b.upper_ci.low, b.upper_ci.high, b.accepted, b.attempts
        );
    }
    Ok(())
}
