//! Fiducial confidence intervals for the lower and upper ATE bound.
//!
//!     cargo run --release --example vitamin_a_fiducial -- 10000

use fiducial_iv::datasets::vitamin_a;
use fiducial_iv::engine::{analyze, AnalysisConfig};

fn main() -> fiducial_iv::Result<()> {
    let n_mcmc = std::env::args()
        .nth(1)
        .map_or(10_000, |s| s.parse().expect("draw count"));
    let r = analyze(
        &vitamin_a(),
        &AnalysisConfig {
            n_mcmc,
            ..AnalysisConfig::default()
        },
    )?;
    println!("acceptance rate {:.3} ({} draws, {} attempts)", r.acceptance_rate, r.accepted, r.attempts);
    println!(
        "lower bound {:+.4}  95% CI ({:+.4}, {:+.4})",
        r.lower_point, r.lower_ci.low, r.lower_ci.high
    );
    println!(
        "upper bound {:+.4}  95% CI ({:+.4}, {:+.4})",
        r.upper_point, r.upper_ci.low, r.upper_ci.high
    );
    Ok(())
}
