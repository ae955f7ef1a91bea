//! Repeated-sampling error rates of the fiducial intervals.
//!
//!     cargo run --release --example coverage_study -- 1 200 1000

use fiducial_iv::sim::{coverage_experiment, format_coverage_table, CoverageConfig};

fn main() -> fiducial_iv::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = CoverageConfig {
        replications: 50,
        n_mcmc: 300,
        ..CoverageConfig::default()
    };
    if let Some(s) = args.next() {
        cfg.set("scenario", &s)?;
    }
    if let Some(r) = args.next() {
        cfg.set("replications", &r)?;
    }
    if let Some(m) = args.next() {
        cfg.set("n_mcmc", &m)?;
    }
    print!("{}", format_coverage_table(&coverage_experiment(&cfg)?));
    Ok(())
}
