//! Fiducial inference for partially identified effects in binary
//! instrumental-variable models.
//!
//! Data are two multinomials of `(A, Y)` cells, one per instrument arm. The
//! latent parameter is the distribution over 16 principal strata. Each
//! fiducial draw defines a polytope of stratum vectors; draws whose polytope
//! is empty are rejected, and the extremes of the estimand over the
//! remaining polytopes form samples `l*`, `u*` summarized by quantiles.
//!
//! ```no_run
//! use fiducial_iv::datasets::vitamin_a;
//! use fiducial_iv::engine::{analyze, AnalysisConfig};
//!
//! let result = analyze(&vitamin_a(), &AnalysisConfig { n_mcmc: 2000, ..Default::default() })?;
//! println!("lower bound CI {:?}", result.lower_ci);
//! # Ok::<(), fiducial_iv::Error>(())
//! ```

pub mod cli;
pub mod datasets;
pub mod engine;
pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod sampler;
pub mod sim;

pub use error::{Error, Result};
