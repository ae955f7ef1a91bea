use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no records in input")]
    EmptyData,

    #[error("instrument arm z={arm} has no records; both arms must be observed")]
    MissingArm { arm: u8 },

    #[error("unknown estimand `{0}`")]
    UnknownEstimand(String),

    #[error("unknown assumption set `{0}`")]
    UnknownAssumptions(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("every Dirichlet concentration parameter is zero")]
    AllZeroAlpha,

    #[error("numerical failure in simplex: {0}")]
    NumericalFailure(String),

    #[error("draw is infeasible under the requested assumptions")]
    InfeasibleDraw,

    #[error("estimand denominator is zero on the entire feasible region")]
    ZeroDenominator,

    #[error(
        "acceptance sampler stalled: {accepted} of {requested} draws accepted after {attempts} attempts"
    )]
    AcceptanceStalled {
        accepted: usize,
        requested: usize,
        attempts: u64,
    },

    #[error("no samples to summarize")]
    EmptySamples,

    #[error("empirical observable distribution lies outside the IV feasibility set")]
    InfeasibleAtPlugIn,

    #[error("instance too large for exact enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("complier mass is zero; the closed form is undefined")]
    ZeroComplianceMass,

    #[error("every posterior draw fell outside the feasibility set")]
    AllDrawsInfeasible,

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
