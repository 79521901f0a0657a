use thiserror::Error;

/// Errors raised by the workbench operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gradient of the wave phase is singular at the zero frequency")]
    Singularity,
    #[error("empty sample set: {0}")]
    EmptySamples(String),
    #[error("no admissible pairs")]
    NoAdmissiblePairs,
    #[error("sigma solver did not converge after {steps} steps (last residual {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("aliasing window exceeded: max safe time {max_safe_time}")]
    Aliasing { max_safe_time: f64 },
    #[error("need >= {needed} {what}")]
    TooFewPoints { needed: usize, what: String },
    #[error("field type mismatch: {0}")]
    FieldType(String),
    #[error("truncation: L_max {l_max} is below 2N = {needed}")]
    Truncation { l_max: usize, needed: usize },
    #[error("projector undefined at xi = 0 with zero mass")]
    UndefinedProjector,
    #[error("modulation parameter d = {d} outside resolvable band [{lo}, {hi}]")]
    OutsideBand { d: f64, lo: f64, hi: f64 },
    #[error("scale R = {r} below threshold {min}")]
    ScaleTooSmall { r: f64, min: f64 },
    #[error("tube leaves the periodic box; enlarge the box")]
    TubeExitsBox,
    #[error("parameter regime violated: {0}")]
    Regime(String),
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("missing series: {0}")]
    MissingSeries(String),
    #[error("invalid spec:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{context}: {source}")]
    Run { context: String, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
