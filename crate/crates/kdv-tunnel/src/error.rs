use thiserror::Error;

/// Every failure the crate can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("degenerate state: {0}")]
    Degenerate(&'static str),

    #[error("singular parameter: {0}")]
    Singular(&'static str),

    #[error("quadrature did not converge for {integrand} (error estimate {estimate:e})")]
    Quadrature { integrand: &'static str, estimate: f64 },

    #[error("root bracketing failed: {0}")]
    Bracket(&'static str),

    #[error("amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),

    #[error("soliton cannot be transmitted: outgoing amplitude {a_out} <= 0")]
    NonTransmissible { a_out: f64 },

    #[error("inadmissible background: 4*ubar - q = {value} <= 0")]
    InadmissibleBackground { value: f64 },

    #[error("trajectory plan inconsistent: {0}")]
    InconsistentPlan(String),

    #[error("grid invalid: {0}")]
    Grid(String),

    #[error("geometry does not fit grid: {0}")]
    Geometry(String),

    #[error("solver blew up at t = {t}: max|u| = {max_abs}")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("no peak found near x = {hint} at t = {t}")]
    NoPeak { t: f64, hint: f64 },

    #[error("ambiguous peak near x = {hint} at t = {t}")]
    Ambiguous { t: f64, hint: f64 },

    #[error("post-interaction track too short: {0}")]
    InsufficientTail(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("report is empty")]
    EmptyReport,

    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
