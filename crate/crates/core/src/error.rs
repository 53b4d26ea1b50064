use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fractional order a = {0} is outside [0, 4)")]
    OrderOutOfRange(f64),
    #[error("order a = {0} is a delta branch (theta = j*pi); no pointwise kernel")]
    DegenerateOrder(f64),
    #[error("order a = {a}: |sin theta| = {sin:e} is below the fast-path guard")]
    NearSingularOrder { a: f64, sin: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("frequency {0} is too close to zero")]
    ZeroFrequency(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid window parameters: {0}")]
    InvalidWindow(String),
    #[error("integration radius {radius} below required {required}")]
    InsufficientRadius { radius: f64, required: f64 },
    #[error("interval ({first}, {last}) invalid on a grid of {count} points")]
    BadInterval { first: usize, last: usize, count: usize },
    #[error("interval family is empty")]
    EmptyFamily,
    #[error("scale {scale} is not resolvable on step {step} (need >= 2 steps)")]
    UnresolvableScale { scale: f64, step: f64 },
    #[error("weight `{name}` is not positive at x = {x}")]
    NonpositiveWeight { name: String, x: f64 },
    #[error("exponent p = {0} must be >= 1")]
    BadExponent(f64),
    #[error("input has negative samples: {0}")]
    NegativeInput(String),
    #[error("weight `{name}` failed its tempered certificate (worst ratio {worst_ratio})")]
    WeightCertificateFailed { name: String, worst_ratio: f64 },
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
