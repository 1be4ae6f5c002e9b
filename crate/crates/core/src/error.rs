use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected} sites, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("assumption A violated: {0}")]
    AssumptionA(String),

    #[error("state space of {required} states exceeds the enumeration budget of {budget}")]
    Budget { required: u128, budget: u128 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ill-conditioned system (edge weight ratio {ratio:e}); lower beta or use the elimination backend")]
    IllConditioned { ratio: f64 },

    #[error("rate underflow at beta = {beta}: beta*dH = {exponent} exceeds the double range; use the exact solver")]
    RateUnderflow { beta: f64, exponent: f64 },

    #[error("mean hitting routes disagree: direct {direct:e}, capacity {capacity:e} (relative {relative:e})")]
    RouteDisagreement { direct: f64, capacity: f64, relative: f64 },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 2 for invalid input, 3 for budget, capacity and
    /// numerical-range failures. Status 1 is reserved for failed acceptance.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget { .. }
            | Error::NoConvergence { .. }
            | Error::IllConditioned { .. }
            | Error::RateUnderflow { .. }
            | Error::RouteDisagreement { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
