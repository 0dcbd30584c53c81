use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("identically zero on subinterval [{lo}, {hi}]")]
    IdenticallyZero { lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("solution left the bounded regime: |u| = {value} exceeds {bound}")]
    BlowUp { value: f64, bound: f64 },

    #[error("Newton iteration did not converge at t = {t} after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("step failed at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Argument(_) | Error::Json(_)
        )
    }
}
