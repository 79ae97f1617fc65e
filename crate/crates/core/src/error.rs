use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// The grid does not hold enough of a function's norm.
    #[error("truncated support: captured norm {captured:.3e} ({context})")]
    Truncation { captured: f64, context: String },

    #[error("degenerate even/odd split: the {0} subset carries no weight")]
    DegenerateSplit(&'static str),

    #[error("momentum aliasing: {0}")]
    Aliasing(String),

    #[error("grid shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("grid file format: {0}")]
    Format(String),

    #[error("config {}: {reason}", config_location(*line, key))]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Line 0 marks settings that did not come from a file line.
fn config_location(line: usize, key: &str) -> String {
    if line == 0 {
        format!("key `{key}`")
    } else {
        format!("line {line}, key `{key}`")
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than an internal fault.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
