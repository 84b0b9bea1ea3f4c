use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input to a constructor or operation (precondition violated).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration rejected during validation. `line` is the 1-based
    /// line of the offending key when the config came from a file.
    #[error("{}", fmt_validation(.line, .message))]
    Validation { line: Option<usize>, message: String },

    /// The selected solver's declared step-size bound is violated.
    #[error("stability bound violated: {bound} (dt = {dt:e}, limit = {limit:e})")]
    Stability { bound: String, dt: f64, limit: f64 },

    /// NaN or Inf detected in a field during time stepping.
    #[error("non-finite value in {field} at t = {time}")]
    NonFinite { field: String, time: f64 },

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The control field is too weak for the requested tier.
    #[error("control field G = {g:e} below threshold {threshold:e} at t = {time}; use the analytic or full tier")]
    StoppedLight { g: f64, threshold: f64, time: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Format(String),
}

fn fmt_validation(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("validation error (line {l}): {message}"),
        None => format!("validation error: {message}"),
    }
}

impl Error {
    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation { line: None, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
