use std::fmt;

/// Why a run stopped short of writing a passing summary.
#[derive(Debug)]
pub enum CliError {
    /// The spec or flags could not be turned into a run.
    Spec(String),
    /// The library aborted mid-run.
    Abort { period: Option<usize>, message: String },
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Abort { .. } | CliError::Io(_) => 3,
        }
    }

    pub fn spec(msg: impl Into<String>) -> Self {
        CliError::Spec(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Spec(m) => write!(f, "malformed spec: {m}"),
            CliError::Abort { period: Some(p), message } => write!(f, "aborted at period {p}: {message}"),
            CliError::Abort { period: None, message } => write!(f, "aborted: {message}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Library errors raised while setting a run up mean the spec asked for
/// something the library rejects.
pub fn setup(e: smoothcal::Error) -> CliError {
    CliError::Spec(e.to_string())
}

/// Library errors raised while a run is in progress.
pub fn abort(e: smoothcal::Error) -> CliError {
    CliError::Abort { period: e.period(), message: e.to_string() }
}

pub type CliResult<T> = Result<T, CliError>;

/// Like [`abort`], tagging errors that carry no period with `t`.
pub fn abort_at(e: smoothcal::Error, t: usize) -> CliError {
    CliError::Abort { period: e.period().or(Some(t)), message: e.to_string() }
}
