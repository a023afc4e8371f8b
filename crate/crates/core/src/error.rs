use thiserror::Error;

/// Errors raised by the library. Each variant maps to a stable class name
/// used by the CLI when reporting failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometric degeneracy: {0}")]
    GeometricDegeneracy(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error(
        "insufficient spectrum coverage: replicas need beta in [{need_lo}, {need_hi}], \
         base grid spans [{have_lo}, {have_hi}]"
    )]
    Coverage {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short kebab-case class name, e.g. `geometric-degeneracy`.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::GeometricDegeneracy(_) => "geometric-degeneracy",
            Error::InvalidScenario(_) => "invalid-scenario",
            Error::DegenerateChannel(_) => "degenerate-channel",
            Error::Coverage { .. } => "coverage",
            Error::InvalidSweep(_) => "invalid-sweep",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
