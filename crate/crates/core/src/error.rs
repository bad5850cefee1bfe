use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// No slot satisfies the SR (or pre-configured grant) schedule.
    #[error("unreachable-SR: no scheduling opportunity ever lands in an uplink slot")]
    UnreachableSr,

    #[error(
        "radio-underflow: r1={r1} ms, p2+p3={mac_phy} ms cannot be met with a1={a1} at S={slot} ms"
    )]
    RadioUnderflow {
        r1: f64,
        mac_phy: f64,
        a1: u32,
        slot: f64,
    },

    #[error("no-feasible-configuration: the search space has no valid configuration")]
    NoFeasibleConfiguration,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Infeasibility as opposed to a malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::UnreachableSr | Error::RadioUnderflow { .. } | Error::NoFeasibleConfiguration
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
