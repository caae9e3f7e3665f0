//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of a formula
    /// (nonpositive mass, zero temperature in a thermal wavelength, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates a type invariant. `path` names the
    /// offending field with the same dotted path used in the JSON schema.
    #[error("invalid configuration at {path}: {message}")]
    Config { path: String, message: String },

    /// A state object (density matrix, covariance matrix) failed its
    /// physicality checks.
    #[error("state error: {0}")]
    State(String),

    /// A numerical procedure could not complete (bracket failure,
    /// non-monotone margin, step-size contract violation).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A bound solve found no margin crossing inside the bracket. The flag
    /// distinguishes feasible-everywhere from infeasible-everywhere.
    #[error("no crossing: configuration is {} over the whole bracket",
            if *.all_feasible { "feasible" } else { "infeasible" })]
    NoCrossing { all_feasible: bool },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
