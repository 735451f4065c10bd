use std::path::PathBuf;

use dirtask_core::eval::IncompleteCell;
use dirtask_core::extract::ExtractError;
use dirtask_core::forge::{BackendError, ForgeError, SelectError};
use dirtask_core::pddl::{EmitError, PddlError};
use dirtask_core::scenario::{ScenarioError, Unrealizable};
use dirtask_core::search::{ImportError, NoPlan};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Unrealizable(#[from] Unrealizable),
    #[error("{path}: {source}")]
    Pddl {
        path: PathBuf,
        #[source]
        source: PddlError,
    },
    #[error(transparent)]
    NoPlan(#[from] NoPlan),
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Incomplete(#[from] IncompleteCell),
}

impl From<EmitError> for Error {
    fn from(e: EmitError) -> Self {
        match e {
            EmitError::Invalid(e) => Error::Scenario(e),
            EmitError::Unrealizable(e) => Error::Unrealizable(e),
        }
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit status. 1 is the catch-all.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Scenario(_) | Error::Unrealizable(_) => 3,
            Error::NoPlan(_) | Error::Extract(ExtractError::NoPlan) => 4,
            Error::Backend(_) | Error::Forge(ForgeError::Backend(_)) => 5,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
