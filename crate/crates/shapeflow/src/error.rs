use std::io;
use std::path::PathBuf;

use crate::pgm::PgmError;

/// Errors surfaced by the command-line tool, each tied to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Pgm {
        path: PathBuf,
        #[source]
        source: PgmError,
    },
    #[error("cannot read {}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Core(#[from] shapeflow_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCONSISTENT: u8 = 3;
pub const EXIT_MAX_ITERS: u8 = 4;
pub const EXIT_DEGENERATE: u8 = 5;

impl Error {
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use shapeflow_core::Error as C;
        match self {
            Error::Usage(_) | Error::Input { .. } | Error::Format { .. } | Error::Pgm { .. } => EXIT_USAGE,
            Error::Io { .. } => EXIT_IO,
            Error::Inconsistent(_) => EXIT_INCONSISTENT,
            Error::Core(e) => match e {
                C::Argument(_) | C::NonFinite(_) => EXIT_USAGE,
                C::Singular(_) | C::Discontinuity { .. } => EXIT_INCONSISTENT,
                C::DegenerateTangent { .. } | C::DegenerateGradient(_) | C::Degenerate(_) => {
                    EXIT_DEGENERATE
                }
            },
        }
    }
}
