use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] wearcast_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error("checkpoint {}: {kind}", path.display())]
    Checkpoint { path: PathBuf, kind: CheckpointError },
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a wearcast checkpoint")]
    BadMagic,
    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("file is truncated")]
    Truncated,
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("configuration digest does not match the header")]
    Digest,
    #[error("malformed contents: {0}")]
    Malformed(String),
}

/// Process exit statuses of the `sole` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const DIVERGENCE: i32 = 4;
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use wearcast_core::Error as Core;
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::Core(Core::Config(_) | Core::Delta(_) | Core::InvalidArgument(_)) => exit::USAGE,
            Error::Core(Core::Divergence(_)) => exit::DIVERGENCE,
            Error::Io { .. } | Error::Format { .. } | Error::Checkpoint { .. } => exit::IO,
            Error::Core(_) => exit::OTHER,
        }
    }
}
