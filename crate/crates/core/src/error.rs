use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid time displacement: {0}")]
    Delta(String),
    #[error("model variant mismatch: expected {expected}, found {found}")]
    VariantMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("numeric divergence: {0}")]
    Divergence(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn shape(op: &'static str, expected: &[usize], actual: &[usize]) -> Self {
        Error::ShapeMismatch {
            op,
            expected: expected.to_vec(),
            actual: actual.to_vec(),
        }
    }
}
