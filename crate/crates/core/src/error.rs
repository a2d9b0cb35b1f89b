use std::path::PathBuf;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("row {row} has zero L1 norm and cannot be normalized")]
    ZeroRow { row: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edge ({u}, {v}) has an endpoint outside 0..{num_nodes}")]
    EndpointOutOfRange { u: usize, v: usize, num_nodes: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("requested {requested} negative edges but only {available} non-edges are available")]
    InsufficientNonEdges { requested: usize, available: usize },

    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Data {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn data(path: impl Into<PathBuf>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Process exit code used by the command-line tool for this error.
    ///
    /// 1 is reserved for usage errors, 2 for unreadable or inconsistent data,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Data { .. }
            | Error::Io { .. }
            | Error::EndpointOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::InsufficientNonEdges { .. } => 2,
            Error::ShapeMismatch { .. } | Error::ZeroRow { .. } | Error::NonFinite(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
