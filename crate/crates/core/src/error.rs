use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("empty instance: {0}")]
    EmptyInstance(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),
}

impl Error {
    /// Rewrites the line number of a located error.
    pub(crate) fn remap_line(self, f: impl Fn(usize) -> usize) -> Error {
        match self {
            Error::Parse { line, message } => Error::Parse { line: f(line), message },
            Error::SelfLoop { line, vertex } => Error::SelfLoop { line: f(line), vertex },
            Error::DuplicateEdge { line, u, v } => Error::DuplicateEdge { line: f(line), u, v },
            Error::VertexOutOfRange { line, vertex, n } => {
                Error::VertexOutOfRange { line: f(line), vertex, n }
            }
            other => other,
        }
    }

    /// Whether this is a usage or input error (as opposed to a refusal on
    /// a valid instance).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::SelfLoop { .. }
                | Error::DuplicateEdge { .. }
                | Error::VertexOutOfRange { .. }
                | Error::Io(_)
                | Error::Usage(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
