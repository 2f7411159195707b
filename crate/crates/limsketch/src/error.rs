use thiserror::Error;

use crate::graph::{EdgeId, ObjectId};

/// Errors shared by every layer of the library.
///
/// Bounded-search outcomes (`Diverged`, `Unknown`) are *values*, not errors;
/// see [`crate::Bounded`] and [`crate::word::EqVerdict`]. An `Error` always
/// means the input itself was ill-formed.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(ObjectId),

    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),

    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(ObjectId),

    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(EdgeId),

    #[error("identity edge id `{0}` collides with an existing edge")]
    IdentityCollision(EdgeId),

    #[error("path is not composable: edge `{edge}` expects source `{expected}`, found `{found}`")]
    NotComposable {
        edge: EdgeId,
        expected: ObjectId,
        found: ObjectId,
    },

    #[error("paths are not parallel: ({0} -> {1}) vs ({2} -> {3})")]
    NotParallel(ObjectId, ObjectId, ObjectId, ObjectId),

    #[error("unsupported pushout shape: {0}")]
    UnsupportedPushout(String),

    #[error("map is not defined on {0}")]
    PartialMap(String),

    #[error("unknown cone index {0}")]
    UnknownCone(usize),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with a short phrase saying which construction it came from.
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
