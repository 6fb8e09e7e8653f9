//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("edges not composable: source of `{left}` is `{left_source}` but range of `{right}` is `{right_range}`")]
    NotComposable {
        left: String,
        left_source: String,
        right: String,
        right_range: String,
    },
    #[error("vertex mismatch: s(p) = `{left_source}` but r(q) = `{right_range}`")]
    VertexMismatch {
        left_source: String,
        right_range: String,
    },
    #[error("square table has no entry for pair ({0}, {1})")]
    MissingSquare(String, String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("infeasible dimension vector: d({vertex}) = {dv} exceeds D({vertex}) = {cap}")]
    Infeasible {
        vertex: String,
        dv: usize,
        cap: usize,
    },
    #[error("modules are over different graphs")]
    GraphMismatch,
    #[error("zero-dimensional module: {0}")]
    ZeroDimension(String),
    #[error("subspace is not invariant: generator {0} leaks with residual {1:.3e}")]
    NotInvariant(String, f64),
    #[error("numerical inconsistency: {0}")]
    Inconsistency(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("truncation too large: {0} basis keys exceed the 10^6 guard")]
    TooLarge(usize),
    #[error("unknown catalog name `{0}`")]
    UnknownCatalog(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
