//! Higher-rank graphs, their finite-dimensional matrix modules, the lift to
//! operator representations, classification, and moduli dimension counts.

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod degree;
pub mod error;
pub mod graph;
pub mod lift;
pub mod linalg;
pub mod module;
pub mod moduli;
pub mod path;
pub mod trees;

pub use degree::Degree;
pub use error::{Error, Result};
pub use graph::KGraph;
pub use module::{DimensionVector, MatrixModule};
pub use path::Path;
