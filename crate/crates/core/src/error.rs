use alloc::string::String;

use crate::constraints::StructureClass;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed group structure (bad index, empty group, ...).
    #[error("malformed group structure: {0}")]
    Structure(String),
    #[error("operation requires a {expected} structure, got {found}")]
    StructureClass {
        expected: StructureClass,
        found: StructureClass,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("instance too large for exhaustive enumeration: k = {k} > {max}")]
    TooLarge { k: usize, max: usize },
    #[error("polytope has a single vertex; the vertex gap is undefined")]
    DegeneratePolytope,
    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("dataset error: {0}")]
    Dataset(String),
}
