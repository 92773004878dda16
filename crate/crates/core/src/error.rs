use std::path::PathBuf;

use thiserror::Error;

use crate::solve::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed mesh: {0}")]
    MalformedMesh(String),

    #[error("facet {vertices:?} is shared by {owners} elements")]
    NonConforming { vertices: Vec<usize>, owners: usize },

    #[error("thick element {element} has |det| = {det:e} below the threshold j_min = {j_min:e}")]
    ThickBelowThreshold { element: usize, det: f64, j_min: f64 },

    #[error("interface id {0} does not exist")]
    UnknownInterface(usize),

    #[error("interface {0} has no duplicated vertex copies")]
    UnmatchedInterface(usize),

    #[error("unknown manufactured case `{0}`")]
    UnknownCase(String),

    #[error("matrix is not symmetric positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },

    #[error("zero diagonal entry in row {0}; Jacobi preconditioner undefined")]
    ZeroDiagonal(usize),

    #[error("conjugate gradients did not converge: {0}")]
    NotConverged(SolveReport),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
