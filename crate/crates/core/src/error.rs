use std::path::PathBuf;

use thiserror::Error;

use crate::fem::FemError;
use crate::mesh::MeshError;

/// Invalid physical or numerical parameter.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter: {0}")]
pub struct ParamError(pub String);

impl ParamError {
    pub fn new(msg: impl Into<String>) -> Self {
        ParamError(msg.into())
    }
}

/// A time step that could not be accepted. The driver answers these by
/// halving the step size.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepRejection {
    #[error("linear solve failed: {0}")]
    Solver(#[from] FemError),
    #[error("free chloride undershoot {value:.3e} mol/m3 at node {node}")]
    NegativeConcentration { node: usize, value: f64 },
    #[error("phase-field Newton did not converge (residual {residual:.3e} after {iterations} iterations)")]
    PhaseFieldDivergence { iterations: usize, residual: f64 },
    #[error("phase field decreased at node {node} ({before} -> {after})")]
    Irreversibility { node: usize, before: f64, after: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("run card: {0}")]
    Card(String),
    #[error("numerical abort at t = {time:.6e} s: {reason}")]
    Abort { time: f64, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("refusing to write {path}: {reason}")]
    Output { path: PathBuf, reason: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
