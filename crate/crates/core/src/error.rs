use std::path::PathBuf;

use thiserror::Error;

use crate::tensor3::Vec3;

/// Violations of a constitutive or algebraic precondition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("inverted element: det(F) = {det}")]
    InvertedElement { det: f64 },
    #[error("Poisson ratio {nu} outside (-1, 0.5)")]
    PoissonRatio { nu: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("particle {particle} at {position:?} is outside the grid interior")]
    OutOfDomain { particle: usize, position: Vec3 },
    #[error("particle {particle}: {source}")]
    Constitutive {
        particle: usize,
        #[source]
        source: DomainError,
    },
    #[error("non-finite velocity on grid node {node:?}")]
    NonFinite { node: [usize; 3] },
    #[error("CFL violated by particle {particle}: dt*|v| = {travel} > dx = {dx}")]
    Cfl { particle: usize, travel: f64, dx: f64 },
    #[error("simulation aborted at frame {frame}, substep {substep}: {source}")]
    Aborted {
        frame: usize,
        substep: usize,
        #[source]
        source: Box<SimError>,
    },
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("PLY: {0}")]
    Ply(String),
    #[error("no particles")]
    Empty,
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("trajectory shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter vector: {0}")]
    InvalidParams(String),
    #[error("evaluation failed while perturbing `{entry}`: {source}")]
    Evaluation {
        entry: String,
        #[source]
        source: Box<CalibrateError>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}
