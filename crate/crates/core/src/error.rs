use thiserror::Error;

/// Errors raised by the optimizer, the interpolation models and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("cannot extend a basis that already spans the ambient space (d = {d})")]
    CannotExtend { d: usize },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("interpolation set is not poised (condition estimate {condition:e})")]
    NotPoised { condition: f64 },

    #[error("malformed interpolation layout: {0}")]
    Layout(String),

    #[error("new interpolation coordinate {zeta} violates 0 < |zeta| <= {radius}")]
    RadiusViolation { zeta: f64, radius: f64 },

    #[error("invalid optimizer configuration: {0}")]
    Config(String),

    #[error("state vector is not normalized (norm^2 = {0})")]
    Unnormalized(f64),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("oracle evaluation failed: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
