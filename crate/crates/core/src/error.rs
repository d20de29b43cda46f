use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("wall violation: level {level} position {y} below wall {wall}")]
    WallViolation { level: usize, y: i64, wall: i64 },
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("quadrature did not converge after {nodes} nodes (last change {change:e})")]
    NonConvergence { nodes: usize, change: f64 },
    #[error("imaginary residue {residue:e} exceeds tolerance")]
    ImaginaryResidue { residue: f64 },
    #[error("point outside the liquid region: {0}")]
    OutOfDomain(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("insufficient runs: {0}")]
    InsufficientRuns(String),
}

pub type Result<T> = std::result::Result<T, Error>;
