use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph spec: {0}")]
    InvalidSpec(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("internal error: graph has no cycle")]
    Acyclic,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {0} must be even")]
    OddIndex(usize),
    #[error("cluster operator needs an even N, got {0}")]
    OddN(usize),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("no eigenvalue of modulus above {threshold}")]
    NoUntemperedSpectrum { threshold: f64 },
    #[error("grid resolution too low: need n_theta >= {needed}, have {have}")]
    ResolutionTooLow { needed: usize, have: usize },
    #[error("adaptive quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("invalid rotation: {0}")]
    InvalidRotation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
