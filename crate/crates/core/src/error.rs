use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is singular or not positive definite (pivot {pivot})")]
    Singular { pivot: usize },
    #[error(
        "power iteration did not converge in {iterations} iterations (last estimate {estimate})"
    )]
    NoConvergence { iterations: usize, estimate: f64 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("degenerate network: node {node} has no neighbours")]
    IsolatedNode { node: usize },
    #[error(
        "oracle did not reach tolerance: certificate gap {gap:e}, feasibility {feasibility:e}"
    )]
    OracleTolerance { gap: f64, feasibility: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
