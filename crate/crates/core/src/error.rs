use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("trace is {trace}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("not Hermitian (max |m - m†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("map is not trace preserving (completeness defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
