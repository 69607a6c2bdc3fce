use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate Möbius map: |ad - bc| = {det_abs:.3e}")]
    DegenerateMobius { det_abs: f64 },

    #[error("circle radius must be positive, got {radius}")]
    NonPositiveRadius { radius: f64 },

    #[error("invalid circle domain: {reason}")]
    InvalidCircleDomain { reason: String },

    #[error("incompatible grids: {reason}")]
    GridMismatch { reason: String },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("parameter out of domain: {reason}")]
    ParameterDomain { reason: String },

    #[error("degenerate point: {reason}")]
    DegeneratePoint { reason: String },

    #[error("invalid curve: {reason}")]
    InvalidCurve { reason: String },

    #[error("invalid domain: {reason}")]
    InvalidDomain { reason: String },

    #[error("solver failure: {reason} (residual {residual:.3e})")]
    SolverFailure { reason: String, residual: f64 },

    #[error("uniformization did not converge in {iterations} sweeps (best residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("point outside domain at step {step}: {reason}")]
    OutOfDomain { step: usize, reason: String },

    #[error("precondition violated: {reason}")]
    Precondition { reason: String },

    #[error("degenerate configuration: {reason}")]
    DegenerateConfiguration { reason: String },

    #[error("numerical degeneracy: {reason}")]
    NumericalDegeneracy { reason: String },

    #[error("truncation too large: {reason}")]
    TruncationTooLarge { reason: String },

    #[error("claim check failed: {reason}")]
    ClaimFailed { reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
