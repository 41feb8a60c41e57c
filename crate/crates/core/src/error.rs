use thiserror::Error;

/// Errors raised by the simulation and optimization kernels.
///
/// `Infeasible` marks instances that cannot be solved at the requested
/// success probability; `Numerical` marks violated runtime invariants
/// (norm drift, failed saturation, level cutoff). Both are hard errors,
/// never warnings.
#[derive(Debug, Error)]
pub enum QrsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("success probability {p} outside feasible range [{p_min}, {p_max}]")]
    TargetOutOfRange { p: f64, p_min: f64, p_max: f64 },

    #[error("infeasible instance: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, QrsError>;
