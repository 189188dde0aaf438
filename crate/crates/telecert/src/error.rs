use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum TelecertError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian within tolerance")]
    NotHermitian,
    #[error("trace is {0}, expected 1")]
    NotNormalized(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPositive(f64),
    #[error("subsystem index {0} out of range")]
    SubsystemOutOfRange(usize),
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("total loss: kept trace {0} too small to renormalize")]
    TotalLoss(f64),
    #[error("assemblage shape mismatch: {0}")]
    AssemblageShape(String),
    #[error("missing correction unitary for outcome {0}")]
    MissingCorrection(String),
    #[error("missing measurement setting: {0}")]
    MissingSetting(String),
    #[error("fit did not converge after {restarts} restarts (best objective {objective})")]
    FitDidNotConverge { restarts: usize, objective: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<(), TelecertError> {
    if !(lo..=hi).contains(&value) || !value.is_finite() {
        return Err(TelecertError::ParameterOutOfRange { name, value, lo, hi });
    }
    Ok(())
}
