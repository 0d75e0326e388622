use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PptoError {
    #[error("prevalence fractions must be in [0, 1] and sum to 1, got ({0}, {1}, {2})")]
    Prevalence(f64, f64, f64),

    #[error("invalid engine configuration: {0}")]
    Config(String),
}
