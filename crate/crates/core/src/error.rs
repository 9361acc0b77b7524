use num_complex::Complex64;
use thiserror::Error;

use crate::tensor::TensorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NfgError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("capacity error: {what} needs {required} but the limit is {limit}")]
    Capacity {
        what: String,
        required: u128,
        limit: u128,
    },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("degenerate belief at {0}: scaling factor is zero")]
    DegenerateBelief(String),
    #[error("loop-calculus transform inapplicable on edge {edge}: Z_e = {z_e}")]
    LctInapplicable { edge: usize, z_e: Complex64 },
    #[error("degenerate transform parameters on edge {edge}: delta_i + delta_j = 0")]
    DegenerateParameter { edge: usize },
    #[error("consistency check failed: {what} (residual {residual:e})")]
    Consistency { what: String, residual: f64 },
    #[error("count does not fit in 64 bits: {0}")]
    BigCount(String),
    #[error("mean {value} is negative and has no real root")]
    SignedRoot { value: f64 },
    #[error("sum-product algorithm did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl NfgError {
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            NfgError::Capacity { .. } | NfgError::Tensor(TensorError::Capacity { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, NfgError>;
