use thiserror::Error;

use crate::stable_mc::ExitRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or series failed to meet its tolerance budget.
    #[error(
        "accuracy error in {what}: estimated error {estimate:.3e} exceeds budget {budget:.3e}"
    )]
    Accuracy {
        what: String,
        estimate: f64,
        budget: f64,
    },

    /// Two sampled objects live on incompatible grids.
    #[error("shape error: {0}")]
    Shape(String),

    /// A spectrum that should describe a real field is not conjugate symmetric.
    #[error("symmetry error: imaginary residue {residue:.3e} exceeds {limit:.3e}")]
    Symmetry { residue: f64, limit: f64 },

    /// The vertical component did not reach zero within the step budget.
    #[error("path did not exit within {steps} steps")]
    NonExit {
        steps: usize,
        record: Box<ExitRecord>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
