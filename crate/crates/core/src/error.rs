use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside the domain of {chart}: {reason}")]
    Domain { chart: &'static str, reason: String },

    #[error("non-finite function value at offset {offset:?} from the base point")]
    Evaluation { offset: Vec<f64> },

    #[error("trajectory left the admissible domain at t = {time}")]
    DomainEscape { time: f64 },

    #[error("gaussian integral diverges: Re(a) = {re_a} is not negative")]
    Divergence { re_a: f64 },

    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("algebra element is not in the abelian subalgebra spanned by F, Q, R (G, H, P = {residual:?})")]
    NotInSubalgebra { residual: [f64; 3] },

    #[error("expectation has imaginary part {imag}, operator is not hermitian here")]
    Hermiticity { imag: f64 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
