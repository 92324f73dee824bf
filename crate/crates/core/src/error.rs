use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("Gram matrix is numerically singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    SingularGram { min_eigenvalue: f64 },

    #[error("matrix is singular (pivot {pivot:.3e} at column {column})")]
    Singular { pivot: f64, column: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("Cayley transform undefined: 1 lies in the spectrum (pivot {pivot:.3e})")]
    CayleyPole { pivot: f64 },

    #[error("operator class mismatch: {0}")]
    Class(String),

    #[error("Laplace integral diverges: lambda {lambda} does not exceed w {w}")]
    DivergentIntegral { lambda: f64, w: f64 },

    #[error("point {modulus} is too close to the unit circle for interior evaluation")]
    BoundaryEvaluation { modulus: f64 },

    #[error("evaluation at the pole z = 1")]
    PoleAtOne,

    #[error("point is not unimodular (|zeta| = {modulus})")]
    NotUnimodular { modulus: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
