use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions p={p}, n={n}: both must be at least 3")]
    InvalidDims { p: u32, n: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value while evaluating {what} at w={w}")]
    Evaluation { what: String, w: f64 },

    #[error("g(w) = 0 at w={w}; use delta() which is defined at zeros of g")]
    ZeroPerturbation { w: f64 },

    #[error(
        "quadrature did not converge after {levels} levels: \
         estimate {estimate:e}, error estimate {error_estimate:e}"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error_estimate: f64,
        levels: u32,
    },

    #[error("construction of dominating perturbation failed: {0}")]
    ConstructionFailed(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("unsupported prior: {0}")]
    UnsupportedPrior(String),

    #[error("cannot parse shrinkage spec {input:?}: {reason}")]
    ParseSpec { input: String, reason: String },
}
