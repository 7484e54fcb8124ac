use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("axis {axis} out of range for an order-{order} tensor")]
    Axis { axis: usize, order: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("point is not stationary: Riemannian gradient norm {0:.3e} exceeds the gate")]
    NotStationary(f64),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
