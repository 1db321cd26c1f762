use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dilation part must be positive and finite, got b = {0}")]
    NonPositiveDilation(f64),
    #[error("point is not in the upper half plane: im = {0}")]
    NotInUpperHalfPlane(f64),
    #[error("invalid torus configuration: {0}")]
    InvalidTorus(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid analytic function: {0}")]
    InvalidFunction(String),
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("support margin violated: support radius {radius} / dilation {b} exceeds window {window}")]
    SupportMargin { radius: f64, b: f64, window: f64 },
    #[error("function does not decay at the edge of the v-window (relative edge value {0:e})")]
    EdgeNotDecayed(f64),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("closed-form derivative unavailable: {0}")]
    DerivativeUnavailable(String),
    #[error("dimension m = {m} unsupported: {reason}")]
    UnsupportedDimension { m: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
