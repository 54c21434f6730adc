use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the chart box (margin {margin})")]
    PointOutsideChart { point: Vec<f64>, margin: f64 },
    #[error("metric is not invertible at {point:?}: |det g| = {det:e}")]
    NonInvertibleMetric { point: Vec<f64>, det: f64 },
    #[error("the two vectors do not span a plane (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },
    #[error("immersion has rank < 2 at {point:?}")]
    DegenerateImmersion { point: Vec<f64> },
    #[error("shape operator is degenerate at {point:?}: |det B| = {det:e}")]
    DegenerateShapeOperator { point: Vec<f64>, det: f64 },
    #[error("invalid pinching constants: {0}")]
    InvalidPinching(String),
    #[error("point {point:?} is not hyperbolic: det B = {det:e}")]
    NonHyperbolicPoint { point: Vec<f64>, det: f64 },
    #[error("curve left the patch at s = {s}")]
    LeftPatch { s: f64 },
    #[error("operation needs an immersed or conjugate connection, not an abstract one")]
    ModeUnsupported,
    #[error("geodesic curvature is undefined at an endpoint sample")]
    EndpointSample,
    #[error("region boundary does not close: gap {gap:e}")]
    OpenBoundary { gap: f64 },
    #[error("profile bound violated: |u| = {value} exceeds {bound}")]
    BoundViolated { value: f64, bound: f64 },
    #[error("no zero of y before s = {limit}")]
    NoCrossing { limit: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("det H must be negative, found {det:e} at {point:?}")]
    WrongSignDeterminant { point: Vec<f64>, det: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
