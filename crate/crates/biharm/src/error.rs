use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point outside chart domain (lambda_a = {lambda_a})")]
    OutsideChart { lambda_a: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate plane: spanning vectors are linearly dependent")]
    DegeneratePlane,
    #[error("degenerate immersion: {0}")]
    Degenerate(String),
    #[error("finite-difference stencil does not fit: {0}")]
    Stencil(String),
    #[error("geodesic left the chart after arc length {reached}")]
    ChartExit { reached: f64 },
    #[error("unknown catalog case `{0}`")]
    UnknownCase(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
