use thiserror::Error;

/// Errors raised by the geometric kernels, the solver and the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined direction: apex coincides with an endpoint")]
    UndefinedDirection,
    #[error("no comparison triangle: perimeter {perimeter} is not below 2·D_κ")]
    NoComparisonTriangle { perimeter: f64 },
    #[error("non-unique geodesic between antipodal points")]
    NonUniqueGeodesic,
    #[error("invalid triangle shape: {0}")]
    InvalidShape(String),
    #[error("genus must be at least 2, got {0}")]
    InvalidGenus(usize),
    #[error("not a length function: face {face} violates the triangle inequality by {excess}")]
    NotALengthFunction { face: usize, excess: f64 },
    #[error("points or isometries belong to different targets")]
    MixedTargets,
    #[error("degenerate chart: face {0} is flat")]
    DegenerateChart(usize),
    #[error("relator check failed: {0}")]
    RelatorCheck(String),
    #[error("no admissible epsilon after {steps} halvings (last margin {last_margin})")]
    NoAdmissibleEpsilon { steps: usize, last_margin: f64 },
    #[error("majorization requires perimeter < 2 D_κ, got {0}")]
    PerimeterTooLong(f64),
    #[error("no angle to cut at vertex {0}")]
    NoAngle(usize),
    #[error("position {s} out of range [0, {max}]")]
    OutOfRange { s: f64, max: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;
