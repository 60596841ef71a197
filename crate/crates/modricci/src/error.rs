use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model spec: field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("evaluation at distance {distance:e} from the singular point is below eps_min {eps_min:e}")]
    SingularEvaluation { distance: f64, eps_min: f64 },

    #[error("finite-difference step {h:e} is below the cancellation guard {min:e}")]
    StepTooSmall { h: f64, min: f64 },

    #[error("radius {radius} reaches the cut locus at {cut}")]
    CutLocusReached { radius: f64, cut: f64 },

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("unsupported combination: {0}")]
    UnsupportedKind(String),

    #[error("exponent q = {q} outside the admissible range (0, {limit})")]
    ExponentOutOfRange { q: f64, limit: f64 },

    #[error("gamma = {gamma} must be below the dimension {n}")]
    GammaTooLarge { gamma: f64, n: usize },

    #[error("radius {r} exceeds the threshold r0 = {r0}")]
    RadiusAboveThreshold { r: f64, r0: f64 },

    #[error("dimension {n} unsupported: {reason}")]
    UnsupportedDimension { n: usize, reason: &'static str },

    #[error("time stepping unstable: {0}")]
    StabilityFailure(String),

    #[error("far-field truncation too tight: mass leak {leak:e} exceeds {tol:e}")]
    TruncationTooTight { leak: f64, tol: f64 },

    #[error("cover needs {n} balls, above the admissible bound {bound}")]
    CoverTooLarge { n: usize, bound: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("dimension {n} too low for this operation")]
    DimensionTooLow { n: usize },

    #[error("equation residual {residual:e} exceeds {tol:e}")]
    EquationResidualTooLarge { residual: f64, tol: f64 },

    #[error("minimal geodesic between the points is not unique")]
    GeodesicAmbiguous,

    #[error("endpoints too close: d(q+, q-) = {0}")]
    EndpointsTooClose(f64),

    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("config error at line {line}, field `{field}`: {msg}")]
    ConfigParse { line: usize, field: String, msg: String },

    #[error("unknown model `{0}`")]
    ModelUnknown(String),

    #[error("unknown certificate kind `{0}`")]
    UnknownKind(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Whether this error stems from numerics rather than user input.
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::InvalidSpec { .. }
                | Error::ConfigParse { .. }
                | Error::ModelUnknown(_)
                | Error::UnknownKind(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
