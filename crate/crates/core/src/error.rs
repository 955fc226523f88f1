use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure carries enough context (a point, a pair or a triple) to
/// reproduce it in isolation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance matrix is not symmetric at ({x}, {y}): {dxy} vs {dyx}")]
    AsymmetricMatrix { x: String, y: String, dxy: f64, dyx: f64 },
    #[error("triangle inequality fails: d({x},{z}) = {dxz} > d({x},{y}) + d({y},{z}) = {via}")]
    TriangleViolation { x: String, y: String, z: String, dxz: f64, via: f64 },
    #[error("graph is disconnected: no path from {x} to {y}")]
    DisconnectedGraph { x: String, y: String },
    #[error("duplicate point identifier {0}")]
    DuplicateId(String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("unknown cover index {0}")]
    UnknownIndex(String),
    #[error("space was not loaded from Euclidean coordinates")]
    NotEuclidean,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("negative or non-finite parameter {name} = {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("weights do not sum to 1 (sum = {0})")]
    NotNormalized(f64),
    #[error("carrier {carrier:?} of the value at {point} is not a simplex of the target")]
    NotASimplex { point: String, carrier: Vec<String> },
    #[error("point {0} is not covered")]
    UncoveredPoint(String),
    #[error("family is not a cover: point {0} lies in no element")]
    NotACover(String),
    #[error("epsilon {0} outside (0, 2]")]
    EpsOutOfRange(f64),
    #[error("Lebesgue lower bound degenerates: (n+1)*C = {0} >= 1")]
    BoundDegenerate(f64),
    #[error("cover has zero Lebesgue number")]
    ZeroLebesgue,
    #[error("distortion bound violated on ({x}, {y}): d_X = {dx} <= {r} but d_Y = {dy} > {s}")]
    DistortionViolated { x: String, y: String, dx: f64, dy: f64, r: f64, s: f64 },
    #[error("map fails ({r}, {eps}) variation on ({x}, {y}): l1 = {l1}")]
    PreconditionVariation { x: String, y: String, r: f64, eps: f64, l1: f64 },
    #[error("point {point} of A is not mapped into the {n}-skeleton (carrier size {size})")]
    ANotInSkeleton { point: String, n: usize, size: usize },
    #[error("precondition {clause} failed: {detail}")]
    Precondition { clause: &'static str, detail: String },
    #[error("cover element {element} fits in no star preimage")]
    NoAssignableVertex { element: String },
    #[error("no schedule with k <= {k_limit}; blocking inequality {blocking}")]
    ScheduleNotFound { k_limit: u64, blocking: String },
    #[error("verification {clause} failed: {witness}")]
    VerificationFailed { clause: String, witness: String },
    #[error("symmetric difference ratio {ratio} >= {bound} on ({x}, {y})")]
    RatioPreconditionFailed { x: String, y: String, ratio: f64, bound: f64 },
    #[error("parameter constraint {0} fails")]
    ParameterConstraintFailed(String),
    #[error("ball around {center} has {size} points, more than M = {m}")]
    BallTooBig { center: String, size: usize, m: usize },
    #[error("set C_{0} is empty")]
    EmptyCx(String),
    #[error("set entry refers to a point outside the space: {0}")]
    ForeignPoint(String),
    #[error("family does not sum to 1 at {point} (sum = {sum})")]
    NotPartition { point: String, sum: f64 },
    #[error("support of {vertex} has diameter {diameter} > {bound}")]
    SupportTooBig { vertex: String, diameter: f64, bound: f64 },
    #[error("variation {l1} >= {eps} on ({x}, {y})")]
    VariationFailed { x: String, y: String, l1: f64, eps: f64 },
    #[error("(n+1)*delta = {0} >= 1: no positive induced scale")]
    DeltaTooLarge(f64),
    #[error("value at {point} has {size} vertices, outside the {n}-skeleton")]
    NotInSkeleton { point: String, n: usize, size: usize },
    #[error("map is not ({lambda}, {c})-Lipschitz on ({x}, {y})")]
    LipschitzFailed { x: String, y: String, lambda: f64, c: f64 },
    #[error("JSON: {0}")]
    Json(String),
    #[error("I/O: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AsymmetricMatrix { .. } => "ASYMMETRIC_MATRIX",
            Error::TriangleViolation { .. } => "TRIANGLE_VIOLATION",
            Error::DisconnectedGraph { .. } => "DISCONNECTED_GRAPH",
            Error::DuplicateId(_) => "DUPLICATE_ID",
            Error::UnknownPoint(_) => "UNKNOWN_POINT",
            Error::UnknownIndex(_) => "UNKNOWN_INDEX",
            Error::NotEuclidean => "NOT_EUCLIDEAN",
            Error::Malformed(_) => "MALFORMED",
            Error::BadParameter { .. } => "BAD_PARAMETER",
            Error::NotNormalized(_) => "NOT_NORMALIZED",
            Error::NotASimplex { .. } => "NOT_A_SIMPLEX",
            Error::UncoveredPoint(_) => "UNCOVERED_POINT",
            Error::NotACover(_) => "NOT_A_COVER",
            Error::EpsOutOfRange(_) => "EPS_OUT_OF_RANGE",
            Error::BoundDegenerate(_) => "BOUND_DEGENERATE",
            Error::ZeroLebesgue => "ZERO_LEBESGUE",
            Error::DistortionViolated { .. } => "DISTORTION_VIOLATED",
            Error::PreconditionVariation { .. } => "PRECONDITION_VARIATION",
            Error::ANotInSkeleton { .. } => "A_NOT_IN_SKELETON",
            Error::Precondition { .. } => "PRECONDITION_FAILED",
            Error::NoAssignableVertex { .. } => "NO_ASSIGNABLE_VERTEX",
            Error::ScheduleNotFound { .. } => "SCHEDULE_NOT_FOUND",
            Error::VerificationFailed { .. } => "VERIFICATION_FAILED",
            Error::RatioPreconditionFailed { .. } => "RATIO_PRECONDITION_FAILED",
            Error::ParameterConstraintFailed(_) => "PARAMETER_CONSTRAINT_FAILED",
            Error::BallTooBig { .. } => "BALL_TOO_BIG",
            Error::EmptyCx(_) => "EMPTY_CX",
            Error::ForeignPoint(_) => "FOREIGN_POINT",
            Error::NotPartition { .. } => "NOT_PARTITION",
            Error::SupportTooBig { .. } => "SUPPORT_TOO_BIG",
            Error::VariationFailed { .. } => "VARIATION_FAILED",
            Error::DeltaTooLarge(_) => "DELTA_TOO_LARGE",
            Error::NotInSkeleton { .. } => "NOT_IN_SKELETON",
            Error::LipschitzFailed { .. } => "LIPSCHITZ_FAILED",
            Error::Json(_) => "JSON",
            Error::Io(_) => "IO",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn require_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::BadParameter { name, value });
    }
    Ok(())
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value <= 0.0 {
        return Err(Error::BadParameter { name, value });
    }
    Ok(())
}
