use thiserror::Error;

pub type Result<T> = std::result::Result<T, HermError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HermError {
    #[error("dimension mismatch: axis {axis1} of left ({size1}) vs axis {axis2} of right ({size2})")]
    DimensionMismatch {
        axis1: usize,
        axis2: usize,
        size1: usize,
        size2: usize,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite entry produced by {0}")]
    NonFinite(String),
    #[error("inadmissible metric: {0}")]
    InadmissibleMetric(String),
    #[error("integrability failure: {what} defect {defect:.3e} at {at}")]
    Integrability {
        what: String,
        defect: f64,
        at: String,
    },
    #[error("invalid structure equations: {0}")]
    InvalidEquations(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inadmissible state: {0}")]
    InadmissibleState(String),
    #[error("(Cplx) violated, max violation {max_violation:.3e}")]
    CplxViolated { max_violation: f64 },
    #[error("point too close to the origin: |z| = {0}")]
    PointTooClose(f64),
    #[error("flow left admissible cone at t = {t}: {reason}")]
    ConeExit { t: f64, reason: String },
    #[error("formula transcription alarm: defect {defect:.3e} ({detail})")]
    FormulaAlarm { defect: f64, detail: String },
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}
