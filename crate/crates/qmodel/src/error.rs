use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("Gram matrix numerically rank-deficient: {0}; merge states further or lower L")]
    RankDeficientGram(String),

    #[error("degenerate tomography: Gram matrix condition number {cond:.3e} exceeds 1e8")]
    DegenerateTomography { cond: f64 },

    #[error("target outside basis span: residual {residual:.3e} at entry ({row},{col})")]
    SpanDeficiency { residual: f64, row: usize, col: usize },

    #[error("singular linear system: {0}")]
    SingularMatrix(String),

    #[error("unphysical state: probability violation {violation:.3e}")]
    UnphysicalState { violation: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("zero-probability outcome makes the fidelity perturbation undefined (outcome {0})")]
    ZeroProbabilityOutcome(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    StageFailure { stage: String, source: Box<Error> },

    #[error("missing stage output: {0}")]
    MissingStageData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code per the interface contract: 1 for validation
    /// problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyInput(_)
            | Error::InsufficientData(_)
            | Error::DimensionMismatch(_)
            | Error::Config(_)
            | Error::MissingStageData(_)
            | Error::InvalidDistribution(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::StageFailure { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
