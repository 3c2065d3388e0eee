use crate::symbolic::{Binding, Expr, ExprError};

/// Failures of the analysis pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid model: {0}")]
    Validation(String),
    #[error("unsupported Lagrangian: {0}")]
    UnsupportedLagrangian(String),
    #[error("rank of {matrix} is not constant: {detail}")]
    NonConstantRank { matrix: &'static str, detail: String },
    #[error("leading minor is singular")]
    SingularMinor,
    #[error("nondynamical condition violated: d({target})/d({velocity}) = {derivative} is not zero")]
    NondynamicalViolation { target: String, velocity: String, derivative: Expr },
    #[error("the linear system for noncanonical velocities is inconsistent")]
    InconsistentSystem,
    #[error("Dirac bracket requires an invertible constraint matrix (second-class constraints)")]
    SecondClassRequired,
    #[error("no reference solution registered for `{0}`")]
    NoOracle(String),
    #[error("integration produced a non-finite value at step {step} (t = {t})")]
    StepFailure { step: usize, t: f64, last_good: Vec<f64> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("correspondence check `{check}` failed")]
    CorrespondenceFailure { check: &'static str, witness: Binding },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status for command-line front ends: 1 for model-level
    /// rejections, 2 for failed verification, 3 for unreadable input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Expr(ExprError::Syntax { .. } | ExprError::UnknownSymbol(_)) | Error::Validation(_) | Error::Config(_) => 3,
            Error::CorrespondenceFailure { .. } => 2,
            _ => 1,
        }
    }
}
