use thiserror::Error;

/// Errors raised by constructions in this crate.
///
/// Property violations found by the `verify_*` routines are not errors; they
/// are reported as data in a [`crate::report::Report`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("truncation order mismatch: {0} vs {1}")]
    ContextMismatch(usize, usize),
    #[error("series with zero constant term is not a unit")]
    NotUnit,
    #[error("phase-space signature mismatch")]
    SignatureMismatch,
    #[error("star product rule {rule} is not defined on {signature} signatures")]
    RuleSignature { rule: String, signature: String },
    #[error("elements belong to different algebras")]
    ParentMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degree cap {cap} exceeded (degree {degree})")]
    DegreeCapExceeded { cap: u32, degree: u32 },
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("functional is not positive")]
    NotPositiveFunctional,
    #[error("operator is not adjointable: {0}")]
    NotAdjointable(String),
    #[error("inner product is not strongly nondegenerate")]
    NotStronglyNondegenerate,
    #[error("complete positivity check failed: {0}")]
    CpCheckFailed(String),
    #[error("inner products are not full: {0}")]
    NotFull(String),
    #[error("module is degenerate")]
    Degenerate,
    #[error("unsupported functional shape: {0}")]
    UnsupportedFunctionalShape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("element is not in the module (Px != x)")]
    NotInModule,
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
