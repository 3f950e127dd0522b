use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix is degenerate")]
    Degenerate,
    #[error("Gram matrix has a non-integral entry")]
    NonIntegralGram,
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("lattice named {0:?} does not match the preset Gram matrix")]
    PresetMismatch(String),
    #[error("{0} must be integral")]
    NotIntegral(&'static str),
    #[error("{0} must be nonzero")]
    Zero(&'static str),
    #[error("matrix is not an isometry of the lattice")]
    NotIsometry,
    #[error("group {group} needs {needs}")]
    IncompatibleGroup { group: String, needs: &'static str },
    #[error("{0} is isotropic")]
    Isotropic(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("norms differ: {0} vs {1}")]
    NormMismatch(String, String),
    #[error("divisibilities differ: {0} vs {1}")]
    DivisibilityMismatch(String, String),
    #[error("discriminant classes differ")]
    DiscClassMismatch,
    #[error("lattice has no documented U+U frame")]
    NoHyperbolicPlanes,
    #[error("lattice has no distinguished delta summand")]
    NoDelta,
    #[error("L-component is not primitive")]
    NonPrimitiveLambda,
    #[error("L-component is isotropic")]
    IsotropicLambda,
    #[error("isometry reverses the orientation of the positive cone")]
    OrientationReversing,
    #[error("operator is not degree-reversing")]
    NotDegreeReversing,
    #[error("operator is neither graded nor anti-graded")]
    NotGraded,
    #[error("map does not conjugate the symmetric-power representations: {0}")]
    NotConjugating(String),
    #[error("image of an isotropic power is not a pure power")]
    NotDecomposable,
    #[error("scalars could not be resolved consistently")]
    ScalarInconsistency,
    #[error("tau is not special orthogonal here (even-dimensional space with even n)")]
    EvenDimensionalGuard,
    #[error("no rational hyperbolic pair available for this space")]
    NoIsotropicFrame,
    #[error("bad norm: {0}")]
    BadNorm(String),
    #[error("bad divisibility: {0}")]
    BadDivisibility(String),
    #[error("g is not a certified monodromy operator")]
    BadMonodromy,
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable identifier used in JSON error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotSymmetric => "NotSymmetric",
            Error::Degenerate => "Degenerate",
            Error::NonIntegralGram => "NonIntegralGram",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::PresetMismatch(_) => "PresetMismatch",
            Error::NotIntegral(_) => "NotIntegral",
            Error::Zero(_) => "Zero",
            Error::NotIsometry => "NotIsometry",
            Error::IncompatibleGroup { .. } => "IncompatibleGroup",
            Error::Isotropic(_) => "Isotropic",
            Error::Precondition(_) => "Precondition",
            Error::NormMismatch(..) => "NormMismatch",
            Error::DivisibilityMismatch(..) => "DivisibilityMismatch",
            Error::DiscClassMismatch => "DiscClassMismatch",
            Error::NoHyperbolicPlanes => "NoHyperbolicPlanes",
            Error::NoDelta => "NoDelta",
            Error::NonPrimitiveLambda => "NonPrimitiveLambda",
            Error::IsotropicLambda => "IsotropicLambda",
            Error::OrientationReversing => "OrientationReversing",
            Error::NotDegreeReversing => "NotDegreeReversing",
            Error::NotGraded => "NotGraded",
            Error::NotConjugating(_) => "NotConjugating",
            Error::NotDecomposable => "NotDecomposable",
            Error::ScalarInconsistency => "ScalarInconsistency",
            Error::EvenDimensionalGuard => "EvenDimensionalGuard",
            Error::NoIsotropicFrame => "NoIsotropicFrame",
            Error::BadNorm(_) => "BadNorm",
            Error::BadDivisibility(_) => "BadDivisibility",
            Error::BadMonodromy => "BadMonodromy",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::Internal(_) => "Internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
