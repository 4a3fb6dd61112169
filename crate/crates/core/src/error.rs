use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (relative anti-Hermitian part {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("outcome {outcome} has zero probability")]
    ZeroProbabilityOutcome { outcome: usize },
    #[error("measurement is not perfectly retrodictable (residual {residual:.3e})")]
    NotPerfectlyRetrodictable { residual: f64 },
    #[error("measurement is not fine-grained")]
    NotFineGrained,
    #[error("{outcomes} outcomes cannot be perfectly retrodicted in a {d_out}-dimensional output space")]
    TooManyOutcomes { outcomes: usize, d_out: usize },
    #[error("bad basis: {0}")]
    BadBasis(String),
    #[error("|mu| must lie strictly between 0 and 1 (got {0})")]
    BadMu(f64),
    #[error("states are linearly dependent and cannot be unambiguously discriminated")]
    LinearlyDependentStates,
    #[error("post-measurement states are linearly dependent (rank {rank} < {outcomes})")]
    DependentFinalStates { rank: usize, outcomes: usize },
    #[error("operator {index} is not unitary (residual {residual:.3e})")]
    NonUnitaryInput { index: usize, residual: f64 },
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotSquare { .. } => "not_square",
            Self::NotHermitian { .. } => "not_hermitian",
            Self::NotPsd { .. } => "not_psd",
            Self::DimensionMismatch(_) => "dimension_mismatch",
            Self::ShapeMismatch(_) => "shape_mismatch",
            Self::NonFinite => "non_finite",
            Self::InvalidTolerance(_) => "invalid_tolerance",
            Self::InvalidMeasurement(_) => "invalid_measurement",
            Self::InvalidPovm(_) => "invalid_povm",
            Self::InvalidState(_) => "invalid_state",
            Self::ZeroProbabilityOutcome { .. } => "zero_probability_outcome",
            Self::NotPerfectlyRetrodictable { .. } => "not_perfectly_retrodictable",
            Self::NotFineGrained => "not_fine_grained",
            Self::TooManyOutcomes { .. } => "too_many_outcomes",
            Self::BadBasis(_) => "bad_basis",
            Self::BadMu(_) => "bad_mu",
            Self::LinearlyDependentStates => "linearly_dependent_states",
            Self::DependentFinalStates { .. } => "dependent_final_states",
            Self::NonUnitaryInput { .. } => "non_unitary_input",
            Self::InvalidPriors(_) => "invalid_priors",
        }
    }

    /// Whether the error is a negative verdict rather than bad input.
    pub fn is_verdict(&self) -> bool {
        matches!(
            self,
            Self::TooManyOutcomes { .. }
                | Self::NotPerfectlyRetrodictable { .. }
                | Self::DependentFinalStates { .. }
                | Self::LinearlyDependentStates
                | Self::ZeroProbabilityOutcome { .. }
        )
    }
}
