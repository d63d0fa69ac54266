use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max defect {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("matrix is not positive semidefinite (offending value {value:e})")]
    NotPsd { value: f64 },

    #[error("matrix has column rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("point has {got} coordinates, oracle expects {expected}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("coordinate {0} is both zeroed and substituted")]
    VariableClash(usize),

    #[error("invalid transform program: {0}")]
    InvalidProgram(String),

    #[error("polynomial exceeds degree bound {bound} (held-out residual {residual:e})")]
    DegreeExceeded { bound: usize, residual: f64 },

    #[error("interpolation grid of {size} points exceeds budget {budget}")]
    GridTooLarge { size: u128, budget: u128 },

    #[error("value {value} cannot be resolved numerically: {context}")]
    NumericalResolutionExceeded { value: f64, context: &'static str },

    #[error("coefficient {value:e} is negative beyond tolerance {tolerance:e}")]
    NegativeCoefficient { value: f64, tolerance: f64 },

    #[error("conditioning on an event of zero mass")]
    NullMass,

    #[error("estimator did not terminate within {0} iterations")]
    NonConvergence(usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph has an odd number of vertices ({0})")]
    OddVertexCount(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cost budget exceeded: {0}")]
    CostBudgetExceeded(String),

    #[error("dimension budget exceeded: {0}")]
    DimensionBudgetExceeded(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("exact arithmetic unavailable: {0}")]
    ExactUnsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotPsd { .. } => "not_psd",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::TooLarge { .. } => "too_large",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::VariableClash(_) => "variable_clash",
            Error::InvalidProgram(_) => "invalid_program",
            Error::DegreeExceeded { .. } => "degree_exceeded",
            Error::GridTooLarge { .. } => "grid_too_large",
            Error::NumericalResolutionExceeded { .. } => "numerical_resolution_exceeded",
            Error::NegativeCoefficient { .. } => "negative_coefficient",
            Error::NullMass => "null_mass",
            Error::NonConvergence(_) => "non_convergence",
            Error::Disconnected => "disconnected",
            Error::OddVertexCount(_) => "odd_vertex_count",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::CostBudgetExceeded(_) => "cost_budget_exceeded",
            Error::DimensionBudgetExceeded(_) => "dimension_budget_exceeded",
            Error::InvalidFamily(_) => "invalid_family",
            Error::ExactUnsupported(_) => "exact_unsupported",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}
