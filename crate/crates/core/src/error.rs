use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the library.
///
/// Input problems (bad shapes, malformed files, invalid parameters) and
/// solver failures are kept apart so callers can map them to different
/// exit paths; see [`Error::is_solver_failure`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("infeasible marginals: mass {left} vs {right}")]
    InfeasibleMarginals { left: f64, right: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("symbolic supports are not supported by {0}")]
    SymbolicUnsupported(&'static str),

    #[error("cost tables differ between the two distributions")]
    TableMismatch,

    #[error("parse error in block {block} at line {line}: {message}")]
    Parse {
        block: usize,
        line: usize,
        message: String,
    },

    #[error("weights of block {block} sum to {sum}")]
    WeightSum { block: usize, sum: f64 },

    #[error("io error: {0}")]
    Io(String),

    #[error("penalty parameter rho is zero; all transport costs vanish")]
    ZeroRho,

    #[error("IBP overflow at iteration {iteration}")]
    IbpOverflow { iteration: usize },

    #[error("QP subproblem did not converge within {iterations} iterations")]
    QpNoConvergence { iterations: usize },

    #[error("LP solver failure: {0}")]
    Lp(String),

    #[error("problem exceeds the full-batch LP size guard: {0}")]
    ScaleGuard(String),
}

impl Error {
    /// True for numerical failures of a solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::ZeroRho
                | Error::IbpOverflow { .. }
                | Error::QpNoConvergence { .. }
                | Error::Lp(_)
                | Error::NonFinite(_)
        )
    }

    /// Short stable tag, used for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::EmptyInput(_) => "empty_input",
            Error::InfeasibleMarginals { .. } => "infeasible_marginals",
            Error::NonFinite(_) => "non_finite",
            Error::SymbolicUnsupported(_) => "symbolic_unsupported",
            Error::TableMismatch => "table_mismatch",
            Error::Parse { .. } => "parse",
            Error::WeightSum { .. } => "weight_sum",
            Error::Io(_) => "io",
            Error::ZeroRho => "zero_rho",
            Error::IbpOverflow { .. } => "ibp_overflow",
            Error::QpNoConvergence { .. } => "qp_no_convergence",
            Error::Lp(_) => "lp_failure",
            Error::ScaleGuard(_) => "scale_guard",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
