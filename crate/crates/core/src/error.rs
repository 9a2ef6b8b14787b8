use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch in {op}: {}x{} vs {}x{}", left.0, left.1, right.0, right.1)]
    Dimension {
        op: String,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("formula is not executable: inversion gate {gate} receives a singular matrix")]
    NotExecutable { gate: usize },

    #[error("invalid formula: {0}")]
    InvalidFormula(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is not a prime below 2^32")]
    InvalidModulus(u64),

    #[error("initial basis is infeasible: b-bar has a negative entry at basis position {0}")]
    InfeasibleBasis(usize),

    #[error("basis matrix is singular")]
    SingularBasis,

    #[error("point is infeasible: {0}")]
    InfeasiblePoint(String),

    #[error("leading {0}x{0} block is singular")]
    SingularPrefix(usize),

    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),
}

impl Error {
    /// Short class name used on the CLI error line.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Singular => "Singular",
            Error::Dimension { .. } => "DimensionError",
            Error::Parse { .. } => "ParseError",
            Error::NotExecutable { .. } => "NotExecutable",
            Error::InvalidFormula(_) => "InvalidFormula",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvalidModulus(_) => "InvalidModulus",
            Error::InfeasibleBasis(_) => "InfeasibleBasis",
            Error::SingularBasis => "SingularBasis",
            Error::InfeasiblePoint(_) => "InfeasiblePoint",
            Error::SingularPrefix(_) => "SingularPrefix",
            Error::ScheduleInfeasible(_) => "ScheduleInfeasible",
        }
    }

    /// `true` for errors caused by the data (singular, infeasible) rather than
    /// by malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Singular
                | Error::NotExecutable { .. }
                | Error::InfeasibleBasis(_)
                | Error::SingularBasis
                | Error::InfeasiblePoint(_)
                | Error::SingularPrefix(_)
                | Error::ScheduleInfeasible(_)
        )
    }

    pub(crate) fn dim(op: &str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Dimension {
            op: op.to_string(),
            left,
            right,
        }
    }
}
