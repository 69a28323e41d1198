use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not normal (defect {defect:.3e})")]
    NotNormal { defect: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("the span is zero")]
    EmptySystem,
    #[error("identity is not in the span (residual {residual:.3e})")]
    NoUnit { residual: f64 },
    #[error("{what}: size {size} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("systems are not comparable: dimensions {left} and {right}")]
    NotComparable { left: usize, right: usize },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("missing relation symbol `{0}`")]
    MissingRelation(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical routine did not converge: {0}")]
    NoConvergence(&'static str),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::NotNormal { .. } => "not_normal",
            Error::NotUnitary { .. } => "not_unitary",
            Error::EmptySystem => "empty_system",
            Error::NoUnit { .. } => "no_unit",
            Error::Capacity { .. } => "capacity",
            Error::NotComparable { .. } => "not_comparable",
            Error::OutOfRange(_) => "out_of_range",
            Error::MissingRelation(_) => "missing_relation",
            Error::UnboundVariable(_) => "unbound_variable",
            Error::Invalid(_) => "invalid",
            Error::NoConvergence(_) => "no_convergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
