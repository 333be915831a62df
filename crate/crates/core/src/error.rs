use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pairing matrix has rank {rank}, expected full row rank {rows}")]
    DegeneratePairing { rank: usize, rows: usize },
    #[error("map is not skew with respect to the pairing (residual {residual:.3e})")]
    NotSkew { residual: f64 },
    #[error("subspace is not contained in E (residual {residual:.3e})")]
    NotInE { residual: f64 },
    #[error("input structure is not certified: {0}")]
    Uncertified(String),
    #[error("linear map is not injective (rank {rank} < {dim})")]
    NotInjective { rank: usize, dim: usize },
    #[error("linear map is not surjective (rank {rank} < {dim})")]
    NotSurjective { rank: usize, dim: usize },
    #[error("partial duals are not compatible under the map (residual {residual:.3e})")]
    DualIncompatible { residual: f64 },
    #[error("internal consistency check failed: {0}")]
    Assertion(String),
    #[error("unsupported form degree {0}")]
    UnsupportedDegree(usize),
    #[error("function is not admissible: differential misses the image of the 2-form by {residual:.3e}")]
    Inadmissible { residual: f64 },
    #[error("not a contact point: kernel of the differential has rank {rank}")]
    NotContactPoint { rank: usize },
    #[error("empty sample set")]
    EmptySamples,
    #[error("unknown system '{0}'")]
    UnknownSystem(String),
    #[error("constraint forms are rank deficient (rank {rank} < {expected})")]
    RankDeficientConstraints { rank: usize, expected: usize },
    #[error("parameter '{name}' must be positive, got {value}")]
    NonPositiveParameter { name: String, value: f64 },
    #[error("missing parameter '{0}'")]
    MissingParameter(String),
    #[error("initial state is not admissible (residual {residual:.3e}); project p onto the constraint set first")]
    InadmissibleState { residual: f64 },
    #[error("multiplier system is singular (condition estimate {condition:.3e})")]
    SingularMultipliers { condition: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
