use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid sparse row {row}: {reason}")]
    InvalidSparseRow { row: usize, reason: String },

    #[error("rank deficient: column {column} has |r_kk| = {diagonal:e} below threshold {threshold:e}")]
    RankDeficient {
        column: usize,
        diagonal: f64,
        threshold: f64,
    },

    #[error("matrix market line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("constraint row {row} has zero norm")]
    ZeroRowNorm { row: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero denominator: the starting point is already feasible")]
    ZeroDenominator,

    #[error("point is not in the affine set: residual {residual:e} exceeds {tolerance:e}")]
    NotInAffineSet { residual: f64, tolerance: f64 },

    #[error("no feasible start: base system not solved within {sweeps} sweeps")]
    NoFeasibleStart { sweeps: usize },

    #[error("bracket required: objective is unbounded below over the variable bounds")]
    BracketRequired,

    #[error("picture distance undefined for an all-zero reference image")]
    ZeroReference,

    #[error("problem generation failed: {0}")]
    Generation(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
