use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value table for n={n} needs {expected} entries, got {got}")]
    LengthMismatch { n: usize, expected: usize, got: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("feature count must be at least 1")]
    NoFeatures,

    #[error("feature count {n} exceeds the configured cap of {cap}")]
    TooManyFeatures { n: usize, cap: usize },

    #[error("dimension mismatch: {left} vs {right} features")]
    DimensionMismatch { left: usize, right: usize },

    #[error("mixing weight {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("feature {feature} out of range for n={n}")]
    FeatureOutOfRange { feature: usize, n: usize },

    #[error("subset mask {mask:#b} out of range for n={n}")]
    MaskOutOfRange { mask: u32, n: usize },

    #[error("feature {feature} is not a member of subset {mask:#b}")]
    FeatureNotInSubset { feature: usize, mask: u32 },

    #[error("cannot eliminate every feature")]
    EliminateAll,

    #[error("invalid tolerance {0}: must be finite and non-negative")]
    InvalidTolerance(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("block {block:#b} is not separable (residual {residual:e} at T={witness:#b})")]
    NotSeparable { block: u32, witness: u32, residual: f64 },

    #[error("no subset is separable: the empty-set value {0:e} is nonzero")]
    EmptySetNonZero(f64),

    #[error("closure precondition failed: {which} is not separable (residual {residual:e})")]
    ClosurePrecondition { which: &'static str, residual: f64 },

    #[error("sample space has no instances")]
    EmptySampleSpace,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("copies must be at least 1")]
    ZeroCopies,

    #[error("degenerate denominator: weighted sum of squared targets is zero")]
    DegenerateDenominator,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("not a full product grid: {0}")]
    NotAProductGrid(String),

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("CSV error at row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },

    #[error("CSV error: {0}")]
    CsvFormat(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
