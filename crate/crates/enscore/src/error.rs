use thiserror::Error;

/// Errors shared across the scoring, copula, evaluation, and study modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value encountered")]
    NonFiniteValue,
    #[error("sample too small: need at least 2 values")]
    EmptySample,
    #[error("iid-split estimator requires an even sample size, got {m}")]
    OddSampleForIidSplit { m: usize },
    #[error("band width {k} too wide for sample size {m} (max {})", m - 1)]
    BandTooWide { k: usize, m: usize },
    #[error("sample size {m} too small for dimension {h}: need m > h")]
    SampleTooSmall { m: usize, h: usize },
    #[error("singular covariance matrix")]
    SingularCovariance,
    #[error("copula observation outside the unit cube")]
    OutOfUnitCube,
    #[error("weight matrix has zero total mass")]
    ZeroWeightMass,
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 paired values")]
    DegenerateSeries,
    #[error("empty series")]
    EmptySeries,
    #[error("reference series has zero mean")]
    ZeroReferenceMean,
    #[error("all loss differences are equal; DM statistic undefined")]
    ZeroVarianceDifferences,
    #[error("root bracketing failed")]
    NoRoot,
    #[error("series of length {len} too short: need more than {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("singular Toeplitz system in Yule-Walker fit")]
    SingularToeplitz,
    #[error("history of length {len} too short: need at least {needed}")]
    HistoryTooShort { len: usize, needed: usize },
    #[error("unknown peak model id {id} (valid: 1..=8)")]
    UnknownModel { id: u8 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
