use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("zero matrix has no condition number")]
    ZeroMatrix,
    #[error("SVD failed to converge")]
    SvdFailure,
    #[error("eigendecomposition failed to converge")]
    EigenFailure,
    #[error("fiducial is not normalized: |norm² − 1| = {deviation:.3e}")]
    UnnormalizedFiducial { deviation: f64 },
    #[error("α lies in an invalid region: λ_{index} = {lambda:.6} < 0, no normalized real-amplitude fiducial exists")]
    InvalidAlphaRegion { index: usize, lambda: f64 },
    #[error("λ ratio is singular at k = {index}: denominator 0 with numerator {numerator:.3e}")]
    SingularLambdaRatio { index: usize, numerator: f64 },
    #[error("counts are all zero")]
    ZeroCounts,
    #[error("probabilities are invalid: {0}")]
    InvalidProbabilities(String),
    #[error("expected count N_{index} = {value:.3e} is nonpositive while n_{index} > 0")]
    NonpositiveExpectedCount { index: usize, value: f64 },
    #[error("density matrix trace {trace:.6} deviates from 1 beyond tolerance")]
    NonUnitTrace { trace: f64 },
    #[error("unknown test state ({name}, D = {dim})")]
    UnknownTestState { name: String, dim: usize },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("unsupported format version {found}, this build reads version {supported}")]
    FormatVersion { found: u64, supported: u64 },
    #[error("duplicate counts cell (s = {s}, j = {j}, round = {round}) at line {line}")]
    DuplicateCell {
        s: usize,
        j: usize,
        round: usize,
        line: usize,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
