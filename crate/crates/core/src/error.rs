use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency `{0}` must be positive")]
    NonPositiveFrequency(&'static str),
    #[error("omega1 and omega2 must differ (beat frequency would vanish)")]
    EqualFrequencies,
    #[error("amplitude `{0}` must be non-negative")]
    NegativeAmplitude(&'static str),
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(&'static str),
    #[error("Bessel argument is not finite")]
    NonFiniteArgument,
    #[error("xi equations did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("truncation {n} is smaller than the largest harmonic {needed}")]
    TruncationTooSmall { n: usize, needed: usize },
    #[error("matrix is not Hermitian (max defect {0:e})")]
    NotHermitian(f64),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("could not select two independent Floquet states")]
    DegenerateSelection,
    #[error("truncation did not converge up to N = {n_max} (last change {change:e})")]
    NoTruncationConvergence { n_max: usize, change: f64 },
    #[error("matrix dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("projection-sum P = {projection} and derivative-form P = {derivative} disagree")]
    DerivativeCrossCheckFailed { projection: f64, derivative: f64 },
    #[error("RK norm drift {drift:e} persists after step halving")]
    StepTooLarge { drift: f64 },
    #[error("resonance band lost at A1 = {a1}")]
    BandLost { a1: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonPositiveFrequency(_)
            | Error::EqualFrequencies
            | Error::NegativeAmplitude(_)
            | Error::NonFiniteParameter(_)
            | Error::NonFiniteArgument
            | Error::InvalidInput(_) => 2,
            Error::DimensionOverflow { .. } | Error::TruncationTooSmall { .. } => 4,
            _ => 3,
        }
    }
}
