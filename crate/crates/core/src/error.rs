use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),

    #[error("frequency {omega} rad/s is not below the Nyquist limit {nyquist} rad/s")]
    Nyquist { omega: f64, nyquist: f64 },

    #[error("waveforms are sampled on different grids")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hilbert FIR needs an odd tap count of at least 3, got {0}")]
    InvalidTapCount(usize),

    #[error("lowpass cutoff {cutoff} rad/s must be below the carrier {omega0} rad/s")]
    CutoffTooHigh { cutoff: f64, omega0: f64 },

    #[error("impedance magnitude is zero")]
    ZeroImpedance,

    #[error("impulse-response lag spacing {spacing} s exceeds one eighth of the carrier period ({limit} s)")]
    LagGridTooCoarse { spacing: f64, limit: f64 },

    #[error("carrier response and impulse response disagree by {0:e}")]
    InconsistentImpedance(f64),

    #[error("frequency estimation failed: peak-to-median ratio {ratio:.3} below {threshold}")]
    EstimationFailed { ratio: f64, threshold: f64 },

    #[error("zero Hermitian power, phase is undefined")]
    UndefinedPhase,

    #[error("duplicate harmonic index {0}")]
    DuplicateHarmonic(u32),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical validity condition (sampling rate,
    /// band separation) as opposed to malformed data.
    pub fn is_numeric_validity(&self) -> bool {
        matches!(self, Error::Nyquist { .. } | Error::LagGridTooCoarse { .. })
    }
}
