use core::result;

pub type Result<T> = result::Result<T, Error>;

/// Everything that can go wrong in the numerical core.
///
/// Variants are split into input validation problems and numerical
/// failures; see [`Error::is_numeric`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("spectral density needs at least one Lorentzian term")]
    EmptySpectrum,
    #[error("Lorentzian term {index}: {reason}")]
    InvalidTerm { index: usize, reason: &'static str },
    #[error("initial state is not normalized: |alpha|^2 + |beta|^2 = {norm}")]
    Unnormalized { norm: f64 },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error(
        "integration window too small: tail bound {tail_bound:e} exceeds tolerance {tolerance:e}"
    )]
    WindowTooSmall { tail_bound: f64, tolerance: f64 },
    #[error("resonance of term {index} lies outside the discretization window")]
    ResonanceOutsideWindow { index: usize },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("maximum number of integration steps exceeded at t = {t}")]
    MaxStepsExceeded { t: f64 },
    #[error("survival probability table is not monotone at grid index {index}")]
    NonMonotoneSurvival { index: usize },
    #[error("window {window} extends beyond trajectory end {end}")]
    WindowBeyondTrajectory { window: f64, end: f64 },
    #[error("estimator undefined: no jump was realized inside the window")]
    UndefinedEstimator,
    #[error("no jump probability inside the window (alpha = 0 or T = 0)")]
    ZeroJumpProbability,
    #[error("amplitudes do not decay; expected times diverge")]
    NonDecaying,
    #[error("trajectory too short: tail bound {tail_bound:e} exceeds tolerance {tolerance:e}")]
    TrajectoryTooShort { tail_bound: f64, tolerance: f64 },
    #[error("series are defined on different grids")]
    GridMismatch,
}

impl Error {
    /// True for failures of a numerical method, false for rejected input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::NonFinite { .. }
                | Error::MaxStepsExceeded { .. }
                | Error::WindowTooSmall { .. }
                | Error::UndefinedEstimator
                | Error::NonDecaying
                | Error::TrajectoryTooShort { .. }
        )
    }
}
