use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("flux calibration matrix is singular (|det| = {det:e})")]
    SingularCalibration { det: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("total decay rate is zero, the resonance is degenerate")]
    DegenerateResonance,

    #[error("phase winding undefined: {0}")]
    WindingUndefined(&'static str),

    #[error("overdamped Rabi regime: Omega_R = {omega_r:e} < |G1 - G2|/2 = {threshold:e}")]
    OverdampedRabi { omega_r: f64, threshold: f64 },

    #[error("Liouvillian null space has dimension {0}, steady state is not unique")]
    SteadyStateMultiplicity(usize),

    #[error("Liouvillian has no null space (smallest singular value {0:e})")]
    NoSteadyState(f64),

    #[error("fit did not converge after {iterations} iterations (best rms residual {best_rms:e})")]
    NonConvergence { iterations: usize, best_rms: f64 },

    #[error("circle fit is degenerate (points are collinear or coincident)")]
    DegenerateCircle,

    #[error("phase variance {0} rad^2 is too large for a small-noise bound")]
    PhaseVarianceTooLarge(f64),

    #[error("value {value} outside tabulated range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("{0} is undefined for all-zero rates")]
    Undefined(&'static str),

    #[error("trace is malformed: {0}")]
    MalformedTrace(&'static str),
}
