use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("density matrix is invalid: {0}")]
    InvalidDensity(String),

    #[error("propagators are orthogonal: Tr(V†U) vanishes, global phase undefined")]
    OrthogonalPropagators,

    #[error("empty target set")]
    EmptyTargets,

    #[error("negative time {0} s")]
    NegativeTime(f64),

    #[error("coupling constant J is zero")]
    ZeroCoupling,

    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("invalid shaped pulse: {0}")]
    InvalidPulse(String),

    #[error("shaped pulse not converged: doubling slices changed the propagator by {0:e}")]
    SliceConvergence(f64),

    #[error("spectator calibration failed: {0}")]
    Calibration(String),

    #[error("unknown builtin sequence `{0}`")]
    UnknownBuiltin(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid acquisition: {0}")]
    InvalidAcquisition(String),

    #[error("dwell {dwell} s aliases: Nyquist {nyquist} Hz must exceed {required} Hz")]
    Aliasing {
        dwell: f64,
        nyquist: f64,
        required: f64,
    },

    #[error("multiplet window around {0} Hz contains no spectral bins")]
    EmptyWindow(f64),

    #[error("spectrum is unclassifiable: both multiplet integrals vanish")]
    Unclassifiable,
}
