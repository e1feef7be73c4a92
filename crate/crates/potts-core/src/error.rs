use thiserror::Error;

/// Errors produced by the encoding, mean-field, replica, and annealing layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("component {component} out of range 0..{n_components} for spin {spin}")]
    ComponentOutOfRange {
        spin: usize,
        component: usize,
        n_components: usize,
    },

    #[error("couplings must form a symmetric matrix with zero diagonal")]
    InvalidCouplings,

    #[error("model requires N >= 2 spins and Q >= 2 components (got N={n_spins}, Q={n_components})")]
    ModelTooSmall { n_spins: usize, n_components: usize },

    #[error("half-hot constraint requires an even number of components (got Q={0})")]
    OddComponents(usize),

    #[error("Q={q} exceeds the dense-diagonalization limit of {max}")]
    TooManyComponents { q: usize, max: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("configuration covers {got} variables, expected {expected}")]
    ConfigSizeMismatch { expected: usize, got: usize },

    #[error("invalid overlap state: require eta >= xi >= 0, got xi={xi}, eta={eta}")]
    InvalidOverlaps { xi: f64, eta: f64 },

    #[error("quadrature order must be at least 8 (got {0})")]
    QuadratureTooCoarse(usize),

    #[error("beta must be finite and positive (got {0}); approach the zero-temperature limit with large finite values")]
    InvalidBeta(f64),

    #[error("damping must lie in (0, 1] (got {0})")]
    InvalidDamping(f64),

    #[error("annealing schedule requires t_start >= t_end > 0 and sweeps >= 1")]
    InvalidSchedule,

    #[error("selection sets must share one even size: spin {spin} has {size}, expected {expected}")]
    UnevenSelection {
        spin: usize,
        size: usize,
        expected: usize,
    },

    #[error("iterative optimization requires Q to be a power of two (got Q={0})")]
    NotPowerOfTwo(usize),

    #[error("round {round} failed: {reason}")]
    RoundFailed { round: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
