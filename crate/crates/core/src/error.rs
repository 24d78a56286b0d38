use thiserror::Error;

/// Errors raised by the solvers.
///
/// Numerical payloads are reported as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DropletError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate interval: a = {a}, b = {b} (need b > a)")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("length must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("no finite critical length: tilt is zero so the rear never detaches")]
    NoCriticalLength,

    #[error("drop collapse: step size too large or invalid data (length {ell} below floor {floor} at t = {t})")]
    Collapse { t: f64, ell: f64, floor: f64 },

    #[error("stability bound violated at t = {t}: endpoint speed {speed} exceeds bound {bound}")]
    SpeedBound { t: f64, speed: f64, bound: f64 },

    #[error("regime precondition violated: {0}")]
    Precondition(String),

    #[error("front speed H(y) - beta(x) = {value} is not positive at x = {x}")]
    NonPositiveFrontSpeed { x: f64, value: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("trajectories are not comparable: {0}")]
    MismatchedGrids(String),

    #[error("time step {h} too coarse for period {eps}: need h <= {limit}")]
    StepTooCoarse { h: f64, eps: f64, limit: f64 },

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("{0}")]
    Internal(String),
}

pub type Result<T, E = DropletError> = std::result::Result<T, E>;
