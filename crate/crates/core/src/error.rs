use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integrator produced a non-finite state at t = {t:.6e}")]
    NonFinite { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SATD phase-preservation constraint violated: dtheta(t_g/2) = {theta_dot:.3e}")]
    SatdConstraint { theta_dot: f64 },

    #[error("generic dressing singular at t = {t:.6e} (mu = {mu:.6})")]
    GenericDressingSingular { t: f64, mu: f64 },

    #[error("trace defect {defect:.3e} exceeds limit; integration unreliable")]
    TraceDefect { defect: f64 },

    #[error("flavor mismatch: expected {expected}, got {got}")]
    FlavorMismatch { expected: &'static str, got: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
