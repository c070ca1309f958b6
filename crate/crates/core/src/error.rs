use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("deformation parameter q = {0} is outside the open interval (0, 1)")]
    InvalidDeformation(f64),

    #[error("q-factorial [{n}]_q! overflows the double range")]
    Overflow { n: usize },

    #[error("q-Pochhammer base {0} is outside the open interval (0, 1)")]
    InvalidBase(f64),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("infinite product needs {needed} factors, more than the limit of {limit}")]
    TooManyFactors { needed: f64, limit: usize },

    #[error("creation operator would push amplitude {amplitude:e} off the cutoff (tolerance {eps:e})")]
    TruncationOverflow { amplitude: f64, eps: f64 },

    #[error("state needs a Fock cutoff above {cap} to reach tail mass {eps:e}")]
    CutoffExceeded { cap: usize, eps: f64 },

    #[error("moment order ({alpha}, {beta}) exceeds the truncated space with cutoff {cutoff}")]
    OrderTooHigh { alpha: usize, beta: usize, cutoff: usize },

    #[error("moment table is missing entry ({alpha}, {beta})")]
    IncompleteTable { alpha: usize, beta: usize },

    #[error("amplitude modulus {modulus} is not below the convergence radius {radius}")]
    DivergentAmplitude { modulus: f64, radius: f64 },

    #[error("state vector vanishes identically: {0}")]
    DegenerateState(&'static str),

    #[error("tridiagonal eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("quadrature rule of order {order} is exact to degree {exact}, but degree {needed} is required")]
    InsufficientRule { order: usize, exact: usize, needed: usize },

    #[error("angles {theta1} and {theta2} coincide modulo pi")]
    DegenerateAngles { theta1: f64, theta2: f64 },

    #[error("moment system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("incompatible tomogram grid: {0}")]
    IncompatibleGrid(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
