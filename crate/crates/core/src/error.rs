use thiserror::Error;

/// Errors raised by the mesh, discretization and scheme layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate domain: width and height must be positive (got {width} x {height})")]
    DegenerateDomain { width: f64, height: f64 },

    #[error("invalid subdivision count {0}: need at least 1")]
    InvalidSubdivision(usize),

    #[error("mesh not decomposable into macro pattern: {0}")]
    MacroPattern(String),

    #[error("point location failed for ({x}, {y})")]
    LocateFailed { x: f64, y: f64 },

    #[error("no quadrature rule with {0} points (available: 7, 12, 16, 25, 42)")]
    UnsupportedRule(usize),

    #[error("quadrature rule of degree {got} is too low, need at least {required}")]
    RuleTooLow { required: usize, got: usize },

    #[error("conjugate gradient did not converge: {iterations} iterations, relative residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("velocity field must be divergence-free")]
    NotDivergenceFree,

    #[error("velocity callback returned a non-finite value at ({x}, {y}), t = {t}")]
    NonFiniteVelocity { x: f64, y: f64, t: f64 },

    #[error("element kind {0} cannot carry a continuous finite element space")]
    NotConforming(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("field does not belong to this finite element space")]
    SpaceMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
