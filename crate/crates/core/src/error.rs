use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate critical point at x = {x} (V'' = {v2})")]
    DegenerateCriticalPoint { x: f64, v2: f64 },

    #[error("quadrature tolerance not reached after {subdivisions} subdivisions (estimate {value}, error {error})")]
    ToleranceNotReached {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand is not integrable near x = {0}")]
    NonIntegrable(f64),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("function evaluation failed at x = {0}")]
    EvaluationFailed(f64),

    #[error("V(x) - V(x_turn) must be positive between x0 = {x0} and x_turn = {x_turn}")]
    InvalidBracket { x0: f64, x_turn: f64 },

    #[error("turning point x = {0} sits on a critical point of V")]
    SingularTurningPoint(f64),

    #[error("fluctuation determinant unavailable for paths with {0} periods")]
    Unavailable(u32),

    #[error("root finding did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("x0 cutoff {cutoff} too small: integrand {value} at the boundary")]
    CutoffTooSmall { cutoff: f64, value: f64 },

    #[error("grid too narrow: boundary amplitude ratio {ratio} for level {level}")]
    GridTooNarrow { level: usize, ratio: f64 },

    #[error("spectral tail {tail} not negligible at beta = {beta}")]
    TailNotNegligible { beta: f64, tail: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
