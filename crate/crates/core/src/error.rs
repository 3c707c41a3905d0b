use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling identity violated: gamma1*delta2*p1 = {lhs}, gamma2*delta1*p2 = {rhs}")]
    ConstraintViolation { lhs: f64, rhs: f64 },

    #[error("degenerate transmission coefficients: {0}")]
    DegenerateTransmission(String),

    #[error("stiffness coefficients must be positive (p1 = {p1}, p2 = {p2})")]
    NonpositiveStiffness { p1: f64, p2: f64 },

    #[error("parameter `{0}` is not a finite number")]
    NonfiniteParameter(&'static str),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("delayed argument {delayed} at x = {x} leaves the piece starting at {piece_start}")]
    DelayOutOfRange {
        x: f64,
        delayed: f64,
        piece_start: f64,
    },

    #[error("solution state became non-finite at x = {x}")]
    NonfiniteState { x: f64 },

    #[error("point x = {0} lies outside [0, pi]")]
    OutOfDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window for n = {n} does not lie in s > 0")]
    WindowNotPositive { n: usize },

    #[error("no sign change of the characteristic function in window [{lo}, {hi}] (n = {n})")]
    NoRootInWindow { n: usize, lo: f64, hi: f64 },

    #[error(
        "{count} sign changes of the characteristic function in window [{lo}, {hi}] (n = {n})"
    )]
    MultipleRootsInWindow {
        n: usize,
        lo: f64,
        hi: f64,
        count: usize,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}
