//! Shooting solver for a Sturm-Liouville problem with a retarded argument,
//! eigenparameter-dependent boundary conditions at both ends and
//! transmission conditions at the interior point π/2:
//!
//! ```text
//! p(x) y'' + q(x) y(x - Δ(x)) + λ y = 0,   x ∈ [0, π/2) ∪ (π/2, π],
//! √λ y(0) + p₁ y'(0) = 0,                  d λ y(π) + y'(π) = 0,
//! γ₁ y(π/2 - 0) = δ₁ y(π/2 + 0),           γ₂ y'(π/2 - 0) = δ₂ y'(π/2 + 0),
//! ```
//!
//! with `p = p₁²` on the left piece and `p₂²` on the right one.
//!
//! The crate computes eigenvalues by bracketing sign changes of the
//! characteristic function inside the windows predicted by the leading
//! asymptotics, and evaluates the closed-form asymptotic expressions for
//! eigenvalues and eigenfunctions so the two can be compared.

pub mod asymptotics;
pub mod error;
pub mod expr;
pub mod fit;
pub mod integrator;
pub mod problem;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use expr::CoefficientExpr;
pub use integrator::{
    IntegratorConfig, PiecewiseSolution, Shooter, Side, SolutionTrace, StepScheme,
};
pub use problem::{AdmissibilityReport, Piece, ProblemSpec};

pub use spectral::{EigenRecord, SpectrumReport};
