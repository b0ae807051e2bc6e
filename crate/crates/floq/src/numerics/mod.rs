//! Self-contained numeric kernel: 2x2 linear algebra, a matrix-exponential
//! oracle, adaptive Gauss-Kronrod quadrature and an embedded Runge-Kutta
//! integrator.
//!
//! Everything else in the crate treats this module as ground truth: the
//! closed-form fundamental matrix is validated against [`expm2`], trajectories
//! against [`rk45`], and coefficient integrals against [`integrate`].
//! All operations are pure functions of their inputs and safe to call from
//! many threads at once.

mod eig;
mod expm;
mod mat2;
mod ode;
mod quad;

pub use eig::{eig2, EigenPair2};
pub use expm::{cexpm2, expm2};
pub use mat2::{CMat2, CVec2, Mat2, Vec2};
pub use ode::{rk45, OdeSolution, OdeStep};
pub use quad::{integrate, QuadResult};

use thiserror::Error;

/// Failures of the numeric kernel. Higher layers either propagate these or
/// wrap them in their own error types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    /// A result entry left the representable range of `f64`.
    #[error("floating-point overflow in {context}")]
    Overflow { context: &'static str },
    /// The adaptive integrator pushed the step below the resolvable floor,
    /// usually a sign of a singularity or severe stiffness in the right-hand
    /// side.
    #[error("step size underflow at t = {t} (step {step:.3e} below floor {floor:.3e})")]
    StepUnderflow { t: f64, step: f64, floor: f64 },
    /// Step budget exhausted before reaching the end of the interval.
    #[error("integration exceeded the step budget on [{t0}, {t1}]")]
    TooManySteps { t0: f64, t1: f64 },
    /// Adaptive quadrature ran out of subdivisions before meeting the
    /// requested tolerance.
    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:.3e} > requested {requested:.3e}")]
    QuadratureDidNotConverge {
        a: f64,
        b: f64,
        estimate: f64,
        requested: f64,
    },
    /// A matrix inversion hit a zero (or non-finite) determinant.
    #[error("matrix is singular to working precision")]
    SingularMatrix,
}
