//! Closed-form solutions and Floquet analysis for planar linear systems
//! `x'(t) = A(t) x(t)` whose coefficient matrix has the commuting structure
//!
//! ```text
//! A(t) = [ a11(t)          a12(t)              ]
//!        [ alpha * a12(t)  a11(t) + beta * a12(t) ]
//! ```
//!
//! with real constants `alpha` and `beta`. For this class the matrix
//! commutes with its primitive `D(t) = integral of A`, the fundamental
//! matrix is exactly `exp(D(t))`, and - for `T`-periodic coefficients - the
//! Floquet exponents are the eigenvalues of the entrywise average of `A`
//! over one period. The crate provides:
//!
//! - [`numerics`]: a self-contained 2x2 kernel (matrix exponential,
//!   eigen decomposition, adaptive Runge-Kutta, adaptive quadrature) used as
//!   ground truth everywhere else;
//! - [`expr`]: the coefficient-expression language used by problem files;
//! - [`sysmodel`]: coefficient functions, structure fitting, averages;
//! - [`fundamental`]: the closed-form fundamental matrix across all three
//!   spectral branches, plus asymptotic classification;
//! - [`floquet`]: exponents from averages, numerical monodromy
//!   cross-validation, trace identities, stability verdicts;
//! - [`reduction`]: conversions between scalar second-order equations and
//!   planar systems.
//!
//! The `floq` command-line tool (the `floq-cli` crate) exposes all of this
//! over TOML problem files. A narrative guide with runnable examples lives
//! in `book/`.

pub mod expr;
pub mod floquet;
pub mod fundamental;
pub mod numerics;
pub mod reduction;
pub mod special;
pub mod sysmodel;

#[cfg(doctest)]
mod book;

pub use numerics::{Mat2, NumericsError, Vec2};
