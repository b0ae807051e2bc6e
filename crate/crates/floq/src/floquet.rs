//! Floquet analysis of periodic planar systems.
//!
//! For a `T`-periodic system the fundamental matrix factors as
//! `Phi(t) = P(t) exp(B t)` with `P` being `T`-periodic and `B` constant; the
//! eigenvalues of the monodromy matrix `C = Phi(T)` are the characteristic
//! multipliers `rho`, and the Floquet exponents satisfy `rho = exp(lambda T)`.
//!
//! For the commuting class the whole machinery collapses: `C = exp(D(T))`
//! forces `B = D(T) / T`, which is nothing but the entrywise time average of
//! the coefficient matrix. Exponents therefore come from a 2x2 eigenvalue
//! problem on averaged coefficients - no integration of the system at all.
//! This module implements that route and, as an independent check, the
//! classical one (integrate over one period, take the eigenvalues of the
//! monodromy matrix), plus the trace identities tying the two together.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::fundamental::{FundamentalMatrix, GammaClass};
use crate::numerics::{
    cexpm2, eig2, expm2, integrate, rk45, CMat2, Mat2, NumericsError, Vec2,
};
use crate::sysmodel::{PlanarSystem, StructuredSystem};

/// Default relative tolerance for monodromy integration; chosen to beat the
/// 1e-6 pipeline-agreement gate with ample margin.
pub const DEFAULT_MONODROMY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum FloquetError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("closed-form exponents {closed:?} and averaged-matrix eigenvalues {eigen:?} disagree by {deviation:.3e}")]
    ExponentMismatch {
        closed: [Complex64; 2],
        eigen: [Complex64; 2],
        deviation: f64,
    },
    #[error("monodromy matrix is singular (|rho| = {modulus:.3e})")]
    SingularMonodromy { modulus: f64 },
    #[error("monodromy determinant {det:.6e} is not positive; integration is untrustworthy")]
    NonPositiveDeterminant { det: f64 },
    #[error("averaged matrix has imaginary part {max_imag:.3e}; no real periodic factorization")]
    NonRealAveragedMatrix { max_imag: f64 },
}

/// Floquet data of one system: averaged matrix, exponents, multipliers.
///
/// Invariants: `rho = exp(lambda T)` pairwise, and the imaginary part of
/// every exponent lies in the principal strip `(-pi/T, pi/T]`.
#[derive(Debug, Clone)]
pub struct FloquetData {
    /// The constant matrix `B` of the factorization `Phi = P exp(B t)`.
    /// Real whenever it comes from coefficient averages; complex entries can
    /// appear only on the monodromy route for pathological multipliers.
    pub averaged: CMat2,
    pub exponents: [Complex64; 2],
    pub multipliers: [Complex64; 2],
    pub period: f64,
    /// Set when the underlying 2x2 problem is defective (single eigenvector).
    pub defective: bool,
}

impl FloquetData {
    /// Real part of `B` if the imaginary residue is negligible.
    pub fn averaged_real(&self) -> Option<Mat2> {
        let scale = 1.0 + self.averaged.max_abs();
        (self.averaged.max_imag() <= 1e-9 * scale).then(|| self.averaged.real_part())
    }

    pub fn max_real_exponent(&self) -> f64 {
        self.exponents[0].re.max(self.exponents[1].re)
    }
}

/// The over-one-period propagator `C = Phi(t0 + T) Phi(t0)^{-1}` computed by
/// direct integration, with the tolerances that produced it.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub matrix: Mat2,
    pub period: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Stability of the zero solution read off the Floquet exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// All exponents have negative real part: every solution decays.
    AsymptoticallyStable,
    /// Largest real part is zero and the averaged matrix is diagonalizable:
    /// solutions stay bounded without decaying.
    Stable,
    /// An exponent with positive real part, or a defective zero real part
    /// (secular growth).
    Unstable,
}

/// Reduces the imaginary part of an exponent into `(-pi/T, pi/T]`.
pub fn reduce_to_principal_strip(lambda: Complex64, period: f64) -> Complex64 {
    let modulus = 2.0 * PI / period;
    let mut im = lambda.im - modulus * (lambda.im / modulus).round();
    if im <= -0.5 * modulus {
        im += modulus;
    }
    Complex64::new(lambda.re, im)
}

/// Exponent of a multiplier: `(ln |rho| + i arg rho) / T` with the argument
/// in `(-pi, pi]`.
pub fn principal_exponent(rho: Complex64, period: f64) -> Complex64 {
    Complex64::new(rho.norm().ln(), rho.arg()) / period
}

/// Distance between two exponent pairs as sets, comparing imaginary parts
/// modulo `2 pi / T`.
pub fn exponent_set_deviation(a: &[Complex64; 2], b: &[Complex64; 2], period: f64) -> f64 {
    let modulus = 2.0 * PI / period;
    let dist = |x: Complex64, y: Complex64| {
        let z = x - y;
        let im = z.im - modulus * (z.im / modulus).round();
        Complex64::new(z.re, im).norm()
    };
    let straight = dist(a[0], b[0]).max(dist(a[1], b[1]));
    let crossed = dist(a[0], b[1]).max(dist(a[1], b[0]));
    straight.min(crossed)
}

/// Floquet exponents from coefficient averages.
///
/// Computes the averaged matrix `B`, derives the exponents twice - from the
/// closed form `mean +- gamma * avg(a12)` and as `eig(B)` - and insists the
/// two agree to 1e-10 before returning. The spectral data is reduced to the
/// principal strip; multipliers follow as `exp(lambda T)`.
pub fn floquet_from_averages(
    system: &StructuredSystem,
    period: f64,
) -> Result<FloquetData, FloquetError> {
    assert!(period > 0.0, "period must be positive");
    let b = system.average_matrix(period)?;
    let eig = eig2(&b);

    // closed form in terms of the averaged coefficients
    let avg_a11 = Complex64::new(b.m11, 0.0);
    let avg_a12 = Complex64::new(b.m12, 0.0);
    let gamma = GammaClass::classify(system.alpha(), system.beta()).gamma_complex();
    let mean = avg_a11 + avg_a12 * (system.beta() / 2.0);
    let closed = [mean + gamma * avg_a12, mean - gamma * avg_a12];

    let scale = 1.0
        + eig.values[0]
            .norm()
            .max(eig.values[1].norm())
            .max(closed[0].norm());
    let deviation = {
        let d = |x: Complex64, y: Complex64| (x - y).norm();
        let straight = d(closed[0], eig.values[0]).max(d(closed[1], eig.values[1]));
        let crossed = d(closed[0], eig.values[1]).max(d(closed[1], eig.values[0]));
        straight.min(crossed)
    };
    // Near a double root the eigenvalues are square-root ill-conditioned:
    // entry-level rounding eta moves them by eta/gap, saturating at
    // sqrt(eta). Widen the 1e-10 agreement gate by exactly that much so the
    // consistency check never trips on conditioning instead of on bugs.
    let eta = f64::EPSILON * (1.0 + b.frobenius_norm().powi(2));
    let gap = (eig.values[0] - eig.values[1]).norm();
    let root_noise = if gap > eta.sqrt() { eta / gap } else { eta.sqrt() };
    if deviation > 1e-10 * scale + 8.0 * root_noise {
        return Err(FloquetError::ExponentMismatch {
            closed,
            eigen: eig.values,
            deviation,
        });
    }

    let exponents = [
        reduce_to_principal_strip(eig.values[0], period),
        reduce_to_principal_strip(eig.values[1], period),
    ];
    let multipliers = [
        (exponents[0] * period).exp(),
        (exponents[1] * period).exp(),
    ];
    Ok(FloquetData {
        averaged: CMat2::from(b),
        exponents,
        multipliers,
        period,
        defective: eig.defective,
    })
}

/// Monodromy matrix by integrating the matrix equation column by column
/// from the identity at the base time.
///
/// Works for any planar system, commuting or not; this is the independent
/// oracle the averaged route is validated against.
pub fn monodromy_numeric<S: PlanarSystem>(
    system: &S,
    period: f64,
    rel_tol: f64,
) -> Result<Monodromy, FloquetError> {
    assert!(period > 0.0, "period must be positive");
    let abs_tol = rel_tol * 1e-2;
    let t0 = system.base_time();
    let rhs = |t: f64, x: Vec2| {
        let e = system.entries_at(t);
        Vec2 {
            x1: e[0] * x.x1 + e[1] * x.x2,
            x2: e[2] * x.x1 + e[3] * x.x2,
        }
    };
    let col1 = rk45(rhs, t0, Vec2::unit_x(), t0 + period, rel_tol, abs_tol)?
        .endpoint()
        .1;
    let col2 = rk45(rhs, t0, Vec2::unit_y(), t0 + period, rel_tol, abs_tol)?
        .endpoint()
        .1;
    let matrix = Mat2::from_columns(col1, col2);
    let det = matrix.det();
    if det <= 0.0 {
        return Err(FloquetError::NonPositiveDeterminant { det });
    }
    Ok(Monodromy {
        matrix,
        period,
        rel_tol,
        abs_tol,
    })
}

/// Multipliers and exponents from an integrated monodromy matrix.
///
/// Defective monodromy (one eigenvector) is handled through the principal
/// logarithm plus the nilpotent correction `N / rho` and flagged in the
/// returned data.
pub fn exponents_from_monodromy(monodromy: &Monodromy) -> Result<FloquetData, FloquetError> {
    let c = monodromy.matrix;
    let period = monodromy.period;
    let eig = eig2(&c);
    let min_modulus = eig.values[0].norm().min(eig.values[1].norm());
    if min_modulus <= f64::MIN_POSITIVE {
        return Err(FloquetError::SingularMonodromy {
            modulus: min_modulus,
        });
    }

    if eig.defective {
        let rho = (eig.values[0] + eig.values[1]) * 0.5;
        let lambda = principal_exponent(rho, period);
        // log(C) = log(rho) I + N / rho with N = C - rho I nilpotent
        let log_rho = Complex64::new(rho.norm().ln(), rho.arg());
        let n = CMat2::from(c) - CMat2::diagonal(rho, rho);
        let inv_rho_t = Complex64::new(1.0, 0.0) / (rho * period);
        let averaged = CMat2::new(
            log_rho / period + n.m11 * inv_rho_t,
            n.m12 * inv_rho_t,
            n.m21 * inv_rho_t,
            log_rho / period + n.m22 * inv_rho_t,
        );
        return Ok(FloquetData {
            averaged,
            exponents: [lambda, lambda],
            multipliers: [rho, rho],
            period,
            defective: true,
        });
    }

    let exponents = [
        principal_exponent(eig.values[0], period),
        principal_exponent(eig.values[1], period),
    ];
    let v = CMat2::from_columns(eig.vectors[0], eig.vectors[1]);
    let v_inv = v.inverse()?;
    let averaged = v * CMat2::diagonal(exponents[0], exponents[1]) * v_inv;
    Ok(FloquetData {
        averaged,
        exponents,
        multipliers: eig.values,
        period,
        defective: false,
    })
}

/// The periodic factor `P(t) = Phi(t) exp(-B (t - t0))`.
///
/// `P` is `T`-periodic exactly when the monodromy matrix equals
/// `exp(B T)`, which holds by construction for data from
/// [`floquet_from_averages`].
pub fn periodic_part(
    fm: &FundamentalMatrix,
    data: &FloquetData,
    t: f64,
) -> Result<Mat2, FloquetError> {
    let b = data
        .averaged_real()
        .ok_or(FloquetError::NonRealAveragedMatrix {
            max_imag: data.averaged.max_imag(),
        })?;
    let phi = fm.phi(t)?;
    let decay = expm2(&(b * -(t - fm.system().t0()))).map_err(FloquetError::Numerics)?;
    Ok(phi * decay)
}

/// Residuals of the two classical trace identities over one period:
/// the exponent sum against the averaged trace (modulo `2 pi i / T`) and
/// the multiplier product against `exp(integral of tr A)`.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub exponents: [Complex64; 2],
    pub multipliers: [Complex64; 2],
    /// `(1/T) * integral of tr A over one period`.
    pub average_trace: f64,
    pub exponent_sum_residual: f64,
    pub multiplier_product_residual: f64,
}

/// Evaluates the trace identities for any planar system, using the
/// monodromy pipeline for the spectral side and independent quadrature for
/// the trace side.
pub fn trace_identities<S: PlanarSystem>(
    system: &S,
    period: f64,
    rel_tol: f64,
) -> Result<TraceReport, FloquetError> {
    let monodromy = monodromy_numeric(system, period, rel_tol)?;
    let data = exponents_from_monodromy(&monodromy)?;
    let t0 = system.base_time();
    let trace_integral = integrate(
        |t| system.trace_at(t),
        t0,
        t0 + period,
        1e-12,
        1e-13,
    )
    .map_err(FloquetError::Numerics)?
    .value;
    let average_trace = trace_integral / period;

    let sum = data.exponents[0] + data.exponents[1];
    let residual_sum = {
        let z = sum - Complex64::new(average_trace, 0.0);
        reduce_to_principal_strip(z, period).norm()
    };
    let product = data.multipliers[0] * data.multipliers[1];
    let residual_product = (product - Complex64::new(trace_integral.exp(), 0.0)).norm();

    Ok(TraceReport {
        exponents: data.exponents,
        multipliers: data.multipliers,
        average_trace,
        exponent_sum_residual: residual_sum,
        multiplier_product_residual: residual_product,
    })
}

/// Stability of the zero solution from the exponents.
///
/// Asymptotically stable iff every real part is negative; unstable iff one
/// is positive; on the boundary (within 1e-9) a diagonalizable averaged
/// matrix gives boundedness, a defective one grows secularly.
pub fn stability_verdict(data: &FloquetData) -> StabilityVerdict {
    const BOUNDARY: f64 = 1e-9;
    let max_re = data.max_real_exponent();
    if max_re > BOUNDARY {
        StabilityVerdict::Unstable
    } else if max_re < -BOUNDARY {
        StabilityVerdict::AsymptoticallyStable
    } else if data.defective {
        StabilityVerdict::Unstable
    } else {
        StabilityVerdict::Stable
    }
}

/// Convenience: `exp(B T)` for checking `C = exp(B T)` style identities.
pub fn exp_averaged(data: &FloquetData) -> Result<CMat2, NumericsError> {
    cexpm2(&(data.averaged * Complex64::new(data.period, 0.0)))
}
