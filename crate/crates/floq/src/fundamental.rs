//! Closed-form fundamental matrix for commuting-class systems.
//!
//! With `D(t)` the entrywise primitive of the coefficient matrix, the
//! fundamental matrix is `Phi(t) = exp(D(t))`. Splitting `D` into its
//! identity component and the traceless-like remainder,
//!
//! ```text
//! D(t) = (f + (beta/2) g) I  +  g M,      M = [ -beta/2  1      ]
//!                                             [ alpha    beta/2 ]
//! ```
//!
//! the two summands commute, and `M^2 = gamma^2 I` with
//! `gamma^2 = alpha + beta^2 / 4`. The exponential of `g M` therefore
//! collapses to two scalar coefficients:
//!
//! - `gamma^2 > 0`: `cosh(gamma g) I + sinh(gamma g)/gamma M` (hyperbolic),
//! - `gamma^2 = 0`: `I + g M` (polynomial),
//! - `gamma^2 < 0`: `cos(omega g) I + sin(omega g)/omega M` with
//!   `omega = sqrt(-gamma^2)` (oscillatory).
//!
//! Everything here is validated against the scaling-and-squaring oracle
//! [`expm2`](crate::numerics::expm2).

use num_complex::Complex64;

use crate::numerics::{rk45, Mat2, NumericsError, OdeSolution, Vec2};
use crate::sysmodel::{
    chebyshev_grid, AsymptoticClass, PlanarSystem, StructuredSystem, PROBE_POINTS,
};

/// Spectral branch of the structured exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaBranch {
    /// `gamma^2 > 0`: hyperbolic growth/decay along two real directions.
    RealPositive,
    /// `gamma^2 = 0` to tolerance: polynomial (Jordan-like) behaviour.
    Zero,
    /// `gamma^2 < 0`: rotation with angular rate `omega * g'(t)`.
    Imaginary,
}

/// The discriminant `gamma^2 = alpha + beta^2/4` and its branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaClass {
    pub gamma_sq: f64,
    pub branch: GammaBranch,
}

impl GammaClass {
    /// Classifies the discriminant. Values of `gamma^2` within
    /// `1e-12 * (1 + |alpha| + beta^2)` of zero are treated as the branch
    /// point, where the series form of the exponential coefficients removes
    /// the 0/0.
    pub fn classify(alpha: f64, beta: f64) -> GammaClass {
        assert!(alpha.is_finite() && beta.is_finite());
        let gamma_sq = alpha + beta * beta / 4.0;
        let tol = 1e-12 * (1.0 + alpha.abs() + beta * beta);
        let branch = if gamma_sq.abs() <= tol {
            GammaBranch::Zero
        } else if gamma_sq > 0.0 {
            GammaBranch::RealPositive
        } else {
            GammaBranch::Imaginary
        };
        GammaClass { gamma_sq, branch }
    }

    /// `gamma` on the real branch.
    pub fn gamma(&self) -> Option<f64> {
        matches!(self.branch, GammaBranch::RealPositive).then(|| self.gamma_sq.sqrt())
    }

    /// `omega = sqrt(-gamma^2)` on the imaginary branch (principal root,
    /// positive).
    pub fn omega(&self) -> Option<f64> {
        matches!(self.branch, GammaBranch::Imaginary).then(|| (-self.gamma_sq).sqrt())
    }

    /// `gamma` as a complex number, valid on every branch.
    pub fn gamma_complex(&self) -> Complex64 {
        Complex64::new(self.gamma_sq, 0.0).sqrt()
    }
}

/// The traceless-like generator `M = [[-beta/2, 1], [alpha, beta/2]]`.
pub fn structure_generator(alpha: f64, beta: f64) -> Mat2 {
    Mat2::new(-beta / 2.0, 1.0, alpha, beta / 2.0)
}

/// Scalar coefficients `(c, s)` with `exp(g M) = c I + s M`.
fn exp_s_coefficients(gc: &GammaClass, g: f64) -> Result<(f64, f64), NumericsError> {
    match gc.branch {
        GammaBranch::RealPositive => {
            let gamma = gc.gamma_sq.sqrt();
            if gamma * g.abs() > 700.0 {
                return Err(NumericsError::Overflow {
                    context: "hyperbolic branch of the structured exponential",
                });
            }
            let x = gamma * g;
            Ok((x.cosh(), x.sinh() / gamma))
        }
        GammaBranch::Imaginary => {
            let omega = (-gc.gamma_sq).sqrt();
            let x = omega * g;
            Ok((x.cos(), x.sin() / omega))
        }
        GammaBranch::Zero => {
            // series in z = gamma^2 g^2; exact at the branch point and
            // accurate to well below 1e-14 anywhere the Zero branch fires
            let z = gc.gamma_sq * g * g;
            let c = 1.0 + z * (0.5 + z * (1.0 / 24.0 + z / 720.0));
            let s = g * (1.0 + z * (1.0 / 6.0 + z * (1.0 / 120.0 + z / 5040.0)));
            Ok((c, s))
        }
    }
}

/// `exp(g M)` across all three branches.
///
/// Exact at `g = 0` (identity) and equal to the matrix-exponential oracle to
/// better than 1e-10 everywhere else.
pub fn exp_s(gc: &GammaClass, alpha: f64, beta: f64, g: f64) -> Result<Mat2, NumericsError> {
    let (c, s) = exp_s_coefficients(gc, g)?;
    let m = structure_generator(alpha, beta);
    let out = Mat2 {
        m11: c + s * m.m11,
        m12: s * m.m12,
        m21: s * m.m21,
        m22: c + s * m.m22,
    };
    if !out.is_finite() {
        return Err(NumericsError::Overflow {
            context: "structured exponential",
        });
    }
    Ok(out)
}

/// Limit verdict for the norm of the fundamental matrix as `t` grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticVerdict {
    NormDiverges,
    NormVanishes,
    NormBounded,
    NormPeriodic,
    NormPeriodicOrQuasiperiodic,
    Inconclusive,
}

/// The closed-form fundamental matrix of a [`StructuredSystem`].
///
/// `Phi(t0) = I` exactly; `det Phi(t) = exp(2 f + beta g)` (Liouville).
/// Evaluation is read-only apart from the primitive cache inside the system,
/// which is lock-guarded, so a `FundamentalMatrix` may be shared across
/// threads.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    system: StructuredSystem,
    gamma: GammaClass,
}

impl FundamentalMatrix {
    pub fn new(system: StructuredSystem) -> Self {
        let gamma = GammaClass::classify(system.alpha(), system.beta());
        Self { system, gamma }
    }

    pub fn system(&self) -> &StructuredSystem {
        &self.system
    }

    pub fn gamma(&self) -> &GammaClass {
        &self.gamma
    }

    /// Entries of `Phi(t)` without the finiteness check, for integrator
    /// plumbing.
    fn phi_entries(&self, t: f64) -> Result<[f64; 4], NumericsError> {
        let f = self.system.f(t)?;
        let g = self.system.g(t)?;
        let beta = self.system.beta();
        let prefactor = (f + 0.5 * beta * g).exp();
        let (c, s) = exp_s_coefficients(&self.gamma, g)?;
        let m = structure_generator(self.system.alpha(), beta);
        Ok([
            prefactor * (c + s * m.m11),
            prefactor * (s * m.m12),
            prefactor * (s * m.m21),
            prefactor * (c + s * m.m22),
        ])
    }

    fn phi_inverse_entries(&self, t: f64) -> Result<[f64; 4], NumericsError> {
        let f = self.system.f(t)?;
        let g = self.system.g(t)?;
        let beta = self.system.beta();
        let prefactor = (-(f + 0.5 * beta * g)).exp();
        // exp(g M)^{-1} = exp(-g M)
        let (c, s) = exp_s_coefficients(&self.gamma, -g)?;
        let m = structure_generator(self.system.alpha(), beta);
        Ok([
            prefactor * (c + s * m.m11),
            prefactor * (s * m.m12),
            prefactor * (s * m.m21),
            prefactor * (c + s * m.m22),
        ])
    }

    /// `Phi(t)`.
    pub fn phi(&self, t: f64) -> Result<Mat2, NumericsError> {
        let e = self.phi_entries(t)?;
        if e.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Overflow {
                context: "fundamental matrix",
            });
        }
        Ok(Mat2::new(e[0], e[1], e[2], e[3]))
    }

    /// `Phi(t)^{-1}`, in closed form (no numeric inversion).
    pub fn phi_inverse(&self, t: f64) -> Result<Mat2, NumericsError> {
        let e = self.phi_inverse_entries(t)?;
        if e.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Overflow {
                context: "inverse fundamental matrix",
            });
        }
        Ok(Mat2::new(e[0], e[1], e[2], e[3]))
    }

    /// Solution of the initial value problem: `x(t) = Phi(t) x0`.
    pub fn solve_ivp(&self, x0: Vec2, t: f64) -> Result<Vec2, NumericsError> {
        Ok(self.phi(t)? * x0)
    }

    /// `ln det Phi(t) = 2 f(t) + beta g(t)`; the Liouville identity makes
    /// this exact up to integration error.
    pub fn log_det_phi(&self, t: f64) -> Result<f64, NumericsError> {
        Ok(2.0 * self.system.f(t)? + self.system.beta() * self.system.g(t)?)
    }

    /// Central-difference residual of the defining property
    /// `Phi' = A Phi`, normalized by `||Phi||`.
    pub fn defining_residual(&self, t: f64, h: f64) -> Result<f64, NumericsError> {
        let plus = self.phi(t + h)?;
        let minus = self.phi(t - h)?;
        let phi = self.phi(t)?;
        let derivative = (plus - minus) * (0.5 / h);
        let residual = derivative - self.system.matrix_at(t) * phi;
        Ok(residual.spectral_norm() / phi.spectral_norm())
    }

    /// Limit classification of `||Phi(t)||` from declared or probed
    /// behaviour of the primitives `f` and `g`.
    pub fn classify_asymptotics(&self) -> AsymptoticVerdict {
        let (f_class, g_class) = self.system.primitive_classes();
        self.classify_asymptotics_with(f_class, g_class)
    }

    /// Same, with the limit classes of `f` and `g` supplied by the caller.
    ///
    /// The decision table mirrors the case analysis of the closed form; any
    /// combination outside it returns
    /// [`AsymptoticVerdict::Inconclusive`] rather than guessing.
    pub fn classify_asymptotics_with(
        &self,
        f_class: AsymptoticClass,
        g_class: AsymptoticClass,
    ) -> AsymptoticVerdict {
        use AsymptoticClass::*;
        let beta = self.system.beta();
        match self.gamma.branch {
            GammaBranch::RealPositive => {
                let growing_g = beta > 0.0 && f_class == Bounded && g_class == TendsToPosInf;
                let growing_f = f_class == TendsToPosInf && g_class == Bounded;
                if growing_g || growing_f {
                    AsymptoticVerdict::NormDiverges
                } else if f_class == TendsToNegInf && g_class == Bounded {
                    AsymptoticVerdict::NormVanishes
                } else {
                    AsymptoticVerdict::Inconclusive
                }
            }
            GammaBranch::Imaginary => {
                if self.scalar_exponent_vanishes() {
                    AsymptoticVerdict::NormPeriodic
                } else if self.scalar_exponent_periodic() {
                    AsymptoticVerdict::NormPeriodicOrQuasiperiodic
                } else {
                    AsymptoticVerdict::Inconclusive
                }
            }
            GammaBranch::Zero => {
                if f_class == Bounded && g_class == Bounded {
                    AsymptoticVerdict::NormBounded
                } else if f_class == TendsToZero && g_class == TendsToZero {
                    AsymptoticVerdict::NormVanishes
                } else if f_class == TendsToPosInf {
                    AsymptoticVerdict::NormDiverges
                } else if f_class == TendsToNegInf {
                    AsymptoticVerdict::NormVanishes
                } else {
                    AsymptoticVerdict::Inconclusive
                }
            }
        }
    }

    /// Scalar exponent `h(t) = f(t) + (beta/2) g(t)` of the prefactor.
    fn scalar_exponent(&self, t: f64) -> Result<f64, NumericsError> {
        Ok(self.system.f(t)? + 0.5 * self.system.beta() * self.system.g(t)?)
    }

    /// Does `h = f + (beta/2) g` vanish identically on the probe grid?
    fn scalar_exponent_vanishes(&self) -> bool {
        let (a, b) = self.system.window();
        for &t in &chebyshev_grid(a, b, PROBE_POINTS) {
            match self.scalar_exponent(t) {
                Ok(h) => {
                    let scale = 1.0 + t.abs();
                    if h.abs() > 1e-8 * scale {
                        return false;
                    }
                }
                Err(_) => return false,
            }
        }
        true
    }

    /// Is `h` periodic with the declared coefficient period? Without a
    /// declared period this reports false (and the caller stays
    /// inconclusive) rather than guessing one.
    fn scalar_exponent_periodic(&self) -> bool {
        let period = match self
            .system
            .a11()
            .period()
            .or_else(|| self.system.a12().period())
        {
            Some(p) => p,
            None => return false,
        };
        let (a, b) = self.system.window();
        for &t in &chebyshev_grid(a, b, PROBE_POINTS) {
            let (h0, h1) = match (self.scalar_exponent(t), self.scalar_exponent(t + period)) {
                (Ok(h0), Ok(h1)) => (h0, h1),
                _ => return false,
            };
            if (h1 - h0).abs() > 1e-8 * (1.0 + h0.abs()) {
                return false;
            }
        }
        true
    }

    /// Right-hand side of the transformed problem `y' = Phi^{-1} B(Phi y, t)`
    /// for the forced system `x' = A(t) x + B(x, t)`.
    ///
    /// Since `Phi(t0) = I`, the initial condition carries over unchanged:
    /// `y(t0) = x0`. Recover states with [`FundamentalMatrix::recover`].
    /// Evaluation failures (quadrature breakdown, prefactor overflow or
    /// underflow of `det Phi`) poison the output with NaN, which the
    /// integrator reports as a step-size underflow.
    pub fn transformed_rhs<'a, B>(&'a self, forcing: B) -> impl Fn(f64, Vec2) -> Vec2 + 'a
    where
        B: Fn(Vec2, f64) -> Vec2 + 'a,
    {
        move |t, y| {
            let phi = match self.phi_entries(t) {
                Ok(e) if e.iter().all(|v| v.is_finite()) => e,
                _ => return Vec2 { x1: f64::NAN, x2: f64::NAN },
            };
            let inv = match self.phi_inverse_entries(t) {
                Ok(e) if e.iter().all(|v| v.is_finite()) => e,
                _ => return Vec2 { x1: f64::NAN, x2: f64::NAN },
            };
            let x = Vec2 {
                x1: phi[0] * y.x1 + phi[1] * y.x2,
                x2: phi[2] * y.x1 + phi[3] * y.x2,
            };
            let b = forcing(x, t);
            Vec2 {
                x1: inv[0] * b.x1 + inv[1] * b.x2,
                x2: inv[2] * b.x1 + inv[3] * b.x2,
            }
        }
    }

    /// Maps a transformed state back: `x(t) = Phi(t) y(t)`.
    pub fn recover(&self, t: f64, y: Vec2) -> Result<Vec2, NumericsError> {
        Ok(self.phi(t)? * y)
    }

    /// Integrates the forced system `x' = A(t) x + B(x, t)` by the change of
    /// indeterminate through `Phi`, returning `x` samples at the accepted
    /// integrator steps (endpoint included).
    pub fn solve_nonhomogeneous<B>(
        &self,
        forcing: B,
        x0: Vec2,
        t1: f64,
        rel_tol: f64,
        abs_tol: f64,
    ) -> Result<Vec<(f64, Vec2)>, NumericsError>
    where
        B: Fn(Vec2, f64) -> Vec2,
    {
        let rhs = self.transformed_rhs(forcing);
        let sol: OdeSolution = rk45(rhs, self.system.t0(), x0, t1, rel_tol, abs_tol)?;
        sol.samples()
            .map(|(t, y)| Ok((t, self.recover(t, y)?)))
            .collect()
    }
}
