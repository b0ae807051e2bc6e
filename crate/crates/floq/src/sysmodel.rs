//! Coefficient functions and planar systems.
//!
//! A [`StructuredSystem`] is the commuting class this crate is about: the
//! coefficient matrix
//!
//! ```text
//! A(t) = [ a11(t)          a12(t)                 ]
//!        [ alpha * a12(t)  a11(t) + beta * a12(t) ]
//! ```
//!
//! lies in the span of the identity and one fixed matrix, so A(t) commutes
//! both with its primitive `D(t)` and with its derivative. A
//! [`GeneralSystem`] is an unrestricted planar system; [`GeneralSystem::fit_structure`]
//! projects it onto the commuting class and rejects it when the residual
//! says it does not belong.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::expr::Expression;
use crate::numerics::{integrate, Mat2, NumericsError};

/// Shared scalar function of time.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Quadrature tolerance for coefficient primitives; kept below the 1e-8
/// commutation tolerance so integration error stays subdominant.
pub const PRIMITIVE_TOL: f64 = 1e-10;

/// Number of Chebyshev probe points used for construction-time checks and
/// structure fitting.
pub const PROBE_POINTS: usize = 33;

/// Declared (or probed) limit behaviour of a scalar function of time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticClass {
    Bounded,
    TendsToPosInf,
    TendsToNegInf,
    TendsToZero,
    Unknown,
}

/// Errors from system construction and structure fitting.
#[derive(Debug, Clone, Error)]
pub enum SystemError {
    #[error("declared antiderivative disagrees with the coefficient at t = {t}: slope {measured}, value {claimed}")]
    AntiderivativeMismatch { t: f64, claimed: f64, measured: f64 },
    #[error("declared derivative disagrees with the coefficient slope at t = {t}: got {claimed}, measured {measured}")]
    DerivativeMismatch { t: f64, claimed: f64, measured: f64 },
    #[error("declared period {period} violated at t = {t} (deviation {deviation:.3e})")]
    PeriodViolated { t: f64, period: f64, deviation: f64 },
    #[error("coefficient is not finite at probe time t = {t}")]
    NonFiniteCoefficient { t: f64 },
    #[error("not in the commuting class: structure residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    NotCommutingClass { residual: f64, threshold: f64 },
    #[error("a12 vanishes on the whole grid; alpha and beta are unidentifiable")]
    DegenerateA12,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Chebyshev-spaced probe grid on `[a, b]`: resolves polynomial and
/// trigonometric variation much better than uniform spacing at equal cost.
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && b > a);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n)
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            mid - half * theta.cos()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CoefficientFunction
// ---------------------------------------------------------------------------

/// A scalar coefficient of the system: its value, plus optional closed-form
/// antiderivative, closed-form derivative, declared period, and declared
/// asymptotic behaviour.
///
/// Metadata declared through the `with_*` builders is spot-checked on a
/// probe grid at construction; a declaration that disagrees with the value
/// function is rejected. Evaluation is re-entrant and the type is cheap to
/// clone (the closures are shared).
#[derive(Clone)]
pub struct CoefficientFunction {
    value: ScalarFn,
    antiderivative: Option<ScalarFn>,
    derivative: Option<ScalarFn>,
    period: Option<f64>,
    asymptotic: AsymptoticClass,
    probe_window: (f64, f64),
}

impl std::fmt::Debug for CoefficientFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientFunction")
            .field("has_antiderivative", &self.antiderivative.is_some())
            .field("has_derivative", &self.derivative.is_some())
            .field("period", &self.period)
            .field("asymptotic", &self.asymptotic)
            .field("probe_window", &self.probe_window)
            .finish()
    }
}

impl CoefficientFunction {
    pub fn from_fn<F>(value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            antiderivative: None,
            derivative: None,
            period: None,
            asymptotic: AsymptoticClass::Unknown,
            probe_window: (0.0, 10.0),
        }
    }

    /// Wraps a parsed expression; domain failures of the expression surface
    /// as NaN and are caught by the numeric layers downstream.
    pub fn from_expr(expression: &Expression) -> Self {
        let e = expression.clone();
        Self::from_fn(move |t| e.eval_or_nan(t))
    }

    /// Constant coefficient, with its antiderivative and derivative
    /// attached for free.
    pub fn constant(c: f64) -> Self {
        let mut cf = Self::from_fn(move |_| c);
        cf.antiderivative = Some(Arc::new(move |t| c * t));
        cf.derivative = Some(Arc::new(|_| 0.0));
        cf.asymptotic = AsymptoticClass::Bounded;
        cf
    }

    /// Sets the window used by construction-time spot checks. Call this
    /// before attaching metadata that needs validating.
    pub fn with_probe_window(mut self, a: f64, b: f64) -> Self {
        assert!(b > a, "probe window must be non-degenerate");
        self.probe_window = (a, b);
        self
    }

    /// Attaches a closed-form antiderivative after checking that its slope
    /// reproduces the coefficient to 1e-6 on the probe grid.
    pub fn with_antiderivative<F>(mut self, primitive: F) -> Result<Self, SystemError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let primitive: ScalarFn = Arc::new(primitive);
        for &t in &chebyshev_grid(self.probe_window.0, self.probe_window.1, PROBE_POINTS) {
            let h = 1e-6 * (1.0 + t.abs());
            let slope = (primitive(t + h) - primitive(t - h)) / (2.0 * h);
            let v = (self.value)(t);
            if !v.is_finite() || !slope.is_finite() {
                return Err(SystemError::NonFiniteCoefficient { t });
            }
            if (slope - v).abs() > 1e-6 * (1.0 + v.abs()) {
                return Err(SystemError::AntiderivativeMismatch {
                    t,
                    claimed: v,
                    measured: slope,
                });
            }
        }
        self.antiderivative = Some(primitive);
        Ok(self)
    }

    /// Attaches a closed-form derivative, spot-checked against central
    /// differences of the value.
    pub fn with_derivative<F>(mut self, derivative: F) -> Result<Self, SystemError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let derivative: ScalarFn = Arc::new(derivative);
        for &t in &chebyshev_grid(self.probe_window.0, self.probe_window.1, PROBE_POINTS) {
            let h = 1e-5 * (1.0 + t.abs());
            let slope = ((self.value)(t + h) - (self.value)(t - h)) / (2.0 * h);
            let d = derivative(t);
            if !d.is_finite() || !slope.is_finite() {
                return Err(SystemError::NonFiniteCoefficient { t });
            }
            if (slope - d).abs() > 1e-4 * (1.0 + d.abs()) {
                return Err(SystemError::DerivativeMismatch {
                    t,
                    claimed: d,
                    measured: slope,
                });
            }
        }
        self.derivative = Some(derivative);
        Ok(self)
    }

    /// Declares a period, checked as `value(t + T) = value(t)` to 1e-10 on
    /// the probe grid.
    pub fn with_period(mut self, period: f64) -> Result<Self, SystemError> {
        assert!(period > 0.0, "period must be positive");
        for &t in &chebyshev_grid(self.probe_window.0, self.probe_window.1, PROBE_POINTS) {
            let a = (self.value)(t);
            let b = (self.value)(t + period);
            if !a.is_finite() || !b.is_finite() {
                return Err(SystemError::NonFiniteCoefficient { t });
            }
            let deviation = (a - b).abs();
            if deviation > 1e-10 * (1.0 + a.abs()) {
                return Err(SystemError::PeriodViolated {
                    t,
                    period,
                    deviation,
                });
            }
        }
        self.period = Some(period);
        Ok(self)
    }

    pub fn with_asymptotic(mut self, class: AsymptoticClass) -> Self {
        self.asymptotic = class;
        self
    }

    pub fn value_at(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn asymptotic(&self) -> AsymptoticClass {
        self.asymptotic
    }

    pub fn has_antiderivative(&self) -> bool {
        self.antiderivative.is_some()
    }

    /// Signed integral over `[t0, t]`: the closed-form antiderivative when
    /// one was supplied, adaptive quadrature otherwise.
    pub fn primitive(&self, t0: f64, t: f64) -> Result<f64, NumericsError> {
        if let Some(primitive) = &self.antiderivative {
            return Ok(primitive(t) - primitive(t0));
        }
        let value = self.value.clone();
        integrate(move |s| value(s), t0, t, PRIMITIVE_TOL, PRIMITIVE_TOL)
            .map(|r| r.value)
    }

    /// Derivative at `t`: the closed form when supplied, otherwise 4th-order
    /// central differences with `h = 1e-5 * (1 + |t|)`.
    pub fn derivative_at(&self, t: f64) -> f64 {
        if let Some(derivative) = &self.derivative {
            return derivative(t);
        }
        let h = 1e-5 * (1.0 + t.abs());
        let f = |x: f64| (self.value)(x);
        (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
    }
}

// ---------------------------------------------------------------------------
// Planar systems
// ---------------------------------------------------------------------------

/// Anything that behaves as a planar linear system `x' = A(t) x`.
pub trait PlanarSystem {
    fn base_time(&self) -> f64;

    /// Coefficient values `[a11, a12, a21, a22]` at `t`. Entries may be NaN
    /// when an underlying coefficient fails; integrators treat that as a
    /// singularity.
    fn entries_at(&self, t: f64) -> [f64; 4];

    /// The coefficient matrix at `t`; panics on non-finite entries, so use
    /// [`PlanarSystem::entries_at`] inside integrator right-hand sides.
    fn matrix_at(&self, t: f64) -> Mat2 {
        let [a11, a12, a21, a22] = self.entries_at(t);
        Mat2::new(a11, a12, a21, a22)
    }

    /// `tr A(t)`.
    fn trace_at(&self, t: f64) -> f64 {
        let e = self.entries_at(t);
        e[0] + e[3]
    }
}

/// An unrestricted planar system: four independent coefficients.
#[derive(Clone, Debug)]
pub struct GeneralSystem {
    pub a11: CoefficientFunction,
    pub a12: CoefficientFunction,
    pub a21: CoefficientFunction,
    pub a22: CoefficientFunction,
    t0: f64,
    window: (f64, f64),
}

impl GeneralSystem {
    pub fn new(
        a11: CoefficientFunction,
        a12: CoefficientFunction,
        a21: CoefficientFunction,
        a22: CoefficientFunction,
    ) -> Self {
        Self {
            a11,
            a12,
            a21,
            a22,
            t0: 0.0,
            window: (0.0, 10.0),
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_window(mut self, a: f64, b: f64) -> Self {
        assert!(b > a);
        self.window = (a, b);
        self
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Default fitting grid: Chebyshev points on the analysis window.
    pub fn default_grid(&self) -> Vec<f64> {
        chebyshev_grid(self.window.0, self.window.1, PROBE_POINTS)
    }

    /// Least-squares fit of the structure constants `alpha`, `beta`.
    ///
    /// Minimizes the pointwise residuals of `a21 = alpha * a12` and
    /// `a22 - a11 = beta * a12` over the grid, then accepts the system only
    /// if the worst residual stays within `tol * (1 + max |a12|)`.
    pub fn fit_structure(
        &self,
        grid: &[f64],
        tol: f64,
    ) -> Result<StructuredSystem, SystemError> {
        assert!(grid.len() >= 8, "fitting grid needs at least 8 points");
        assert!(tol > 0.0, "fit tolerance must be positive");

        let mut rows = Vec::with_capacity(grid.len());
        let mut max_entry = 0.0f64;
        for &t in grid {
            let e = [
                self.a11.value_at(t),
                self.a12.value_at(t),
                self.a21.value_at(t),
                self.a22.value_at(t),
            ];
            if e.iter().any(|v| !v.is_finite()) {
                return Err(SystemError::NonFiniteCoefficient { t });
            }
            max_entry = max_entry.max(e.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            rows.push(e);
        }

        let max_a12 = rows.iter().fold(0.0f64, |m, e| m.max(e[1].abs()));
        if max_a12 <= 1e-12 * (1.0 + max_entry) {
            return Err(SystemError::DegenerateA12);
        }

        let denom: f64 = rows.iter().map(|e| e[1] * e[1]).sum();
        let alpha: f64 = rows.iter().map(|e| e[2] * e[1]).sum::<f64>() / denom;
        let beta: f64 = rows.iter().map(|e| (e[3] - e[0]) * e[1]).sum::<f64>() / denom;

        let residual = rows.iter().fold(0.0f64, |m, e| {
            let r1 = (e[2] - alpha * e[1]).abs();
            let r2 = (e[3] - e[0] - beta * e[1]).abs();
            m.max(r1).max(r2)
        });
        let threshold = tol * (1.0 + max_a12);
        if residual > threshold {
            return Err(SystemError::NotCommutingClass {
                residual,
                threshold,
            });
        }

        Ok(
            StructuredSystem::new(self.a11.clone(), self.a12.clone(), alpha, beta)
                .with_t0(self.t0)
                .with_window(self.window.0, self.window.1),
        )
    }
}

impl PlanarSystem for GeneralSystem {
    fn base_time(&self) -> f64 {
        self.t0
    }

    fn entries_at(&self, t: f64) -> [f64; 4] {
        [
            self.a11.value_at(t),
            self.a12.value_at(t),
            self.a21.value_at(t),
            self.a22.value_at(t),
        ]
    }
}

type PrimitiveCache = Arc<Mutex<HashMap<(u64, bool), f64>>>;

/// A system in the commuting class, with constants `alpha`, `beta` fixed.
///
/// Immutable after construction; primitive evaluations computed through
/// quadrature are memoized behind a lock so concurrent evaluation is safe.
#[derive(Clone, Debug)]
pub struct StructuredSystem {
    a11: CoefficientFunction,
    a12: CoefficientFunction,
    alpha: f64,
    beta: f64,
    t0: f64,
    window: (f64, f64),
    cache: PrimitiveCache,
}

impl StructuredSystem {
    pub fn new(
        a11: CoefficientFunction,
        a12: CoefficientFunction,
        alpha: f64,
        beta: f64,
    ) -> Self {
        assert!(alpha.is_finite() && beta.is_finite());
        Self {
            a11,
            a12,
            alpha,
            beta,
            t0: 0.0,
            window: (0.0, 10.0),
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_window(mut self, a: f64, b: f64) -> Self {
        assert!(b > a);
        self.window = (a, b);
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn a11(&self) -> &CoefficientFunction {
        &self.a11
    }

    pub fn a12(&self) -> &CoefficientFunction {
        &self.a12
    }

    /// `f(t)`: integral of `a11` from the base time.
    pub fn f(&self, t: f64) -> Result<f64, NumericsError> {
        self.cached_primitive(&self.a11, t, false)
    }

    /// `g(t)`: integral of `a12` from the base time.
    pub fn g(&self, t: f64) -> Result<f64, NumericsError> {
        self.cached_primitive(&self.a12, t, true)
    }

    fn cached_primitive(
        &self,
        cf: &CoefficientFunction,
        t: f64,
        is_g: bool,
    ) -> Result<f64, NumericsError> {
        if cf.has_antiderivative() {
            // closed form is cheap; no point paying for the lock
            return cf.primitive(self.t0, t);
        }
        let key = (t.to_bits(), is_g);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = cf.primitive(self.t0, t)?;
        self.cache.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// The primitive matrix `D(t)` (entrywise integral of `A` from `t0`).
    pub fn primitive_matrix(&self, t: f64) -> Result<Mat2, NumericsError> {
        let f = self.f(t)?;
        let g = self.g(t)?;
        Ok(Mat2::new(f, g, self.alpha * g, f + self.beta * g))
    }

    /// Entrywise time average of `A` over `[t0, t0 + period]`.
    ///
    /// For `T`-periodic coefficients the eigenvalues of this matrix are the
    /// Floquet exponents of the system.
    pub fn average_matrix(&self, period: f64) -> Result<Mat2, NumericsError> {
        assert!(period > 0.0, "averaging period must be positive");
        let b11 = self.f(self.t0 + period)? / period;
        let b12 = self.g(self.t0 + period)? / period;
        Ok(Mat2::new(
            b11,
            b12,
            self.alpha * b12,
            b11 + self.beta * b12,
        ))
    }

    /// Maximum deviation from `T`-periodicity of the two coefficients over
    /// the probe grid; used to warn before a Floquet analysis.
    pub fn periodicity_deviation(&self, period: f64) -> f64 {
        let grid = chebyshev_grid(self.window.0, self.window.1, PROBE_POINTS);
        grid.iter()
            .map(|&t| {
                let d11 = (self.a11.value_at(t + period) - self.a11.value_at(t)).abs();
                let d12 = (self.a12.value_at(t + period) - self.a12.value_at(t)).abs();
                d11.max(d12)
            })
            .fold(0.0, f64::max)
    }

    /// Worst normalized commutation residual `||A D - D A||` over the probe
    /// grid. Structurally zero for this class; the number reported is pure
    /// integration noise.
    pub fn commutation_residual(&self) -> Result<f64, NumericsError> {
        let grid = chebyshev_grid(self.window.0, self.window.1, PROBE_POINTS);
        let mut worst = 0.0f64;
        for &t in &grid {
            let a = self.matrix_at(t);
            let d = self.primitive_matrix(t)?;
            let comm = a * d - d * a;
            let scale = 1.0 + a.frobenius_norm() * d.frobenius_norm();
            worst = worst.max(comm.max_abs() / scale);
        }
        Ok(worst)
    }

    /// Worst normalized residual of `A(t) A'(t) - A'(t) A(t)` with the
    /// derivative taken by central differences.
    pub fn derivative_commutation_residual(&self) -> f64 {
        let grid = chebyshev_grid(self.window.0, self.window.1, PROBE_POINTS);
        let mut worst = 0.0f64;
        for &t in &grid {
            let a = self.matrix_at(t);
            let h = 1e-5 * (1.0 + t.abs());
            let ap = self.matrix_at(t + h);
            let am = self.matrix_at(t - h);
            let da = (ap - am) * (0.5 / h);
            let comm = a * da - da * a;
            let scale = 1.0 + a.frobenius_norm() * da.frobenius_norm();
            worst = worst.max(comm.max_abs() / scale);
        }
        worst
    }

    /// Reconstructs the four-coefficient view of this system.
    pub fn to_general(&self) -> GeneralSystem {
        let alpha = self.alpha;
        let beta = self.beta;
        let a12_for_a21 = self.a12.clone();
        let a11_for_a22 = self.a11.clone();
        let a12_for_a22 = self.a12.clone();
        let a21 = CoefficientFunction::from_fn(move |t| alpha * a12_for_a21.value_at(t));
        let a22 = CoefficientFunction::from_fn(move |t| {
            a11_for_a22.value_at(t) + beta * a12_for_a22.value_at(t)
        });
        GeneralSystem::new(self.a11.clone(), self.a12.clone(), a21, a22)
            .with_t0(self.t0)
            .with_window(self.window.0, self.window.1)
    }

    /// Limit classes of the primitives `f` and `g`, in that order.
    ///
    /// Declared metadata is used when it settles the question (a declared
    /// period turns the primitive into `mean * t` plus a bounded part; a
    /// coefficient diverging to one side drags its primitive along).
    /// Otherwise the primitive is probed numerically on a long window; the
    /// probe is a heuristic and returns [`AsymptoticClass::Unknown`] when
    /// the evidence is mixed.
    pub fn primitive_classes(&self) -> (AsymptoticClass, AsymptoticClass) {
        let f_class = self.primitive_class_of(&self.a11, false);
        let g_class = self.primitive_class_of(&self.a12, true);
        (f_class, g_class)
    }

    fn primitive_class_of(&self, cf: &CoefficientFunction, is_g: bool) -> AsymptoticClass {
        if let Some(period) = cf.period() {
            let mean = match cf.primitive(self.t0, self.t0 + period) {
                Ok(v) => v / period,
                Err(_) => return AsymptoticClass::Unknown,
            };
            let scale = 1.0 + cf.value_at(self.t0).abs();
            return if mean.abs() <= 1e-9 * scale {
                AsymptoticClass::Bounded
            } else if mean > 0.0 {
                AsymptoticClass::TendsToPosInf
            } else {
                AsymptoticClass::TendsToNegInf
            };
        }
        match cf.asymptotic() {
            AsymptoticClass::TendsToPosInf => return AsymptoticClass::TendsToPosInf,
            AsymptoticClass::TendsToNegInf => return AsymptoticClass::TendsToNegInf,
            _ => {}
        }
        self.probe_primitive(is_g)
    }

    /// Numeric tail probe of a primitive on a geometrically stretched grid.
    fn probe_primitive(&self, is_g: bool) -> AsymptoticClass {
        let horizon = 20.0 * (self.window.1 - self.window.0).max(1.0);
        let n = 24usize;
        let mut values = Vec::with_capacity(n);
        for j in 1..=n {
            let frac = j as f64 / n as f64;
            let t = self.t0 + horizon * frac * frac;
            let v = if is_g { self.g(t) } else { self.f(t) };
            match v {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return AsymptoticClass::Unknown,
            }
        }
        // the quadratic probe spacing puts the first half of the samples on
        // [t0, t0 + horizon/4], so even linear growth shows a head/tail
        // ratio of about 4
        let (head, tail) = values.split_at(n / 2);
        let head_max = head.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail_max = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = &tail[tail.len() - 5..];
        let monotone_up = last.windows(2).all(|w| w[1].abs() >= w[0].abs());
        let monotone_down = last.windows(2).all(|w| w[1].abs() <= w[0].abs());
        let sign_consistent = last.iter().all(|v| v.signum() == last[0].signum());

        if monotone_up && sign_consistent && tail_max >= 3.0 * head_max.max(1e-6) {
            return if last[0] > 0.0 {
                AsymptoticClass::TendsToPosInf
            } else {
                AsymptoticClass::TendsToNegInf
            };
        }
        if monotone_down && tail_max <= 1e-3 * head_max.max(1e-6) {
            return AsymptoticClass::TendsToZero;
        }
        if tail_max <= 1.5 * head_max + 1e-9 {
            return AsymptoticClass::Bounded;
        }
        AsymptoticClass::Unknown
    }
}

impl PlanarSystem for StructuredSystem {
    fn base_time(&self) -> f64 {
        self.t0
    }

    fn entries_at(&self, t: f64) -> [f64; 4] {
        let a11 = self.a11.value_at(t);
        let a12 = self.a12.value_at(t);
        [a11, a12, self.alpha * a12, a11 + self.beta * a12]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// The benchmark periodic system used throughout: a two-parameter family
    /// with a11 = s0 - a(t), a12 = -s2 a(t), a(t) = cos^2 t, and structure
    /// constants alpha = -s1/s2, beta = -2/s2.
    fn benchmark_system() -> StructuredSystem {
        let a11 = CoefficientFunction::from_fn(|t: f64| -1.0 - t.cos().powi(2))
            .with_antiderivative(|t: f64| -1.5 * t - 0.25 * (2.0 * t).sin())
            .unwrap()
            .with_period(PI)
            .unwrap();
        let a12 = CoefficientFunction::from_fn(|t: f64| -t.cos().powi(2))
            .with_antiderivative(|t: f64| -0.5 * t - 0.25 * (2.0 * t).sin())
            .unwrap()
            .with_period(PI)
            .unwrap();
        StructuredSystem::new(a11, a12, -2.0, -2.0)
    }

    #[test]
    fn fit_recovers_benchmark_constants() {
        // general form of the benchmark: a21 = 2 cos^2 t, a22 = -1 + cos^2 t
        let g = GeneralSystem::new(
            CoefficientFunction::from_fn(|t: f64| -1.0 - t.cos().powi(2)),
            CoefficientFunction::from_fn(|t: f64| -t.cos().powi(2)),
            CoefficientFunction::from_fn(|t: f64| 2.0 * t.cos().powi(2)),
            CoefficientFunction::from_fn(|t: f64| -1.0 + t.cos().powi(2)),
        );
        let s = g.fit_structure(&g.default_grid(), 1e-8).unwrap();
        assert!((s.alpha() + 2.0).abs() < 1e-12);
        assert!((s.beta() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_commuting_system_rejected() {
        // a21/a12 = t is not constant
        let g = GeneralSystem::new(
            CoefficientFunction::constant(0.0),
            CoefficientFunction::constant(1.0),
            CoefficientFunction::from_fn(|t| t),
            CoefficientFunction::constant(0.0),
        )
        .with_window(0.0, 3.0);
        let err = g.fit_structure(&g.default_grid(), 1e-6).unwrap_err();
        assert!(matches!(err, SystemError::NotCommutingClass { .. }));
        // even a sloppy tolerance like 0.1 cannot absorb a residual of ~1.5
        let err = g.fit_structure(&g.default_grid(), 0.1).unwrap_err();
        assert!(matches!(err, SystemError::NotCommutingClass { .. }));
    }

    #[test]
    fn degenerate_a12_rejected() {
        let g = GeneralSystem::new(
            CoefficientFunction::from_fn(|t: f64| t.sin()),
            CoefficientFunction::constant(0.0),
            CoefficientFunction::constant(0.0),
            CoefficientFunction::from_fn(|t: f64| t.sin()),
        );
        let err = g.fit_structure(&g.default_grid(), 1e-8).unwrap_err();
        assert!(matches!(err, SystemError::DegenerateA12));
    }

    #[test]
    fn unit_coefficient_integrates_to_t() {
        let s = StructuredSystem::new(
            CoefficientFunction::constant(1.0),
            CoefficientFunction::constant(0.0),
            0.0,
            0.0,
        );
        for t in [0.5, 1.0, 2.5, -1.0] {
            assert!((s.f(t).unwrap() - t).abs() < 1e-12);
            assert_eq!(s.g(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn gaussian_coefficient_primitive_matches_erfi() {
        // integral of exp(s^2) = sqrt(pi)/2 * erfi(t)
        let s = StructuredSystem::new(
            CoefficientFunction::constant(0.0),
            CoefficientFunction::from_fn(|t: f64| (t * t).exp()).with_probe_window(0.0, 2.0),
            1.0,
            0.0,
        )
        .with_window(0.0, 2.0);
        let g1 = s.g(1.0).unwrap();
        assert!((g1 - 1.4626517459071815).abs() < 1e-10, "g(1) = {g1}");
        let closed = 0.5 * PI.sqrt() * crate::special::erfi(1.0).unwrap();
        assert!((g1 - closed).abs() < 1e-10);
    }

    #[test]
    fn cosine_squared_primitive_over_half_period() {
        let s = StructuredSystem::new(
            CoefficientFunction::constant(0.0),
            CoefficientFunction::from_fn(|t: f64| t.cos().powi(2)),
            0.0,
            0.0,
        );
        assert!((s.g(PI).unwrap() - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn benchmark_average_matrix() {
        let s = benchmark_system();
        let b = s.average_matrix(PI).unwrap();
        assert!((b.m11 + 1.5).abs() < 1e-12);
        assert!((b.m12 + 0.5).abs() < 1e-12);
        assert!((b.m21 - 1.0).abs() < 1e-12);
        assert!((b.m22 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_system_average_is_itself() {
        let s = StructuredSystem::new(
            CoefficientFunction::constant(0.7),
            CoefficientFunction::constant(-0.3),
            1.2,
            0.4,
        );
        for period in [0.5, 1.0, 7.0] {
            let b = s.average_matrix(period).unwrap();
            assert!((b - s.matrix_at(0.0)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn sine_plus_cosine_averages() {
        // a11 = sin t averages to 0 over a full period, a12 = 1 + cos t to 1
        let a11 = CoefficientFunction::from_fn(|t: f64| t.sin())
            .with_antiderivative(|t: f64| -t.cos())
            .unwrap();
        let a12 = CoefficientFunction::from_fn(|t: f64| 1.0 + t.cos())
            .with_antiderivative(|t: f64| t + t.sin())
            .unwrap();
        let s = StructuredSystem::new(a11, a12, 0.5, -0.25);
        let b = s.average_matrix(2.0 * PI).unwrap();
        assert!(b.m11.abs() < 1e-12);
        assert!((b.m12 - 1.0).abs() < 1e-12);
        assert!((b.m21 - 0.5).abs() < 1e-12);
        assert!((b.m22 - (0.0 + -0.25)).abs() < 1e-12);
    }

    #[test]
    fn commutation_residual_is_noise_level() {
        let s = benchmark_system();
        assert!(s.commutation_residual().unwrap() < 1e-8);
        assert!(s.derivative_commutation_residual() < 1e-8);
    }

    #[test]
    fn antiderivative_validation_rejects_wrong_primitive() {
        let r = CoefficientFunction::from_fn(|t: f64| t.sin())
            .with_antiderivative(|t: f64| t.cos()); // missing minus sign
        assert!(matches!(r, Err(SystemError::AntiderivativeMismatch { .. })));
    }

    #[test]
    fn period_validation_rejects_wrong_period() {
        let r = CoefficientFunction::from_fn(|t: f64| t.sin()).with_period(3.0);
        assert!(matches!(r, Err(SystemError::PeriodViolated { .. })));
    }

    #[test]
    fn supplied_antiderivative_agrees_with_quadrature() {
        let with = CoefficientFunction::from_fn(|t: f64| (0.5 * t).sin() * t)
            .with_antiderivative(|t: f64| {
                // integral of t sin(t/2): 4 sin(t/2) - 2 t cos(t/2)
                4.0 * (0.5 * t).sin() - 2.0 * t * (0.5 * t).cos()
            })
            .unwrap();
        let without = CoefficientFunction::from_fn(|t: f64| (0.5 * t).sin() * t);
        for t in [0.7, 2.0, 5.5] {
            let a = with.primitive(0.0, t).unwrap();
            let b = without.primitive(0.0, t).unwrap();
            assert!((a - b).abs() < 1e-8, "at t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn average_matrix_matches_independent_entrywise_quadrature() {
        let s = benchmark_system();
        let period = PI;
        let b = s.average_matrix(period).unwrap();
        for (idx, want) in [b.m11, b.m12, b.m21, b.m22].into_iter().enumerate() {
            let got = crate::numerics::integrate(
                |t| s.entries_at(t)[idx],
                0.0,
                period,
                1e-12,
                1e-13,
            )
            .unwrap()
            .value
                / period;
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_primitive_classes() {
        let s = benchmark_system();
        // both coefficients have strictly negative mean, so f and g diverge down
        let (f_class, g_class) = s.primitive_classes();
        assert_eq!(f_class, AsymptoticClass::TendsToNegInf);
        assert_eq!(g_class, AsymptoticClass::TendsToNegInf);
    }

    #[test]
    fn zero_mean_periodic_primitive_is_bounded() {
        let a11 = CoefficientFunction::from_fn(|t: f64| t.sin())
            .with_period(2.0 * PI)
            .unwrap();
        let a12 = CoefficientFunction::constant(0.0);
        let s = StructuredSystem::new(a11, a12, 0.0, 0.0);
        let (f_class, _) = s.primitive_classes();
        assert_eq!(f_class, AsymptoticClass::Bounded);
    }

    #[test]
    fn probed_divergence_detected() {
        // no metadata at all: 1 + sin t integrates to t - cos t + 1 -> +inf
        let s = StructuredSystem::new(
            CoefficientFunction::from_fn(|t: f64| 1.0 + t.sin()),
            CoefficientFunction::constant(0.0),
            0.0,
            0.0,
        );
        let (f_class, _) = s.primitive_classes();
        assert_eq!(f_class, AsymptoticClass::TendsToPosInf);
    }

    #[test]
    fn concurrent_primitive_evaluation() {
        let s = std::sync::Arc::new(benchmark_system());
        let mut handles = Vec::new();
        for k in 0..4 {
            let s = s.clone();
            handles.push(std::thread::spawn(move || {
                let t = 0.3 + 0.1 * k as f64;
                s.f(t).unwrap() + s.g(t).unwrap()
            }));
        }
        for h in handles {
            assert!(h.join().unwrap().is_finite());
        }
    }
}
