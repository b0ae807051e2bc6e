//! Conversions between scalar second-order equations and planar systems.
//!
//! Eliminating `x2` from a commuting-class system turns the first component
//! into a solution of
//!
//! ```text
//! x'' - (2 a11 + s) x' + (a11^2 + a11 s - a11' - alpha a12^2) x = 0,
//! s(t) = beta a12 + a12'/a12,
//! ```
//!
//! valid wherever `a12` does not vanish. The reverse direction is the usual
//! companion form. The derivation is validated numerically by round-tripping
//! trajectories through the integrator rather than trusting any printed
//! formula.

use thiserror::Error;

use crate::fundamental::FundamentalMatrix;
use crate::numerics::{NumericsError, Vec2};
use crate::special;
use crate::sysmodel::{
    chebyshev_grid, CoefficientFunction, GeneralSystem, StructuredSystem, SystemError,
};

#[derive(Debug, Clone, Error)]
pub enum ReductionError {
    #[error("a12 vanishes near t = {t}; the scalar reduction divides by a12")]
    ZeroCrossing { t: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// A scalar equation `x'' + p(t) x' + q(t) x = 0` with normalized leading
/// coefficient.
#[derive(Debug, Clone)]
pub struct SecondOrderEquation {
    pub damping: CoefficientFunction,
    pub stiffness: CoefficientFunction,
}

/// Scalar reduction of a structured system.
///
/// Requires `a12` to be bounded away from zero on the analysis window
/// (checked on a dense grid); derivatives of the coefficients use their
/// closed forms when supplied and high-order central differences otherwise.
pub fn second_order_from_structured(
    system: &StructuredSystem,
) -> Result<SecondOrderEquation, ReductionError> {
    let (lo, hi) = system.window();
    let grid = chebyshev_grid(lo, hi, 129);
    let max_a12 = grid
        .iter()
        .fold(0.0f64, |m, &t| m.max(system.a12().value_at(t).abs()));
    let mut previous: Option<(f64, f64)> = None;
    for &t in &grid {
        let v = system.a12().value_at(t);
        if !v.is_finite() || v.abs() <= 1e-9 * (1.0 + max_a12) {
            return Err(ReductionError::ZeroCrossing { t });
        }
        if let Some((tp, vp)) = previous {
            if v.signum() != vp.signum() {
                return Err(ReductionError::ZeroCrossing { t: 0.5 * (t + tp) });
            }
        }
        previous = Some((t, v));
    }

    let alpha = system.alpha();
    let beta = system.beta();

    let a11_p = system.a11().clone();
    let a12_p = system.a12().clone();
    let damping = CoefficientFunction::from_fn(move |t| {
        let a11 = a11_p.value_at(t);
        let a12 = a12_p.value_at(t);
        let s = beta * a12 + a12_p.derivative_at(t) / a12;
        -(2.0 * a11 + s)
    });

    let a11_q = system.a11().clone();
    let a12_q = system.a12().clone();
    let stiffness = CoefficientFunction::from_fn(move |t| {
        let a11 = a11_q.value_at(t);
        let a12 = a12_q.value_at(t);
        let s = beta * a12 + a12_q.derivative_at(t) / a12;
        a11 * a11 + a11 * s - a11_q.derivative_at(t) - alpha * a12 * a12
    });

    Ok(SecondOrderEquation { damping, stiffness })
}

/// Companion system of `x'' + p x' + q x = 0`: state `(x, x')` with
/// `x1' = x2`, `x2' = -q x1 - p x2`.
pub fn system_from_second_order(equation: &SecondOrderEquation) -> GeneralSystem {
    let q = equation.stiffness.clone();
    let p = equation.damping.clone();
    GeneralSystem::new(
        CoefficientFunction::constant(0.0),
        CoefficientFunction::constant(1.0),
        CoefficientFunction::from_fn(move |t| -q.value_at(t)),
        CoefficientFunction::from_fn(move |t| -p.value_at(t)),
    )
}

/// The parametric-oscillator member of the class: fixing `a11 = -beta a12`
/// collapses the reduction to
/// `x'' + (beta a12 - a12'/a12) x' - alpha a12^2 x = 0`.
pub fn parametric_oscillator(
    alpha: f64,
    beta: f64,
    a12: CoefficientFunction,
) -> StructuredSystem {
    let a12_for_a11 = a12.clone();
    let a11 = CoefficientFunction::from_fn(move |t| -beta * a12_for_a11.value_at(t));
    StructuredSystem::new(a11, a12, alpha, beta)
}

/// Constant-coefficient damped oscillator `x'' + nu x' + omega^2 x = 0`
/// realized inside the commuting class via `alpha = -1`, `beta = nu/omega`,
/// `a12 = omega`.
pub fn damped_oscillator_system(nu: f64, omega: f64) -> StructuredSystem {
    parametric_oscillator(-1.0, nu / omega, CoefficientFunction::constant(omega))
}

/// The Gaussian-coefficient system `a12 = exp(t^2)`, `a11 = -s(t)/2`, whose
/// primitive `g(t) = (sqrt(pi)/2) erfi(t)` has a closed form even though the
/// scalar equation defeats symbolic solvers.
pub fn gaussian_coefficient_system(
    alpha: f64,
    beta: f64,
) -> Result<StructuredSystem, ReductionError> {
    let a12 = CoefficientFunction::from_fn(|t: f64| (t * t).exp())
        .with_probe_window(-2.5, 2.5)
        .with_antiderivative(|t: f64| {
            0.5 * std::f64::consts::PI.sqrt() * special::erfi(t).unwrap_or(f64::NAN)
        })?
        .with_derivative(|t: f64| 2.0 * t * (t * t).exp())?;
    // a11 = -s/2 = -(beta e^{t^2} + 2 t) / 2, integrating to
    // -(beta g(t) + t^2) / 2
    let a11 = CoefficientFunction::from_fn(move |t: f64| -0.5 * (beta * (t * t).exp() + 2.0 * t))
        .with_probe_window(-2.5, 2.5)
        .with_antiderivative(move |t: f64| {
            let g = 0.5 * std::f64::consts::PI.sqrt() * special::erfi(t).unwrap_or(f64::NAN);
            -0.5 * (beta * g + t * t)
        })?;
    Ok(StructuredSystem::new(a11, a12, alpha, beta).with_window(-3.0, 3.0))
}

/// Evaluates the closed-form solution of the Gaussian-coefficient system at
/// `t` for the initial state `x0`.
///
/// Guarded to `|t| <= 3`, where `erfi` (and with it every entry of the
/// fundamental matrix) stays far from overflow.
pub fn erfi_example(
    t: f64,
    alpha: f64,
    beta: f64,
    x0: Vec2,
) -> Result<Vec2, ReductionError> {
    if t.abs() > 3.0 {
        return Err(ReductionError::Numerics(NumericsError::Overflow {
            context: "Gaussian-coefficient example beyond |t| = 3",
        }));
    }
    let system = gaussian_coefficient_system(alpha, beta)?;
    let fm = FundamentalMatrix::new(system);
    Ok(fm.solve_ivp(x0, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rk45;
    use crate::sysmodel::PlanarSystem;
    use std::f64::consts::PI;

    fn rhs_of<S: PlanarSystem + Clone + 'static>(system: &S) -> impl Fn(f64, Vec2) -> Vec2 {
        let s = system.clone();
        move |t, x| {
            let e = s.entries_at(t);
            Vec2 {
                x1: e[0] * x.x1 + e[1] * x.x2,
                x2: e[2] * x.x1 + e[3] * x.x2,
            }
        }
    }

    #[test]
    fn damped_oscillator_coefficients() {
        // nu = 0.5, omega = 2 gives x'' + 0.5 x' + 4 x = 0
        let s = damped_oscillator_system(0.5, 2.0);
        let eq = second_order_from_structured(&s).unwrap();
        for t in [0.0, 1.0, 3.7] {
            assert!((eq.damping.value_at(t) - 0.5).abs() < 1e-9);
            assert!((eq.stiffness.value_at(t) - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parametric_oscillator_reduction_form() {
        // with a11 = -beta a12 the reduction must read
        // p = beta a12 - a12'/a12, q = -alpha a12^2
        let (alpha, beta) = (0.8, -0.6);
        let a12 = CoefficientFunction::from_fn(|t: f64| 2.0 + t.sin());
        let s = parametric_oscillator(alpha, beta, a12).with_window(0.0, 6.0);
        let eq = second_order_from_structured(&s).unwrap();
        for t in [0.3f64, 1.9, 4.4] {
            let a12 = 2.0 + t.sin();
            let da12 = t.cos();
            let p_expected = beta * a12 - da12 / a12;
            let q_expected = -alpha * a12 * a12;
            assert!((eq.damping.value_at(t) - p_expected).abs() < 1e-7);
            assert!((eq.stiffness.value_at(t) - q_expected).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_crossing_rejected() {
        // a12 = cos t crosses zero at pi/2, inside the default window
        let s = StructuredSystem::new(
            CoefficientFunction::constant(0.1),
            CoefficientFunction::from_fn(|t: f64| t.cos()),
            1.0,
            0.5,
        );
        let err = second_order_from_structured(&s).unwrap_err();
        match err {
            ReductionError::ZeroCrossing { t } => {
                assert!((0.0..10.0).contains(&t));
            }
            other => panic!("expected zero crossing, got {other}"),
        }
    }

    #[test]
    fn companion_of_harmonic_oscillator() {
        let eq = SecondOrderEquation {
            damping: CoefficientFunction::constant(0.0),
            stiffness: CoefficientFunction::constant(1.0),
        };
        let g = system_from_second_order(&eq);
        let m = g.matrix_at(0.0);
        assert_eq!((m.m11, m.m12, m.m21, m.m22), (0.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn companion_of_damped_oscillator() {
        let eq = SecondOrderEquation {
            damping: CoefficientFunction::constant(0.5),
            stiffness: CoefficientFunction::constant(4.0),
        };
        let g = system_from_second_order(&eq);
        let m = g.matrix_at(1.0);
        assert_eq!((m.m11, m.m12, m.m21, m.m22), (0.0, 1.0, -4.0, -0.5));
    }

    #[test]
    fn round_trip_preserves_first_component() {
        // structured system -> scalar equation -> companion system; the
        // first components of both trajectories must coincide
        let a11 = CoefficientFunction::from_fn(|t: f64| 0.3 * t.sin() - 0.1);
        let a12 = CoefficientFunction::from_fn(|t: f64| 1.5 + 0.5 * t.cos());
        let s = StructuredSystem::new(a11, a12, -0.7, 0.4).with_window(0.0, 4.0);
        let eq = second_order_from_structured(&s).unwrap();
        let companion = system_from_second_order(&eq);

        let x0 = Vec2::new(1.0, -0.5);
        // companion state is (x1, x1'), with x1' = a11 x1 + a12 x2
        let e0 = s.entries_at(0.0);
        let companion_x0 = Vec2::new(x0.x1, e0[0] * x0.x1 + e0[1] * x0.x2);

        let direct = rk45(rhs_of(&s), 0.0, x0, 3.0, 1e-11, 1e-13).unwrap();
        let reduced = rk45(rhs_of(&companion), 0.0, companion_x0, 3.0, 1e-11, 1e-13).unwrap();
        for i in 0..=30 {
            let t = 0.1 * i as f64;
            let a = direct.sample(t).x1;
            let b = reduced.sample(t).x1;
            assert!((a - b).abs() < 1e-7, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn damped_oscillator_matches_textbook_solution() {
        // companion system of x'' + nu x' + omega^2 x = 0 solved in closed
        // form by the engine; initial state (x, x') = (1, 0)
        let (nu, omega) = (0.5, 2.0);
        let eq = SecondOrderEquation {
            damping: CoefficientFunction::constant(nu),
            stiffness: CoefficientFunction::constant(omega * omega),
        };
        let companion = system_from_second_order(&eq).with_window(0.0, 10.0);
        let s = companion
            .fit_structure(&companion.default_grid(), 1e-10)
            .unwrap();
        assert!((s.alpha() + omega * omega).abs() < 1e-12);
        assert!((s.beta() + nu).abs() < 1e-12);
        let fm = FundamentalMatrix::new(s);
        let omega_d = (omega * omega - nu * nu / 4.0).sqrt();
        for i in 0..=100 {
            let t = 0.1 * i as f64;
            let x = fm.solve_ivp(Vec2::new(1.0, 0.0), t).unwrap();
            let expected =
                (-0.5 * nu * t).exp() * ((omega_d * t).cos() + nu / (2.0 * omega_d) * (omega_d * t).sin());
            assert!(
                (x.x1 - expected).abs() < 1e-8,
                "t = {t}: {} vs {expected}",
                x.x1
            );
        }
    }

    #[test]
    fn constant_a12_makes_s_exact() {
        // s = beta a12 + a12'/a12 collapses to beta omega for constant a12
        let s = damped_oscillator_system(0.3, 1.5);
        let eq = second_order_from_structured(&s).unwrap();
        // p = -(2 a11 + s) with a11 = -nu: s = beta omega = nu, p = 2 nu - nu = nu
        for t in [0.0, 2.0, 7.5] {
            assert!((eq.damping.value_at(t) - 0.3).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_example_initial_state() {
        let x0 = Vec2::new(1.0, 0.0);
        let x = erfi_example(0.0, 1.0, 0.0, x0).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn gaussian_primitive_closed_form() {
        let s = gaussian_coefficient_system(1.0, 0.0).unwrap();
        let g1 = s.g(1.0).unwrap();
        assert!((g1 - 1.4626517459071815).abs() < 1e-12);
    }

    #[test]
    fn gaussian_example_matches_integrator() {
        let (alpha, beta) = (1.0, 0.0);
        let s = gaussian_coefficient_system(alpha, beta).unwrap();
        let x0 = Vec2::new(1.0, 0.0);
        let t1 = 1.2;
        let closed = erfi_example(t1, alpha, beta, x0).unwrap();
        let numeric = rk45(rhs_of(&s), 0.0, x0, t1, 1e-11, 1e-13)
            .unwrap()
            .endpoint()
            .1;
        assert!(
            (closed - numeric).norm() <= 1e-6 * numeric.norm(),
            "closed {closed} vs numeric {numeric}"
        );
    }

    #[test]
    fn gaussian_example_overflow_guard() {
        let r = erfi_example(3.5, 1.0, 0.0, Vec2::new(1.0, 0.0));
        assert!(matches!(r, Err(ReductionError::Numerics(_))));
    }

    #[test]
    fn gaussian_round_trip_through_second_order() {
        // the scalar form of the Gaussian system cannot be solved
        // symbolically, but the round trip through the companion system
        // still reproduces the closed-form first component
        let s = gaussian_coefficient_system(1.0, 0.5)
            .unwrap()
            .with_window(0.0, 1.5);
        let eq = second_order_from_structured(&s).unwrap();
        let companion = system_from_second_order(&eq);
        let x0 = Vec2::new(1.0, 0.5);
        let e0 = s.entries_at(0.0);
        let companion_x0 = Vec2::new(x0.x1, e0[0] * x0.x1 + e0[1] * x0.x2);
        let fm = FundamentalMatrix::new(s);
        let numeric = rk45(rhs_of(&companion), 0.0, companion_x0, 1.2, 1e-11, 1e-13).unwrap();
        for i in 0..=12 {
            let t = 0.1 * i as f64;
            let closed = fm.solve_ivp(x0, t).unwrap().x1;
            let reduced = numeric.sample(t).x1;
            assert!(
                (closed - reduced).abs() < 1e-6 * (1.0 + closed.abs()),
                "t = {t}: {closed} vs {reduced}"
            );
        }
    }

    #[test]
    fn window_avoiding_the_crossing_is_accepted() {
        // cos t is safe on (2, 4) even though it vanishes at pi/2
        let s = StructuredSystem::new(
            CoefficientFunction::constant(0.0),
            CoefficientFunction::from_fn(|t: f64| t.cos()),
            0.5,
            0.0,
        )
        .with_window(2.0, PI);
        assert!(second_order_from_structured(&s).is_ok());
    }
}
