//! Cross-module numeric invariants on seeded random families.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use floq::floquet::{
    exponent_set_deviation, exponents_from_monodromy, floquet_from_averages, monodromy_numeric,
    stability_verdict, trace_identities, StabilityVerdict,
};
use floq::fundamental::FundamentalMatrix;
use floq::numerics::{eig2, expm2, rk45, CMat2, CVec2, Mat2, Vec2};
use floq::sysmodel::PlanarSystem;

fn random_matrix(rng: &mut ChaCha8Rng, scale: f64) -> Mat2 {
    Mat2::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

#[test]
fn eigen_decomposition_reconstructs_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 200 {
        let m = random_matrix(&mut rng, 5.0);
        let e = eig2(&m);
        if e.defective || (e.values[0] - e.values[1]).norm() < 1e-3 {
            continue;
        }
        done += 1;
        let v = CMat2::from_columns(e.vectors[0], e.vectors[1]);
        let rebuilt = v * CMat2::diagonal(e.values[0], e.values[1]) * v.inverse().unwrap();
        let diff = (rebuilt - CMat2::from(m)).max_abs();
        assert!(
            diff <= 1e-10 * (1.0 + m.max_abs()),
            "reconstruction off by {diff:.3e} for {m}"
        );
    }
}

#[test]
fn eigen_pairs_satisfy_the_defining_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let m = random_matrix(&mut rng, 5.0);
        let e = eig2(&m);
        for (lam, v) in e.values.iter().zip(e.vectors.iter()) {
            let mc = CMat2::from(m);
            let mv = mc * *v;
            let residual = CVec2::new(mv.x1 - lam * v.x1, mv.x2 - lam * v.x2).norm();
            assert!(residual <= 1e-8 * (1.0 + m.max_abs()));
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn matrix_exponential_inverse_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let m = random_matrix(&mut rng, 5.0); // norm <= 10
        let a = expm2(&m).unwrap();
        let b = expm2(&(-m)).unwrap();
        let diff = (a * b - Mat2::identity()).max_abs();
        assert!(diff <= 1e-10 * a.max_abs().max(1.0), "off by {diff:.3e}");
    }
}

#[test]
fn matrix_exponential_group_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let m = random_matrix(&mut rng, 2.0);
        let s = rng.gen_range(-2.0..2.0);
        let t = rng.gen_range(-2.0..2.0);
        let lhs = expm2(&(m * s)).unwrap() * expm2(&(m * t)).unwrap();
        let rhs = expm2(&(m * (s + t))).unwrap();
        let diff = (lhs - rhs).max_abs();
        assert!(diff <= 1e-10 * rhs.max_abs().max(1.0));
    }
}

#[test]
fn matrix_exponential_determinant_is_exp_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let m = random_matrix(&mut rng, 3.0);
        let det = expm2(&m).unwrap().det();
        let expected = m.trace().exp();
        assert!((det - expected).abs() <= 1e-10 * expected.abs().max(1.0));
    }
}

#[test]
fn integrator_matches_exponential_on_constant_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..25 {
        let m = random_matrix(&mut rng, 1.5);
        let x0 = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let t1 = rng.gen_range(0.5..3.0);
        let rel = 1e-9;
        let sol = rk45(|_, x| m * x, 0.0, x0, t1, rel, 1e-12).unwrap();
        let expected = expm2(&(m * t1)).unwrap() * x0;
        let err = (sol.endpoint().1 - expected).norm();
        assert!(
            err <= 10.0 * rel * expected.norm().max(1.0),
            "integrator off by {err:.3e}"
        );
    }
}

#[test]
fn structured_systems_commute_with_their_primitives() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..30 {
        let s = common::random_system(&mut rng, k);
        assert!(s.commutation_residual().unwrap() <= 1e-8);
        assert!(s.derivative_commutation_residual() <= 1e-8);
    }
}

#[test]
fn commutation_holds_at_random_probe_times() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let s = common::random_system(&mut rng, 0);
    for _ in 0..100 {
        let t = rng.gen_range(-3.0..3.0);
        let a = s.matrix_at(t);
        let d = s.primitive_matrix(t).unwrap();
        let comm = (a * d - d * a).max_abs();
        assert!(comm <= 1e-8 * (1.0 + a.frobenius_norm() * d.frobenius_norm()));
    }
}

#[test]
fn closed_form_equals_exponential_oracle_on_random_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for k in 0..40 {
        let s = common::random_system(&mut rng, k);
        let fm = FundamentalMatrix::new(s);
        for _ in 0..5 {
            let t = rng.gen_range(-3.0..3.0);
            let phi = fm.phi(t).unwrap();
            let oracle = expm2(&fm.system().primitive_matrix(t).unwrap()).unwrap();
            let diff = (phi - oracle).max_abs() / oracle.max_abs().max(1.0);
            assert!(diff <= 1e-10, "branch {:?}: deviation {diff:.3e}", fm.gamma().branch);
        }
    }
}

#[test]
fn pipelines_agree_on_random_periodic_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..50 {
        let (s, period) = common::random_periodic_system(&mut rng, k);
        let averaged = floquet_from_averages(&s, period).unwrap();
        let integrated =
            exponents_from_monodromy(&monodromy_numeric(&s, period, 1e-10).unwrap()).unwrap();
        let dev = exponent_set_deviation(&averaged.exponents, &integrated.exponents, period);
        assert!(dev <= 1e-6, "system {k}: pipelines deviate by {dev:.3e}");
    }
}

#[test]
fn exponent_multiplier_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..30 {
        let (s, period) = common::random_periodic_system(&mut rng, k);
        let data = floquet_from_averages(&s, period).unwrap();
        for (lam, rho) in data.exponents.iter().zip(data.multipliers.iter()) {
            // rho = exp(lambda T) holds by construction; the round trip
            // back through the principal logarithm must reproduce lambda
            let back = Complex64::new(rho.norm().ln(), rho.arg()) / period;
            assert!((back - lam).norm() <= 1e-12 * (1.0 + lam.norm()));
        }
    }
}

#[test]
fn stability_verdict_equals_sign_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for k in 0..40 {
        let (s, period) = common::random_periodic_system(&mut rng, k);
        let data = floquet_from_averages(&s, period).unwrap();
        let verdict = stability_verdict(&data);
        let max_re = data.max_real_exponent();
        let expected = if max_re > 1e-9 {
            StabilityVerdict::Unstable
        } else if max_re < -1e-9 {
            StabilityVerdict::AsymptoticallyStable
        } else if data.defective {
            StabilityVerdict::Unstable
        } else {
            StabilityVerdict::Stable
        };
        assert_eq!(verdict, expected);
    }
}

#[test]
fn liouville_on_random_periodic_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for k in 0..30 {
        let (s, _) = common::random_periodic_system(&mut rng, k);
        let fm = FundamentalMatrix::new(s);
        for _ in 0..5 {
            let t = rng.gen_range(0.0..4.0);
            let det = fm.phi(t).unwrap().det();
            let expected = fm.log_det_phi(t).unwrap().exp();
            assert!((det - expected).abs() <= 1e-8 * expected.abs().max(1e-8));
        }
    }
}

#[test]
fn trace_residuals_on_random_periodic_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for k in 0..25 {
        let (s, period) = common::random_periodic_system(&mut rng, k);
        let report = trace_identities(&s, period, 1e-11).unwrap();
        assert!(
            report.exponent_sum_residual <= 1e-8,
            "system {k}: sum residual {:.3e}",
            report.exponent_sum_residual
        );
        assert!(
            report.multiplier_product_residual <= 1e-8,
            "system {k}: product residual {:.3e}",
            report.multiplier_product_residual
        );
    }
}

#[test]
fn monodromy_shift_identity_on_benchmark() {
    // Phi(t + T) = Phi(t) C with both sides integrated numerically
    let s = common::benchmark_system();
    let monodromy = monodromy_numeric(&s, PI, 1e-10).unwrap();
    let rhs = |t: f64, x: Vec2| {
        let e = s.entries_at(t);
        Vec2 {
            x1: e[0] * x.x1 + e[1] * x.x2,
            x2: e[2] * x.x1 + e[3] * x.x2,
        }
    };
    let t = 0.7;
    for x0 in [Vec2::unit_x(), Vec2::unit_y()] {
        let at_t = rk45(rhs, 0.0, x0, t, 1e-11, 1e-13).unwrap().endpoint().1;
        let at_t_plus = rk45(rhs, 0.0, x0, t + PI, 1e-11, 1e-13)
            .unwrap()
            .endpoint()
            .1;
        // Phi(t+T) x0 = Phi(t) (C x0)
        let shifted = rk45(rhs, 0.0, monodromy.matrix * x0, t, 1e-11, 1e-13)
            .unwrap()
            .endpoint()
            .1;
        assert!((at_t_plus - shifted).norm() <= 1e-6 * at_t.norm().max(1.0));
    }
}

#[test]
fn scalar_reduction_round_trips_on_random_systems() {
    use floq::reduction::{second_order_from_structured, system_from_second_order};
    use floq::sysmodel::{CoefficientFunction, StructuredSystem};

    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for k in 0..20 {
        // sign-definite a12: offset 1.2 with oscillation amplitude <= 0.9
        let a = rng.gen_range(-0.5..0.5);
        let b = rng.gen_range(-0.4..0.4);
        let w1: f64 = rng.gen_range(0.5..2.0);
        let w2: f64 = rng.gen_range(0.5..2.0);
        let a12 = CoefficientFunction::from_fn(move |t: f64| {
            1.2 + a * (w1 * t).sin() + b * (w2 * t).cos()
        });
        let c = rng.gen_range(-0.4..0.4);
        let d = rng.gen_range(-0.4..0.4);
        let w3: f64 = rng.gen_range(0.5..2.0);
        let a11 = CoefficientFunction::from_fn(move |t: f64| c + d * (w3 * t).sin());
        let (alpha, beta) = common::stratified_alpha_beta(&mut rng, k);
        let system = StructuredSystem::new(a11, a12, alpha, beta).with_window(0.0, 3.0);

        let equation = second_order_from_structured(&system).unwrap();
        let companion = system_from_second_order(&equation);

        let x0 = Vec2::new(1.0, -0.3);
        let e0 = system.entries_at(0.0);
        let companion_x0 = Vec2::new(x0.x1, e0[0] * x0.x1 + e0[1] * x0.x2);
        let rhs_direct = |t: f64, x: Vec2| {
            let e = system.entries_at(t);
            Vec2 {
                x1: e[0] * x.x1 + e[1] * x.x2,
                x2: e[2] * x.x1 + e[3] * x.x2,
            }
        };
        let rhs_reduced = |t: f64, x: Vec2| {
            let e = companion.entries_at(t);
            Vec2 {
                x1: e[0] * x.x1 + e[1] * x.x2,
                x2: e[2] * x.x1 + e[3] * x.x2,
            }
        };
        let direct = rk45(rhs_direct, 0.0, x0, 3.0, 1e-11, 1e-13).unwrap();
        let reduced = rk45(rhs_reduced, 0.0, companion_x0, 3.0, 1e-11, 1e-13).unwrap();
        for i in 0..=30 {
            let t = 0.1 * i as f64;
            let lhs = direct.sample(t).x1;
            let rhs = reduced.sample(t).x1;
            assert!(
                (lhs - rhs).abs() <= 1e-7 * (1.0 + lhs.abs()),
                "system {k}, t = {t}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn structured_fit_round_trips_through_general_view() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for k in 0..20 {
        let s = common::random_system(&mut rng, k);
        let g = s.to_general();
        let refit = g.fit_structure(&g.default_grid(), 1e-8).unwrap();
        assert!((refit.alpha() - s.alpha()).abs() <= 1e-9 * (1.0 + s.alpha().abs()));
        assert!((refit.beta() - s.beta()).abs() <= 1e-9 * (1.0 + s.beta().abs()));
    }
}
