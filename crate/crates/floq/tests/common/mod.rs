//! Shared fixtures for the integration suites: the benchmark periodic
//! system and seeded random families of commuting-class systems.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use floq::sysmodel::{CoefficientFunction, StructuredSystem};

/// The benchmark periodic family member used across the suites:
/// `a11 = -1 - cos^2 t`, `a12 = -cos^2 t`, `alpha = beta = -2`, period pi.
/// Its exponents are `-1 +- i/2` and the solution through `(0, 1)` has
/// `x1(t) = -exp(-t) sin(t/2 + sin t cos t / 2)`.
#[allow(dead_code)]
pub fn benchmark_system() -> StructuredSystem {
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

/// Benchmark family member for arbitrary `(sigma0, sigma1, sigma2)` with
/// `a(t) = cos^2 t`: `a11 = sigma0 - a`, `a12 = -sigma2 a`,
/// `alpha = -sigma1/sigma2`, `beta = -2/sigma2`.
#[allow(dead_code)] // each test binary uses its own subset of these helpers
pub fn sigma_family(sigma0: f64, sigma1: f64, sigma2: f64) -> StructuredSystem {
    let a11 = CoefficientFunction::from_fn(move |t: f64| sigma0 - t.cos().powi(2))
        .with_antiderivative(move |t: f64| sigma0 * t - 0.5 * t - 0.25 * (2.0 * t).sin())
        .unwrap()
        .with_period(PI)
        .unwrap();
    let a12 = CoefficientFunction::from_fn(move |t: f64| -sigma2 * t.cos().powi(2))
        .with_antiderivative(move |t: f64| -sigma2 * (0.5 * t + 0.25 * (2.0 * t).sin()))
        .unwrap()
        .with_period(PI)
        .unwrap();
    StructuredSystem::new(a11, a12, -sigma1 / sigma2, -2.0 / sigma2)
}

/// Polynomial-plus-trigonometric coefficient (scaled by `scale`) with its
/// exact antiderivative.
pub fn random_coefficient(rng: &mut ChaCha8Rng, scale: f64) -> CoefficientFunction {
    let c0 = scale * rng.gen_range(-0.25..0.25);
    let c1 = scale * rng.gen_range(-0.15..0.15);
    let c2 = scale * rng.gen_range(-0.05..0.05);
    let amp_sin = scale * rng.gen_range(-0.4..0.4);
    let freq_sin: f64 = rng.gen_range(0.5..2.5);
    let amp_cos = scale * rng.gen_range(-0.4..0.4);
    let freq_cos: f64 = rng.gen_range(0.5..2.5);
    CoefficientFunction::from_fn(move |t: f64| {
        c0 + c1 * t
            + c2 * t * t
            + amp_sin * (freq_sin * t).sin()
            + amp_cos * (freq_cos * t).cos()
    })
    .with_probe_window(-3.0, 3.0)
    .with_antiderivative(move |t: f64| {
        c0 * t + 0.5 * c1 * t * t + c2 * t * t * t / 3.0
            - amp_sin * (freq_sin * t).cos() / freq_sin
            + amp_cos * (freq_cos * t).sin() / freq_cos
    })
    .unwrap()
}

/// Structure constants stratified over the three spectral branches;
/// `selector % 3` picks the branch, and the branch-point stratum includes
/// discriminants at exactly zero and at `+-1e-10`/`+-1e-9`.
pub fn stratified_alpha_beta(rng: &mut ChaCha8Rng, selector: usize) -> (f64, f64) {
    match selector % 3 {
        0 => loop {
            let alpha = rng.gen_range(-3.0..3.0);
            let beta = rng.gen_range(-3.0..3.0);
            if alpha + beta * beta / 4.0 > 0.05 {
                return (alpha, beta);
            }
        },
        1 => loop {
            let alpha = rng.gen_range(-3.0..3.0);
            let beta = rng.gen_range(-3.0..3.0);
            if alpha + beta * beta / 4.0 < -0.05 {
                return (alpha, beta);
            }
        },
        _ => {
            let beta = rng.gen_range(-3.0..3.0f64);
            let offsets = [0.0, 1e-10, -1e-10, 1e-9, -1e-9];
            let delta = offsets[rng.gen_range(0..offsets.len())];
            (-beta * beta / 4.0 + delta, beta)
        }
    }
}

/// Random commuting-class system on the window `[-3, 3]`, covering all
/// three branches of the discriminant. The `a12` amplitude is damped by the
/// structure constants so that `alpha * a12` cannot blow up the matrix norm
/// (and with it the finite-difference error of residual checks).
pub fn random_system(rng: &mut ChaCha8Rng, selector: usize) -> StructuredSystem {
    let (alpha, beta) = stratified_alpha_beta(rng, selector);
    let damping = 1.0 / (1.0 + alpha.abs().max(beta.abs()));
    StructuredSystem::new(
        random_coefficient(rng, 1.0),
        random_coefficient(rng, damping),
        alpha,
        beta,
    )
    .with_window(-3.0, 3.0)
}

/// Random `T`-periodic commuting-class system (declared periods, closed
/// antiderivatives, means kept small so multiplier magnitudes stay tame).
pub fn random_periodic_system(rng: &mut ChaCha8Rng, selector: usize) -> (StructuredSystem, f64) {
    let period = rng.gen_range(1.0..4.0);
    let omega = 2.0 * PI / period;
    let (alpha, beta) = stratified_alpha_beta(rng, selector);

    let periodic_coefficient = |rng: &mut ChaCha8Rng| {
        let mean = rng.gen_range(-0.1..0.1);
        let a1 = rng.gen_range(-0.6..0.6);
        let b1 = rng.gen_range(-0.6..0.6);
        let a2 = rng.gen_range(-0.3..0.3);
        CoefficientFunction::from_fn(move |t: f64| {
            mean + a1 * (omega * t).cos() + b1 * (omega * t).sin() + a2 * (2.0 * omega * t).cos()
        })
        .with_probe_window(0.0, period)
        .with_antiderivative(move |t: f64| {
            mean * t + a1 * (omega * t).sin() / omega - b1 * (omega * t).cos() / omega
                + a2 * (2.0 * omega * t).sin() / (2.0 * omega)
        })
        .unwrap()
        .with_period(period)
        .unwrap()
    };

    let a11 = periodic_coefficient(rng);
    let a12 = periodic_coefficient(rng);
    let system = StructuredSystem::new(a11, a12, alpha, beta).with_window(0.0, period);
    (system, period)
}
