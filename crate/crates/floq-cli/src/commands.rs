//! Command implementations: each returns a typed report for the renderer.

use num_complex::Complex64;
use serde::Serialize;

use floq::floquet::{
    exponent_set_deviation, exponents_from_monodromy, floquet_from_averages, monodromy_numeric,
    periodic_part, stability_verdict, trace_identities, StabilityVerdict,
};
use floq::fundamental::{AsymptoticVerdict, FundamentalMatrix, GammaBranch, GammaClass};
use floq::numerics::{eig2, rk45, Mat2, Vec2};
use floq::sysmodel::{chebyshev_grid, PlanarSystem, StructuredSystem};

use crate::problem::Problem;
use crate::CliError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im > 0.0 {
        format!("{} + {}i", z.re, z.im)
    } else {
        format!("{} - {}i", z.re, -z.im)
    }
}

fn matrix_rows(m: Mat2) -> [[f64; 2]; 2] {
    [[m.m11, m.m12], [m.m21, m.m22]]
}

fn branch_name(branch: GammaBranch) -> &'static str {
    match branch {
        GammaBranch::RealPositive => "real",
        GammaBranch::Zero => "zero",
        GammaBranch::Imaginary => "imaginary",
    }
}

fn verdict_name(v: AsymptoticVerdict) -> &'static str {
    match v {
        AsymptoticVerdict::NormDiverges => "norm diverges",
        AsymptoticVerdict::NormVanishes => "norm vanishes",
        AsymptoticVerdict::NormBounded => "norm bounded",
        AsymptoticVerdict::NormPeriodic => "norm periodic",
        AsymptoticVerdict::NormPeriodicOrQuasiperiodic => "norm periodic or quasiperiodic",
        AsymptoticVerdict::Inconclusive => "inconclusive",
    }
}

fn stability_name(v: StabilityVerdict) -> &'static str {
    match v {
        StabilityVerdict::AsymptoticallyStable => "asymptotically stable",
        StabilityVerdict::Stable => "stable (bounded, not attracting)",
        StabilityVerdict::Unstable => "unstable",
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    /// "given" when the file declared alpha/beta, "fitted" otherwise.
    pub constants_source: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
    pub gamma_sq: f64,
    pub branch: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_threshold: Option<f64>,
    pub commutation_residual: f64,
    pub derivative_commutation_residual: f64,
    pub asymptotics: &'static str,
}

pub fn analyze(problem: &Problem) -> Result<AnalyzeReport, CliError> {
    let (system, fit) = problem.structured()?;
    let gamma = GammaClass::classify(system.alpha(), system.beta());
    let commutation = system.commutation_residual().map_err(CliError::from)?;
    let derivative_commutation = system.derivative_commutation_residual();
    let fm = FundamentalMatrix::new(system.clone());
    let asymptotics = fm.classify_asymptotics();

    Ok(AnalyzeReport {
        constants_source: if fit.is_some() { "fitted" } else { "given" },
        alpha: system.alpha(),
        beta: system.beta(),
        t0: system.t0(),
        gamma_sq: gamma.gamma_sq,
        branch: branch_name(gamma.branch),
        gamma: gamma.gamma(),
        omega: gamma.omega(),
        fit_residual: fit.map(|f| f.residual),
        fit_threshold: fit.map(|f| f.tolerance),
        commutation_residual: commutation,
        derivative_commutation_residual: derivative_commutation,
        asymptotics: verdict_name(asymptotics),
    })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_x1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_dx1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_dx2: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub verified: bool,
    pub samples: Vec<TrajectoryRow>,
}

pub fn solve(problem: &Problem, verify: bool) -> Result<SolveReport, CliError> {
    let section = problem
        .solve
        .ok_or_else(|| CliError::Usage("the problem file has no [solve] section".to_string()))?;
    let (system, _) = problem.structured()?;
    let fm = FundamentalMatrix::new(system);
    let x0 = Vec2::new(section.x0[0], section.x0[1]);
    let n = section.samples.unwrap_or(101);
    let t0 = problem.t0;

    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = t0 + (section.t_end - t0) * k as f64 / (n - 1) as f64;
        let x = fm.solve_ivp(x0, t).map_err(CliError::from)?;
        let mut row = TrajectoryRow {
            t,
            x1: x.x1,
            x2: x.x2,
            oracle_x1: None,
            oracle_x2: None,
            abs_dx1: None,
            abs_dx2: None,
        };
        if verify {
            let reference = if t == t0 {
                x0
            } else {
                let s = fm.system().clone();
                let rhs = move |u: f64, y: Vec2| {
                    let e = s.entries_at(u);
                    Vec2 {
                        x1: e[0] * y.x1 + e[1] * y.x2,
                        x2: e[2] * y.x1 + e[3] * y.x2,
                    }
                };
                rk45(rhs, t0, x0, t, problem.tolerances.rel, problem.tolerances.abs)
                    .map_err(CliError::from)?
                    .endpoint()
                    .1
            };
            row.oracle_x1 = Some(reference.x1);
            row.oracle_x2 = Some(reference.x2);
            row.abs_dx1 = Some((x.x1 - reference.x1).abs());
            row.abs_dx2 = Some((x.x2 - reference.x2).abs());
        }
        samples.push(row);
    }
    Ok(SolveReport {
        verified: verify,
        samples,
    })
}

// ---------------------------------------------------------------------------
// floquet
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct AlphaZeroNote {
    /// Exponents from the uniform closed form (the implementation).
    pub uniform: [ComplexValue; 2],
    /// The simplified pair `(avg11 + (beta/2) avg12, avg11)` sometimes
    /// quoted for `alpha = 0`; exposed for comparison.
    pub simplified: [ComplexValue; 2],
}

#[derive(Debug, Serialize)]
pub struct FloquetReport {
    pub period: f64,
    pub averaged: [[f64; 2]; 2],
    pub exponents: [ComplexValue; 2],
    pub multipliers: [ComplexValue; 2],
    pub exponents_monodromy: [ComplexValue; 2],
    pub multipliers_monodromy: [ComplexValue; 2],
    pub pipeline_deviation: f64,
    pub average_trace: f64,
    pub exponent_sum_residual: f64,
    pub multiplier_product_residual: f64,
    pub stability: &'static str,
    pub defective: bool,
    /// True when an imaginary part was folded into the principal strip.
    pub strip_reduced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodicity_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_zero_note: Option<AlphaZeroNote>,
}

pub fn floquet(problem: &Problem) -> Result<FloquetReport, CliError> {
    let section = problem
        .floquet
        .ok_or_else(|| CliError::Usage("the problem file has no [floquet] section".to_string()))?;
    let period = section.period;
    let (system, _) = problem.structured()?;

    let periodicity_deviation = match (system.a11().period(), system.a12().period()) {
        (Some(_), Some(_)) => None,
        _ => {
            let dev = system.periodicity_deviation(period);
            if dev > 1e-8 {
                eprintln!(
                    "warning: coefficients deviate from {period}-periodicity by {dev:.3e}; \
                     the averaged exponents assume periodic coefficients"
                );
            }
            Some(dev)
        }
    };

    let data = floquet_from_averages(&system, period).map_err(CliError::from)?;
    let monodromy = monodromy_numeric(&system, period, problem.tolerances.rel)
        .map_err(CliError::from)?;
    let integrated = exponents_from_monodromy(&monodromy).map_err(CliError::from)?;
    let deviation = exponent_set_deviation(&data.exponents, &integrated.exponents, period);
    let trace = trace_identities(&system, period, problem.tolerances.rel)
        .map_err(CliError::from)?;

    let b = data
        .averaged_real()
        .expect("averages of a real system are real");
    let raw = eig2(&b).values;
    let strip_reduced = exponent_set_deviation_plain(&raw, &data.exponents) > 1e-12;

    let alpha_zero_note = (system.alpha().abs() <= 1e-12).then(|| AlphaZeroNote {
        uniform: [data.exponents[0].into(), data.exponents[1].into()],
        simplified: [
            Complex64::new(b.m11 + 0.5 * system.beta() * b.m12, 0.0).into(),
            Complex64::new(b.m11, 0.0).into(),
        ],
    });

    Ok(FloquetReport {
        period,
        averaged: matrix_rows(b),
        exponents: [data.exponents[0].into(), data.exponents[1].into()],
        multipliers: [data.multipliers[0].into(), data.multipliers[1].into()],
        exponents_monodromy: [
            integrated.exponents[0].into(),
            integrated.exponents[1].into(),
        ],
        multipliers_monodromy: [
            integrated.multipliers[0].into(),
            integrated.multipliers[1].into(),
        ],
        pipeline_deviation: deviation,
        average_trace: trace.average_trace,
        exponent_sum_residual: trace.exponent_sum_residual,
        multiplier_product_residual: trace.multiplier_product_residual,
        stability: stability_name(stability_verdict(&data)),
        defective: data.defective,
        strip_reduced,
        periodicity_deviation,
        alpha_zero_note,
    })
}

fn exponent_set_deviation_plain(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let d = |x: Complex64, y: Complex64| (x - y).norm();
    let straight = d(a[0], b[0]).max(d(a[1], b[1]));
    let crossed = d(a[0], b[1]).max(d(a[1], b[0]));
    straight.min(crossed)
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReducedCoefficients {
    /// Both coefficients are constant on the window.
    Constant { p: f64, q: f64, equation: String },
    /// Time-varying coefficients, tabulated over the window.
    Table { rows: Vec<[f64; 3]> },
}

#[derive(Debug, Serialize)]
pub struct ReduceReport {
    pub coefficients: ReducedCoefficients,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trip: Option<RoundTripCheck>,
}

#[derive(Debug, Serialize)]
pub struct RoundTripCheck {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn signed_term(v: f64, symbol: &str) -> String {
    if v < 0.0 {
        format!("- {} {symbol}", -v)
    } else {
        format!("+ {v} {symbol}")
    }
}

pub fn reduce(problem: &Problem, check: bool) -> Result<ReduceReport, CliError> {
    let (system, _) = problem.structured()?;
    let equation = floq::reduction::second_order_from_structured(&system)?;

    let (lo, hi) = system.window();
    let grid = chebyshev_grid(lo, hi, 33);
    let p_vals: Vec<f64> = grid.iter().map(|&t| equation.damping.value_at(t)).collect();
    let q_vals: Vec<f64> = grid.iter().map(|&t| equation.stiffness.value_at(t)).collect();
    let spread = |vals: &[f64]| {
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (max - min, 0.5 * (max + min))
    };
    let (p_spread, p_mid) = spread(&p_vals);
    let (q_spread, q_mid) = spread(&q_vals);

    let coefficients = if p_spread <= 1e-9 * (1.0 + p_mid.abs()) && q_spread <= 1e-9 * (1.0 + q_mid.abs())
    {
        ReducedCoefficients::Constant {
            p: p_mid,
            q: q_mid,
            equation: format!(
                "x'' {} {} = 0",
                signed_term(p_mid, "x'"),
                signed_term(q_mid, "x")
            ),
        }
    } else {
        let n = 33;
        let rows = (0..n)
            .map(|k| {
                let t = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                [
                    t,
                    equation.damping.value_at(t),
                    equation.stiffness.value_at(t),
                ]
            })
            .collect();
        ReducedCoefficients::Table { rows }
    };

    let round_trip = if check {
        Some(round_trip_check(&system, &equation, problem)?)
    } else {
        None
    };

    Ok(ReduceReport {
        coefficients,
        round_trip,
    })
}

fn round_trip_check(
    system: &StructuredSystem,
    equation: &floq::reduction::SecondOrderEquation,
    problem: &Problem,
) -> Result<RoundTripCheck, CliError> {
    let companion = floq::reduction::system_from_second_order(equation);
    let t0 = system.t0();
    let x0 = Vec2::new(1.0, -0.5);
    let e0 = system.entries_at(t0);
    let companion_x0 = Vec2::new(x0.x1, e0[0] * x0.x1 + e0[1] * x0.x2);
    let horizon = t0 + 0.3 * (system.window().1 - system.window().0);

    let rhs_direct = {
        let s = system.clone();
        move |t: f64, x: Vec2| {
            let e = s.entries_at(t);
            Vec2 {
                x1: e[0] * x.x1 + e[1] * x.x2,
                x2: e[2] * x.x1 + e[3] * x.x2,
            }
        }
    };
    let rhs_reduced = {
        let c = companion;
        move |t: f64, x: Vec2| {
            let e = c.entries_at(t);
            Vec2 {
                x1: e[0] * x.x1 + e[1] * x.x2,
                x2: e[2] * x.x1 + e[3] * x.x2,
            }
        }
    };
    let rel = problem.tolerances.rel.min(1e-10);
    let abs = rel * 1e-2;
    let direct = rk45(rhs_direct, t0, x0, horizon, rel, abs).map_err(CliError::from)?;
    let reduced = rk45(rhs_reduced, t0, companion_x0, horizon, rel, abs).map_err(CliError::from)?;
    let mut max_deviation = 0.0f64;
    for k in 0..=24 {
        let t = t0 + (horizon - t0) * k as f64 / 24.0;
        max_deviation = max_deviation.max((direct.sample(t).x1 - reduced.sample(t).x1).abs());
    }
    let tolerance = 1e-7;
    Ok(RoundTripCheck {
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_zero_note: Option<AlphaZeroNote>,
    pub all_passed: bool,
}

fn check(name: &'static str, value: f64, threshold: f64) -> CheckResult {
    CheckResult {
        name,
        value,
        threshold,
        passed: value.is_finite() && value <= threshold,
    }
}

pub fn verify(problem: &Problem) -> Result<VerifyReport, CliError> {
    let (system, fit) = problem.structured()?;
    let fm = FundamentalMatrix::new(system.clone());
    let mut checks = Vec::new();

    if let Some(f) = fit {
        checks.push(check("structure fit residual", f.residual, f.tolerance));
    }
    checks.push(check(
        "commutation |AD - DA| (normalized)",
        system.commutation_residual().map_err(CliError::from)?,
        1e-8,
    ));
    checks.push(check(
        "derivative commutation |A A' - A' A| (normalized)",
        system.derivative_commutation_residual(),
        1e-8,
    ));

    // closed form against the matrix-exponential oracle on the window
    let (lo, hi) = system.window();
    let mut oracle_dev = 0.0f64;
    let mut defining = 0.0f64;
    let mut liouville = 0.0f64;
    for &t in &chebyshev_grid(lo, hi, 17) {
        let phi = fm.phi(t).map_err(CliError::from)?;
        let oracle = floq::numerics::expm2(&system.primitive_matrix(t).map_err(CliError::from)?)
            .map_err(CliError::from)?;
        oracle_dev = oracle_dev.max((phi - oracle).max_abs() / oracle.max_abs().max(1.0));
        // scale the difference step by the local coefficient norm so the
        // check measures the implementation, not its own truncation error
        let h = 1e-4 / (1.0 + system.matrix_at(t).max_abs());
        defining = defining.max(fm.defining_residual(t, h).map_err(CliError::from)?);
        let det = phi.det();
        let expected = fm.log_det_phi(t).map_err(CliError::from)?.exp();
        liouville = liouville.max((det - expected).abs() / expected.abs().max(1e-12));
    }
    checks.push(check("fundamental matrix vs exp(D) (relative)", oracle_dev, 1e-10));
    checks.push(check("defining property |Phi' - A Phi|/|Phi|", defining, 1e-6));
    checks.push(check("Liouville det Phi vs exp(2f + beta g)", liouville, 1e-8));

    let mut alpha_zero_note = None;
    if let Some(section) = problem.floquet {
        let period = section.period;
        let data = floquet_from_averages(&system, period).map_err(CliError::from)?;
        let integrated = exponents_from_monodromy(
            &monodromy_numeric(&system, period, problem.tolerances.rel).map_err(CliError::from)?,
        )
        .map_err(CliError::from)?;
        checks.push(check(
            "pipeline agreement (averages vs monodromy)",
            exponent_set_deviation(&data.exponents, &integrated.exponents, period),
            1e-6,
        ));
        let trace = trace_identities(&system, period, problem.tolerances.rel)
            .map_err(CliError::from)?;
        checks.push(check(
            "exponent sum vs averaged trace",
            trace.exponent_sum_residual,
            1e-8,
        ));
        checks.push(check(
            "multiplier product vs exp(trace integral)",
            trace.multiplier_product_residual,
            1e-8,
        ));
        let mut periodic_dev = 0.0f64;
        for &t in &chebyshev_grid(lo, lo + period, 9) {
            let a = periodic_part(&fm, &data, t).map_err(CliError::from)?;
            let b = periodic_part(&fm, &data, t + period).map_err(CliError::from)?;
            periodic_dev = periodic_dev.max((a - b).max_abs());
        }
        checks.push(check("periodic factor |P(t+T) - P(t)|", periodic_dev, 1e-7));

        if system.alpha().abs() <= 1e-12 {
            let b = data.averaged_real().expect("real averages");
            alpha_zero_note = Some(AlphaZeroNote {
                uniform: [data.exponents[0].into(), data.exponents[1].into()],
                simplified: [
                    Complex64::new(b.m11 + 0.5 * system.beta() * b.m12, 0.0).into(),
                    Complex64::new(b.m11, 0.0).into(),
                ],
            });
        }
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        checks,
        alpha_zero_note,
        all_passed,
    })
}
