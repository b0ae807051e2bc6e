//! Embedded Dormand-Prince 5(4) integrator for planar systems.
//!
//! Used as the trajectory oracle: closed-form solutions elsewhere in the
//! crate are required to agree with this integrator to tight tolerances.
//! Dense output between accepted steps is cubic Hermite, which is enough for
//! comparing trajectories at arbitrary sample times.

use super::mat2::Vec2;
use super::NumericsError;

/// Butcher A matrix (lower triangle, row per stage).
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Stage nodes.
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Difference between the 5th- and 4th-order weights (error estimator).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step size rescue factor bounds and safety factor.
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const SAFETY: f64 = 0.9;
const MAX_STEPS: usize = 1_000_000;

/// Relative floor below which a required step signals a singularity.
const STEP_FLOOR: f64 = 1e-14;

/// One accepted integration step: state and derivative at the node.
#[derive(Debug, Clone, Copy)]
pub struct OdeStep {
    pub t: f64,
    pub x: Vec2,
    pub dx: Vec2,
}

/// Accepted-step trajectory including both endpoints.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    steps: Vec<OdeStep>,
}

impl OdeSolution {
    pub fn steps(&self) -> &[OdeStep] {
        &self.steps
    }

    /// `(t, x)` samples at the accepted steps, endpoint included.
    pub fn samples(&self) -> impl Iterator<Item = (f64, Vec2)> + '_ {
        self.steps.iter().map(|s| (s.t, s.x))
    }

    pub fn endpoint(&self) -> (f64, Vec2) {
        let last = self.steps.last().expect("solution holds at least one step");
        (last.t, last.x)
    }

    /// Cubic Hermite interpolation at `t`, which must lie inside the
    /// integration interval (rounding-level overshoot is clamped). Exact at
    /// the accepted nodes.
    pub fn sample(&self, t: f64) -> Vec2 {
        let first = self.steps.first().expect("non-empty solution");
        let last = self.steps.last().expect("non-empty solution");
        let forward = last.t >= first.t;
        let (lo, hi) = if forward {
            (first.t, last.t)
        } else {
            (last.t, first.t)
        };
        let slack = 64.0 * f64::EPSILON * (hi - lo).abs().max(1.0);
        assert!(
            t >= lo - slack && t <= hi + slack,
            "sample time {t} outside the integrated interval [{}, {}]",
            first.t, last.t
        );
        let t = t.clamp(lo, hi);
        // binary search for the bracketing step
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let before = if forward {
                self.steps[mid].t <= t
            } else {
                self.steps[mid].t >= t
            };
            if before {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s0 = &self.steps[lo];
        let s1 = &self.steps[hi];
        let h = s1.t - s0.t;
        if h == 0.0 {
            return s0.x;
        }
        let theta = (t - s0.t) / h;
        hermite(theta, h, s0.x, s0.dx, s1.x, s1.dx)
    }
}

fn hermite(theta: f64, h: f64, y0: Vec2, f0: Vec2, y1: Vec2, f1: Vec2) -> Vec2 {
    let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
    let h10 = theta * (1.0 - theta) * (1.0 - theta);
    let h01 = theta * theta * (3.0 - 2.0 * theta);
    let h11 = theta * theta * (theta - 1.0);
    y0 * h00 + f0 * (h * h10) + y1 * h01 + f1 * (h * h11)
}

/// Integrates `dx/dt = rhs(t, x)` from `(t0, x0)` to `t1` with an embedded
/// 5(4) pair and proportional step control.
///
/// The endpoint is hit exactly. Integration may run in either time
/// direction. Persistent step rejection drives the step under
/// `1e-14 * |t1 - t0|` and produces [`NumericsError::StepUnderflow`], the
/// usual symptom of integrating across a singularity of the right-hand side.
pub fn rk45<F>(
    mut rhs: F,
    t0: f64,
    x0: Vec2,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<OdeSolution, NumericsError>
where
    F: FnMut(f64, Vec2) -> Vec2,
{
    assert!(rel_tol > 0.0 && abs_tol > 0.0, "tolerances must be positive");
    let span = t1 - t0;
    let mut k = [Vec2::zero(); 7];
    k[0] = rhs(t0, x0);
    let mut steps = vec![OdeStep {
        t: t0,
        x: x0,
        dx: k[0],
    }];
    if span == 0.0 {
        return Ok(OdeSolution { steps });
    }
    let dir = span.signum();
    let floor = STEP_FLOOR * span.abs();

    let mut t = t0;
    let mut x = x0;
    let mut h = span / 100.0;
    let mut n_steps = 0usize;

    while (t1 - t) * dir > 0.0 {
        if n_steps >= MAX_STEPS {
            return Err(NumericsError::TooManySteps { t0, t1 });
        }
        n_steps += 1;
        // clamp the final step onto the endpoint
        let mut clamped = false;
        if (t + h - t1) * dir >= 0.0 {
            h = t1 - t;
            clamped = true;
        }
        if h.abs() < floor {
            return Err(NumericsError::StepUnderflow {
                t,
                step: h.abs(),
                floor,
            });
        }

        // the last stage row doubles as the 5th-order weights (FSAL), so the
        // stage-5 state is the proposed new solution
        let mut x_new = x;
        for stage in 0..6 {
            let mut xi = x;
            for (j, a) in A[stage].iter().enumerate().take(stage + 1) {
                xi = xi + k[j] * (*a * h);
            }
            k[stage + 1] = rhs(t + C[stage] * h, xi);
            if stage == 5 {
                x_new = xi;
            }
        }

        // weighted RMS error of the embedded difference
        let mut err_vec = Vec2::zero();
        for (j, e) in E.iter().enumerate() {
            err_vec = err_vec + k[j] * (*e * h);
        }
        let scale1 = abs_tol + rel_tol * x.x1.abs().max(x_new.x1.abs());
        let scale2 = abs_tol + rel_tol * x.x2.abs().max(x_new.x2.abs());
        let e1 = err_vec.x1 / scale1;
        let e2 = err_vec.x2 / scale2;
        let err = (0.5 * (e1 * e1 + e2 * e2)).sqrt();

        if err.is_finite() && err <= 1.0 {
            // land on the endpoint exactly rather than within rounding of it
            t = if clamped { t1 } else { t + h };
            // k[6] is the derivative at the accepted point (FSAL)
            x = x_new;
            k[0] = k[6];
            steps.push(OdeStep {
                t,
                x,
                dx: k[0],
            });
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            h *= fac;
        } else if err.is_finite() {
            h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        } else {
            // non-finite estimate: the state or derivative blew up inside
            // the step, retry with a much smaller one
            h *= 0.1;
        }
    }

    Ok(OdeSolution { steps })
}
