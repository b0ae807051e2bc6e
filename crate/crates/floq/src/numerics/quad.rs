//! Adaptive quadrature built on the 15-point Gauss-Kronrod rule.
//!
//! Globally adaptive: the interval with the worst error estimate is bisected
//! until the summed estimate meets the requested tolerance or the subdivision
//! budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NumericsError;

/// Kronrod abscissae for the 15-point rule on [-1, 1] (positive half).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Weights of the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Weights of the 15-point Kronrod rule.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const MAX_SUBDIVISIONS: usize = 4000;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN error estimates sort to the top so that non-finite integrands
        // keep being refined until the budget trips.
        match (self.error.is_nan(), other.error.is_nan()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => self.error.partial_cmp(&other.error).unwrap(),
        }
    }
}

/// One Gauss-Kronrod pass over [a, b]; returns the Kronrod value and the
/// |K15 - G7| error estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];

    // odd Kronrod indices carry the embedded Gauss nodes
    for (j, wg) in WG.iter().enumerate().take(3) {
        let idx = 2 * j + 1;
        let x = half * XGK[idx];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod += WGK[idx] * (f1 + f2);
        gauss += wg * (f1 + f2);
    }

    // even indices are Kronrod-only
    for j in 0..4 {
        let idx = 2 * j;
        let x = half * XGK[idx];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod += WGK[idx] * (f1 + f2);
    }

    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]` to the requested tolerances.
///
/// The target is `max(abs_tol, rel_tol * |integral|)`. Fails with
/// [`NumericsError::QuadratureDidNotConverge`] when the subdivision budget is
/// exhausted first, which is also how non-finite integrand values surface.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult, NumericsError> {
    assert!(rel_tol > 0.0 || abs_tol > 0.0, "tolerances must be positive");
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    // start from a modest partition rather than one giant interval so that
    // narrow features cannot hide between the nodes of a single rule
    const INITIAL_SPLIT: usize = 8;
    let mut heap = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    let width = (hi - lo) / INITIAL_SPLIT as f64;
    for i in 0..INITIAL_SPLIT {
        let x0 = lo + i as f64 * width;
        let x1 = if i + 1 == INITIAL_SPLIT {
            hi
        } else {
            lo + (i + 1) as f64 * width
        };
        let (v, e) = gk15(&f, x0, x1);
        total_value += v;
        total_error += e;
        heap.push(Interval {
            a: x0,
            b: x1,
            value: v,
            error: e,
        });
    }
    let mut subdivisions = 0usize;

    loop {
        let target = abs_tol.max(rel_tol * total_value.abs());
        if total_error.is_finite() && total_error <= target {
            return Ok(QuadResult {
                value: sign * total_value,
                error_estimate: total_error,
                subdivisions,
            });
        }
        if subdivisions >= MAX_SUBDIVISIONS {
            return Err(NumericsError::QuadratureDidNotConverge {
                a,
                b,
                estimate: total_error,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap holds at least one interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer splittable in f64: give up on refinement here
            return Err(NumericsError::QuadratureDidNotConverge {
                a,
                b,
                estimate: total_error,
                requested: target,
            });
        }
        let (vl, el) = gk15(&f, worst.a, mid);
        let (vr, er) = gk15(&f, mid, worst.b);
        total_value += vl + vr - worst.value;
        total_error += el + er - worst.error;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
        });
        subdivisions += 1;

        // Recompute the accumulated error from scratch once in a while to
        // shed cancellation in the running sum.
        if subdivisions.is_multiple_of(64) {
            total_error = heap.iter().map(|i| i.error).sum();
            total_value = heap.iter().map(|i| i.value).sum();
        }
    }
}
