//! Real error function and its imaginary-argument companion.
//!
//! `erfi(t) = (2/sqrt(pi)) * integral of exp(s^2) from 0 to t` shows up as
//! the closed-form primitive of Gaussian-type coefficients. It is evaluated
//! by power series on the central range and through the scaled Dawson
//! function beyond, where the series would need excessive terms.

use crate::numerics::NumericsError;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Largest argument for which `exp(t^2)` stays inside `f64`.
const ERFI_OVERFLOW_EDGE: f64 = 26.641747557046327; // sqrt(709.782...)

/// Error function, accurate to close to machine precision.
///
/// Power series for |x| <= 2, Laplace continued fraction for the
/// complementary function beyond.
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    if ax <= 2.0 {
        erf_series(x)
    } else {
        let tail = erfc_cf(ax);
        let val = 1.0 - tail;
        if x > 0.0 {
            val
        } else {
            -val
        }
    }
}

/// Imaginary error function `erfi(t)`.
///
/// Odd in its argument. Fails with an overflow error once `exp(t^2)` leaves
/// the representable range (|t| > ~26.64).
pub fn erfi(x: f64) -> Result<f64, NumericsError> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ax = x.abs();
    if ax > ERFI_OVERFLOW_EDGE {
        return Err(NumericsError::Overflow {
            context: "erfi argument",
        });
    }
    let val = if ax <= 4.0 {
        erfi_series(ax)
    } else {
        TWO_OVER_SQRT_PI * (ax * ax).exp() * dawson_asymptotic(ax)
    };
    Ok(if x > 0.0 { val } else { -val })
}

/// Dawson integral `exp(-x^2) * integral of exp(s^2) from 0 to x`.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax <= 4.0 {
        (-ax * ax).exp() * erfi_series(ax) / TWO_OVER_SQRT_PI
    } else {
        dawson_asymptotic(ax)
    };
    if x >= 0.0 {
        val
    } else {
        -val
    }
}

/// All-positive-term series; free of cancellation, so the only cost of a
/// larger argument is more terms.
fn erfi_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut base = x; // x^(2k+1) / k!
    let mut sum = x;
    let mut k = 0u32;
    loop {
        k += 1;
        base *= x2 / k as f64;
        let term = base / (2 * k + 1) as f64;
        sum += term;
        if term <= f64::EPSILON * sum || k > 400 {
            break;
        }
    }
    TWO_OVER_SQRT_PI * sum
}

/// Alternating series for erf, adequate up to |x| = 2 where cancellation
/// costs at most a digit.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut base = x;
    let mut sum = x;
    let mut k = 0u32;
    loop {
        k += 1;
        base *= -x2 / k as f64;
        let term = base / (2 * k + 1) as f64;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() || k > 200 {
            break;
        }
    }
    TWO_OVER_SQRT_PI * sum
}

/// Laplace continued fraction for `erfc`, evaluated with the modified Lentz
/// scheme. Converges quickly for x >= 2.
fn erfc_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..200 {
        let a_n = 0.5 * n as f64;
        d = x + a_n * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a_n / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
}

/// Asymptotic expansion of the Dawson integral truncated at its smallest
/// term; past x = 4 the truncation error is already below the double
/// rounding noise of the exp(x^2) scaling.
fn dawson_asymptotic(x: f64) -> f64 {
    let inv_x2 = 1.0 / (x * x);
    let mut term = 0.5 / x;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        let next = term * (2.0 * k as f64 - 1.0) * 0.5 * inv_x2;
        if next >= term || next <= f64::EPSILON * sum {
            sum += next * 0.5; // smallest-term rule: keep half of the first non-decreasing term
            break;
        }
        term = next;
        sum += term;
        if k > 200 {
            break;
        }
    }
    sum
}
