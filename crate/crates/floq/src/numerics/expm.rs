//! Matrix exponential by scaling-and-squaring with a degree-13 Pade kernel.
//!
//! This is the oracle the closed-form fundamental matrix is checked against,
//! so it is implemented independently of any structural assumptions: it works
//! for arbitrary (finite) 2x2 input and delivers close to full double
//! precision for norms up to ~50.

use num_complex::Complex64;

use super::mat2::{CMat2, Mat2};
use super::NumericsError;

/// Degree-13 Pade numerator coefficients for exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold above which the argument is scaled down by powers of two.
const THETA13: f64 = 5.371920351148152;

/// `exp(M)` for a real 2x2 matrix.
///
/// Returns an overflow error when the true exponential leaves the `f64`
/// range (e.g. `exp(diag(1000, 0))`).
pub fn expm2(m: &Mat2) -> Result<Mat2, NumericsError> {
    let e = cexpm2(&CMat2::from(*m))?;
    // Real input stays exactly real through the rational kernel.
    Ok(e.real_part())
}

/// `exp(M)` for a complex 2x2 matrix.
pub fn cexpm2(m: &CMat2) -> Result<CMat2, NumericsError> {
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(NumericsError::Overflow {
            context: "matrix exponential input",
        });
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = Complex64::new(0.5f64.powi(squarings), 0.0);
    let a = *m * scale;

    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a2 * a4;
    let id = CMat2::identity();
    let c = |k: usize| Complex64::new(PADE13[k], 0.0);

    let u_high = a6 * c(13) + a4 * c(11) + a2 * c(9);
    let u = a * (a6 * u_high + a6 * c(7) + a4 * c(5) + a2 * c(3) + id * c(1));
    let v_high = a6 * c(12) + a4 * c(10) + a2 * c(8);
    let v = a6 * v_high + a6 * c(6) + a4 * c(4) + a2 * c(2) + id * c(0);

    // exp(A) ~= (V - U)^{-1} (V + U)
    let den = v - u;
    let num = v + u;
    let mut x = den.inverse()? * num;

    for _ in 0..squarings {
        x = x * x;
        if !x.is_finite() {
            return Err(NumericsError::Overflow {
                context: "matrix exponential squaring",
            });
        }
    }
    if !x.is_finite() {
        return Err(NumericsError::Overflow {
            context: "matrix exponential",
        });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn assert_close(a: &Mat2, b: &Mat2, tol: f64) {
        assert!(
            (*a - *b).max_abs() <= tol,
            "matrices differ by {:.3e}: {} vs {}",
            (*a - *b).max_abs(),
            a,
            b
        );
    }

    #[test]
    fn zero_maps_to_identity() {
        assert_close(&expm2(&Mat2::zero()).unwrap(), &Mat2::identity(), 1e-15);
    }

    #[test]
    fn diagonal_exponentiates_entrywise() {
        let e = expm2(&Mat2::diagonal(1.0, -1.0)).unwrap();
        assert!((e.m11 - E).abs() < 1e-14);
        assert!((e.m22 - 1.0 / E).abs() < 1e-14);
        assert_eq!(e.m12, 0.0);
        assert_eq!(e.m21, 0.0);
    }

    #[test]
    fn rotation_generator_gives_rotation_matrix() {
        let theta = FRAC_PI_2;
        let gen = Mat2::new(0.0, 1.0, -1.0, 0.0) * theta;
        let e = expm2(&gen).unwrap();
        let expected = Mat2::new(theta.cos(), theta.sin(), -theta.sin(), theta.cos());
        assert_close(&e, &expected, 1e-14);
    }

    #[test]
    fn large_norm_uses_scaling() {
        let m = Mat2::diagonal(50.0, -50.0);
        let e = expm2(&m).unwrap();
        assert!((e.m11 / 50f64.exp() - 1.0).abs() < 1e-12);
        assert!((e.m22 / (-50f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let m = Mat2::diagonal(1000.0, 0.0);
        assert!(matches!(expm2(&m), Err(NumericsError::Overflow { .. })));
    }

    #[test]
    fn inverse_property() {
        let m = Mat2::new(0.3, -1.2, 0.7, 0.9);
        let a = expm2(&m).unwrap();
        let b = expm2(&(-m)).unwrap();
        assert_close(&(a * b), &Mat2::identity(), 1e-13);
    }
}
