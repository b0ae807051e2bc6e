//! Real and complex 2x2 matrices and 2-vectors.
//!
//! These are plain value types (four or two `f64`/`Complex64` entries) with
//! the handful of operations the rest of the crate needs. No allocation, no
//! generic linear algebra.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::NumericsError;

/// Real 2x2 matrix. Entries are finite by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

/// Real 2-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

/// Complex 2x2 matrix, used for eigen decompositions and matrix logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

/// Complex 2-vector (eigenvectors and complex states).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec2 {
    pub x1: Complex64,
    pub x2: Complex64,
}

impl Mat2 {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if any entry is NaN or infinite; non-finite values must be
    /// caught at the operation level before a matrix is formed.
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        assert!(
            m11.is_finite() && m12.is_finite() && m21.is_finite() && m22.is_finite(),
            "Mat2 entries must be finite, got [[{m11}, {m12}], [{m21}, {m22}]]"
        );
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn diagonal(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    /// Inverse by the adjugate formula.
    pub fn inverse(&self) -> Result<Self, NumericsError> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(NumericsError::SingularMatrix);
        }
        let inv = Self {
            m11: self.m22 / d,
            m12: -self.m12 / d,
            m21: -self.m21 / d,
            m22: self.m11 / d,
        };
        if !inv.is_finite() {
            return Err(NumericsError::SingularMatrix);
        }
        Ok(inv)
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22)
            .sqrt()
    }

    /// Largest column sum of absolute values.
    pub fn norm_one(&self) -> f64 {
        (self.m11.abs() + self.m21.abs()).max(self.m12.abs() + self.m22.abs())
    }

    /// Spectral norm (largest singular value), in closed form for 2x2:
    /// `sigma_max^2` is the larger eigenvalue of `M^T M`.
    pub fn spectral_norm(&self) -> f64 {
        let f2 = self.m11 * self.m11
            + self.m12 * self.m12
            + self.m21 * self.m21
            + self.m22 * self.m22;
        let d = self.det();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0);
        (0.5 * (f2 + disc.sqrt())).sqrt()
    }

    pub fn column(&self, j: usize) -> Vec2 {
        match j {
            0 => Vec2::new(self.m11, self.m21),
            1 => Vec2::new(self.m12, self.m22),
            _ => panic!("column index {j} out of range for 2x2 matrix"),
        }
    }

    pub fn from_columns(c0: Vec2, c1: Vec2) -> Self {
        Self::new(c0.x1, c1.x1, c0.x2, c1.x2)
    }
}

impl Vec2 {
    /// Builds a vector; panics on non-finite entries.
    pub fn new(x1: f64, x2: f64) -> Self {
        assert!(
            x1.is_finite() && x2.is_finite(),
            "Vec2 entries must be finite, got ({x1}, {x2})"
        );
        Self { x1, x2 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn unit_x() -> Self {
        Self::new(1.0, 0.0)
    }

    pub fn unit_y() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn max_abs(&self) -> f64 {
        self.x1.abs().max(self.x2.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            x1: self.x1 * s,
            x2: self.x2 * s,
        }
    }
}

// Vec2 arithmetic skips the finiteness assertion: intermediate integrator
// states may legitimately overflow and are checked where it matters.
impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2 {
            x1: self.x1 + rhs.x1,
            x2: self.x2 + rhs.x2,
        }
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2 {
            x1: self.x1 - rhs.x1,
            x2: self.x2 - rhs.x2,
        }
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        self.scale(-1.0)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 + rhs.m11,
            m12: self.m12 + rhs.m12,
            m21: self.m21 + rhs.m21,
            m22: self.m22 + rhs.m22,
        }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 - rhs.m11,
            m12: self.m12 - rhs.m12,
            m21: self.m21 - rhs.m21,
            m22: self.m22 - rhs.m22,
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2 {
            x1: self.m11 * v.x1 + self.m12 * v.x2,
            x2: self.m21 * v.x1 + self.m22 * v.x2,
        }
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2 {
            m11: self.m11 * s,
            m12: self.m12 * s,
            m21: self.m21 * s,
            m22: self.m22 * s,
        }
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self * -1.0
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m11, self.m12, self.m21, self.m22
        )
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

impl CMat2 {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn diagonal(a: Complex64, b: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(a, zero, zero, b)
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn inverse(&self) -> Result<Self, NumericsError> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(NumericsError::SingularMatrix);
        }
        Ok(Self {
            m11: self.m22 / d,
            m12: -self.m12 / d,
            m21: -self.m21 / d,
            m22: self.m11 / d,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    pub fn norm_one(&self) -> f64 {
        (self.m11.norm() + self.m21.norm()).max(self.m12.norm() + self.m22.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    /// Largest absolute value over the imaginary parts of all entries.
    pub fn max_imag(&self) -> f64 {
        self.m11
            .im
            .abs()
            .max(self.m12.im.abs())
            .max(self.m21.im.abs())
            .max(self.m22.im.abs())
    }

    /// Entry-wise real part; callers must decide whether the imaginary part
    /// is negligible (see [`CMat2::max_imag`]).
    pub fn real_part(&self) -> Mat2 {
        Mat2::new(self.m11.re, self.m12.re, self.m21.re, self.m22.re)
    }

    pub fn from_columns(c0: CVec2, c1: CVec2) -> Self {
        Self::new(c0.x1, c1.x1, c0.x2, c1.x2)
    }
}

impl From<Mat2> for CMat2 {
    fn from(m: Mat2) -> Self {
        CMat2::new(
            Complex64::new(m.m11, 0.0),
            Complex64::new(m.m12, 0.0),
            Complex64::new(m.m21, 0.0),
            Complex64::new(m.m22, 0.0),
        )
    }
}

impl CVec2 {
    pub fn new(x1: Complex64, x2: Complex64) -> Self {
        Self { x1, x2 }
    }

    pub fn unit_x() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn unit_y() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.x1.norm_sqr() + self.x2.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            x1: self.x1 / n,
            x2: self.x2 / n,
        }
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, rhs: CMat2) -> CMat2 {
        CMat2 {
            m11: self.m11 + rhs.m11,
            m12: self.m12 + rhs.m12,
            m21: self.m21 + rhs.m21,
            m22: self.m22 + rhs.m22,
        }
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, rhs: CMat2) -> CMat2 {
        CMat2 {
            m11: self.m11 - rhs.m11,
            m12: self.m12 - rhs.m12,
            m21: self.m21 - rhs.m21,
            m22: self.m22 - rhs.m22,
        }
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, rhs: CMat2) -> CMat2 {
        CMat2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

impl Mul<Complex64> for CMat2 {
    type Output = CMat2;
    fn mul(self, s: Complex64) -> CMat2 {
        CMat2 {
            m11: self.m11 * s,
            m12: self.m12 * s,
            m21: self.m21 * s,
            m22: self.m22 * s,
        }
    }
}

impl Mul<CVec2> for CMat2 {
    type Output = CVec2;
    fn mul(self, v: CVec2) -> CVec2 {
        CVec2 {
            x1: self.m11 * v.x1 + self.m12 * v.x2,
            x2: self.m21 * v.x1 + self.m22 * v.x2,
        }
    }
}
