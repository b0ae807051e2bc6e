//! Eigen decomposition of real 2x2 matrices via the characteristic
//! polynomial.

use num_complex::Complex64;

use super::mat2::{CVec2, Mat2};

/// Result of [`eig2`]: two eigenvalues with unit-norm eigenvectors.
///
/// For a defective matrix (repeated eigenvalue, one-dimensional eigenspace)
/// the two reported vectors coincide and `defective` is set; this is not an
/// error condition.
#[derive(Debug, Clone, Copy)]
pub struct EigenPair2 {
    pub values: [Complex64; 2],
    pub vectors: [CVec2; 2],
    pub defective: bool,
}

/// Gap below which two eigenvalues are treated as repeated. Scaled by the
/// eigenvalue magnitudes so the test stays meaningful near branch points
/// where the discriminant passes through zero.
fn repeated_gap_tolerance(l1: Complex64, l2: Complex64) -> f64 {
    1e-8 * (1.0 + l1.norm() + l2.norm())
}

/// Eigenvalues and eigenvectors of a real 2x2 matrix.
///
/// The eigenvalues are the roots of `lambda^2 - tr(M) lambda + det(M)`;
/// complex pairs come out conjugate. Eigenvectors are normalized to unit
/// Euclidean norm.
pub fn eig2(m: &Mat2) -> EigenPair2 {
    let tr = m.trace();
    let det = m.det();
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
    let half_tr = Complex64::new(0.5 * tr, 0.0);
    let l1 = half_tr + disc * 0.5;
    let l2 = half_tr - disc * 0.5;

    if (l1 - l2).norm() <= repeated_gap_tolerance(l1, l2) {
        let lam = (l1 + l2) * 0.5;
        // A repeated eigenvalue splits two ways: scaled identity (any basis
        // works, not defective) or a genuine Jordan block.
        let scale = 1.0 + m.max_abs();
        let off = m.m12.abs().max(m.m21.abs());
        let diag_gap = (m.m11 - m.m22).abs();
        if off <= 1e-13 * scale && diag_gap <= 1e-13 * scale {
            return EigenPair2 {
                values: [l1, l2],
                vectors: [CVec2::unit_x(), CVec2::unit_y()],
                defective: false,
            };
        }
        let v = eigenvector_for(m, lam);
        return EigenPair2 {
            values: [l1, l2],
            vectors: [v, v],
            defective: true,
        };
    }

    EigenPair2 {
        values: [l1, l2],
        vectors: [eigenvector_for(m, l1), eigenvector_for(m, l2)],
        defective: false,
    }
}

/// Kernel vector of `M - lambda I`, taken from whichever row gives the
/// better-conditioned candidate.
fn eigenvector_for(m: &Mat2, lam: Complex64) -> CVec2 {
    let from_row1 = CVec2::new(Complex64::new(m.m12, 0.0), lam - m.m11);
    let from_row2 = CVec2::new(lam - m.m22, Complex64::new(m.m21, 0.0));
    let v = if from_row1.norm() >= from_row2.norm() {
        from_row1
    } else {
        from_row2
    };
    if v.norm() == 0.0 {
        // M is exactly lam * I
        return CVec2::unit_x();
    }
    v.normalized()
}
