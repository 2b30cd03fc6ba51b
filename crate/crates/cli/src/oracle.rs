//! Closed-form eigenvalues of 3×3 Hermitian matrices (trigonometric
//! solution of the characteristic cubic). Independent of the linear-algebra
//! backend, used to cross-check the spectral routines.

use qwot::qlin::{CMatrix, C64};

/// Eigenvalues of a 3×3 Hermitian matrix, descending.
pub fn hermitian3_eigenvalues(a: &CMatrix) -> [f64; 3] {
    assert_eq!(a.shape(), (3, 3), "3x3 input");
    let q = (a[(0, 0)].re + a[(1, 1)].re + a[(2, 2)].re) / 3.0;
    let off = a[(0, 1)].norm_sqr() + a[(0, 2)].norm_sqr() + a[(1, 2)].norm_sqr();
    let p2 = (0..3).map(|i| (a[(i, i)].re - q).powi(2)).sum::<f64>() + 2.0 * off;
    if p2 <= 1e-300 {
        return [q; 3];
    }
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| -> C64 {
        let shift = if i == j { q } else { 0.0 };
        (a[(i, j)] - C64::new(shift, 0.0)) / p
    };
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det.re / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [hi, 3.0 * q - hi - lo, lo]
}

/// `1/2 + ¼‖ρ₀ − ρ₁‖₁` for qutrit states.
pub fn helstrom_qutrit(rho0: &CMatrix, rho1: &CMatrix) -> f64 {
    let ev = hermitian3_eigenvalues(&(rho0 - rho1));
    0.5 + 0.25 * ev.iter().map(|x| x.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_known_spectrum() {
        let d = CMatrix::from_diagonal(&qwot::qlin::CVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let ev = hermitian3_eigenvalues(&d);
        for (x, want) in ev.iter().zip([2.0, 0.5, -1.0]) {
            assert!((x - want).abs() < 1e-12);
        }
        // [[1, i, 0], [-i, 1, 0], [0, 0, 3]] has spectrum {3, 2, 0}
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(1.0, 0.0);
        m[(2, 2)] = C64::new(3.0, 0.0);
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(0.0, -1.0);
        let ev = hermitian3_eigenvalues(&m);
        for (x, want) in ev.iter().zip([3.0, 2.0, 0.0]) {
            assert!((x - want).abs() < 1e-12);
        }
        assert_eq!(hermitian3_eigenvalues(&CMatrix::identity(3, 3)), [1.0; 3]);
    }
}
