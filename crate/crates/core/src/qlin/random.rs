//! Rotation-invariant random states, densities and unitaries for sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, CMatrix, CVector, DensityMatrix, Operator, StateVector, SubsystemLayout, C64};

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-random pure state: a normalized vector of i.i.d. complex normals.
pub fn random_state<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> StateVector {
    let n = layout.total_dim();
    let v = CVector::from_fn(n, |_, _| complex_normal(rng));
    let norm = v.norm();
    StateVector::from_vector_unchecked(layout.clone(), v / c(norm, 0.0))
}

/// Unit vector in `C^dim` (no layout attached).
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Full-rank random density matrix `A A† / Tr(A A†)` with Ginibre `A`.
pub fn random_density<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> DensityMatrix {
    let a = ginibre(layout.total_dim(), rng);
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    let m = m / c(tr, 0.0);
    // symmetrize away rounding so the result is exactly Hermitian
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    DensityMatrix::from_matrix_unchecked(layout.clone(), m)
}

/// Haar-random unitary from the phase-corrected QR of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> Operator {
    let n = layout.total_dim();
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm(), 0.0) } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Operator::from_parts_unchecked(layout.clone(), q, super::OperatorKind::Unitary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_pass_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dims in [vec![2], vec![3], vec![2, 2], vec![3, 3]] {
            let l = SubsystemLayout::new(dims).unwrap();
            let s = random_state(&l, &mut rng);
            assert!(StateVector::new(l.clone(), s.amps().iter().copied().collect()).is_ok());
            let rho = random_density(&l, &mut rng);
            assert!(DensityMatrix::new(l.clone(), rho.matrix().clone()).is_ok());
            let u = random_unitary(&l, &mut rng);
            assert!(Operator::unitary(l, u.matrix().clone()).is_ok());
        }
    }
}
