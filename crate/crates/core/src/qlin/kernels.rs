use super::state::same_layout;
use super::{c, CMatrix, CVector, DensityMatrix, Operator, OperatorKind, QlinError, StateVector, SubsystemLayout};

/// Kronecker product with concatenated layouts.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let layout = self.layout().concat(other.layout());
        let amps = self.amps().kronecker(other.amps());
        StateVector::from_vector_unchecked(layout, amps)
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        let layout = self.layout().concat(other.layout());
        DensityMatrix::from_matrix_unchecked(layout, self.matrix().kronecker(other.matrix()))
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        let kind = match (self.kind(), other.kind()) {
            (a, b) if a == b && a != OperatorKind::Kraus => a,
            (OperatorKind::Projector | OperatorKind::Hermitian, OperatorKind::Projector | OperatorKind::Hermitian) => {
                OperatorKind::Hermitian
            }
            _ => OperatorKind::Generic,
        };
        Operator::from_parts_unchecked(
            self.layout().concat(other.layout()),
            self.matrix().kronecker(other.matrix()),
            kind,
        )
    }
}

fn check_op_targets(layout: &SubsystemLayout, op: &Operator, targets: &[usize]) -> Result<(), QlinError> {
    layout.check_targets(targets)?;
    let expected: usize = targets.iter().map(|&t| layout.dims()[t]).product();
    if op.dim() != expected {
        return Err(QlinError::DimensionMismatch {
            expected,
            found: op.dim(),
        });
    }
    Ok(())
}

/// `(M ⊗ I_rest)` applied with `M`'s tensor factors routed to `targets`.
pub(crate) fn apply_matrix(layout: &SubsystemLayout, amps: &CVector, m: &CMatrix, targets: &[usize]) -> CVector {
    let rest = layout.complement(targets);
    let target_offsets = layout.offsets(targets);
    let rest_offsets = layout.offsets(&rest);
    let block = target_offsets.len();
    let mut out = CVector::zeros(amps.len());
    let mut gathered = CVector::zeros(block);
    for &base in &rest_offsets {
        for (slot, &off) in gathered.iter_mut().zip(&target_offsets) {
            *slot = amps[base + off];
        }
        let mapped = m * &gathered;
        for (value, &off) in mapped.iter().zip(&target_offsets) {
            out[base + off] = *value;
        }
    }
    out
}

/// Applies a unitary to the listed subsystems of `s`.
pub fn apply_on_subsystems(s: &StateVector, op: &Operator, targets: &[usize]) -> Result<StateVector, QlinError> {
    check_op_targets(s.layout(), op, targets)?;
    if op.kind() != OperatorKind::Unitary {
        return Err(QlinError::NotUnitary(f64::NAN));
    }
    let amps = apply_matrix(s.layout(), s.amps(), op.matrix(), targets);
    Ok(StateVector::from_vector_unchecked(s.layout().clone(), amps))
}

pub(crate) fn apply_unnormalized(s: &StateVector, op: &Operator, targets: &[usize]) -> Result<CVector, QlinError> {
    check_op_targets(s.layout(), op, targets)?;
    Ok(apply_matrix(s.layout(), s.amps(), op.matrix(), targets))
}

/// Amplitudes rearranged as a `keep × rest` matrix, rows enumerated over
/// `keep` in the given order and columns over the remaining subsystems in
/// ascending order.
pub(crate) fn bipartition(layout: &SubsystemLayout, amps: &CVector, keep: &[usize]) -> CMatrix {
    let rest = layout.complement(keep);
    let keep_offsets = layout.offsets(keep);
    let rest_offsets = layout.offsets(&rest);
    CMatrix::from_fn(keep_offsets.len(), rest_offsets.len(), |i, j| {
        amps[keep_offsets[i] + rest_offsets[j]]
    })
}

/// Partial trace of a density matrix onto `keep` (result ordered as `keep`).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QlinError> {
    let layout = rho.layout();
    layout.check_targets(keep)?;
    let kept = layout.select(keep)?;
    let keep_offsets = layout.offsets(keep);
    let rest_offsets = layout.offsets(&layout.complement(keep));
    let m = rho.matrix();
    let out = CMatrix::from_fn(keep_offsets.len(), keep_offsets.len(), |i, j| {
        rest_offsets
            .iter()
            .map(|&r| m[(keep_offsets[i] + r, keep_offsets[j] + r)])
            .sum()
    });
    Ok(DensityMatrix::from_matrix_unchecked(kept, out))
}

/// Reduced state of a pure state on `keep`, computed as `M M†` from the
/// bipartition matrix without forming the full projector.
pub fn partial_trace_pure(s: &StateVector, keep: &[usize]) -> Result<DensityMatrix, QlinError> {
    let layout = s.layout();
    layout.check_targets(keep)?;
    let kept = layout.select(keep)?;
    let m = bipartition(layout, s.amps(), keep);
    Ok(DensityMatrix::from_matrix_unchecked(kept, &m * m.adjoint()))
}

/// Factors `s` as `|a⟩_keep ⊗ |b⟩_rest` when it is a product across that cut
/// (entrywise residual ≤ `tol`). Returns `None` when entangled or when `keep`
/// covers every subsystem.
pub(crate) fn try_split(s: &StateVector, keep: &[usize], tol: f64) -> Option<(StateVector, StateVector)> {
    let layout = s.layout();
    if keep.len() == layout.len() || layout.check_targets(keep).is_err() {
        return None;
    }
    let m = bipartition(layout, s.amps(), keep);
    let (mut bi, mut bj, mut best) = (0, 0, 0.0);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)].norm();
            if v > best {
                (bi, bj, best) = (i, j, v);
            }
        }
    }
    if best == 0.0 {
        return None;
    }
    let col = m.column(bj).into_owned();
    let rebuilt = &col * m.row(bi) / m[(bi, bj)];
    let residual = (&m - rebuilt).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > tol {
        return None;
    }
    // M = a·bᵀ with a the normalized pivot column and bᵀ = a†M
    let a = &col / c(col.norm(), 0.0);
    let b = (a.adjoint() * &m).transpose();
    let b = &b / c(b.norm(), 0.0);
    let keep_layout = layout.select(keep).ok()?;
    let rest_layout = layout.select(&layout.complement(keep)).ok()?;
    Some((
        StateVector::from_vector_unchecked(keep_layout, a),
        StateVector::from_vector_unchecked(rest_layout, b),
    ))
}

/// Reorders subsystems so that result subsystem `k` is input subsystem `order[k]`.
pub(crate) fn permute(s: &StateVector, order: &[usize]) -> Result<StateVector, QlinError> {
    let layout = s.layout();
    if order.len() != layout.len() {
        return Err(QlinError::DimensionMismatch {
            expected: layout.len(),
            found: order.len(),
        });
    }
    layout.check_targets(order)?;
    let new_layout = layout.select(order)?;
    let offsets = layout.offsets(order);
    let amps = CVector::from_iterator(offsets.len(), offsets.iter().map(|&o| s.amps()[o]));
    Ok(StateVector::from_vector_unchecked(new_layout, amps))
}

pub(crate) fn check_same(a: &DensityMatrix, b: &DensityMatrix) -> Result<(), QlinError> {
    same_layout(a.layout(), b.layout())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(dim: usize, k: usize) -> StateVector {
        StateVector::ket(dim, k).unwrap()
    }

    fn phi0() -> StateVector {
        let l = SubsystemLayout::new(vec![3, 3]).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 9];
        amps[0] = c(FRAC_1_SQRT_2, 0.0);
        amps[8] = c(FRAC_1_SQRT_2, 0.0);
        StateVector::new(l, amps).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i3 = Operator::identity(SubsystemLayout::qutrit());
        let i9 = i3.tensor(&i3);
        assert_eq!(i9.matrix(), &CMatrix::identity(9, 9));
        assert_eq!(i9.layout().dims(), &[3, 3]);
        assert_eq!(i9.kind(), OperatorKind::Unitary);
    }

    #[test]
    fn basis_tensor_index() {
        let s = ket(3, 0).tensor(&ket(3, 2));
        assert_eq!(s.amp(2), c(1.0, 0.0));
        assert_eq!(s.amps().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn superposition_tensor_indices() {
        // (|0⟩+|2⟩)/√2 ⊗ |1⟩ → indices 0·3+1 = 1 and 2·3+1 = 7
        let l = SubsystemLayout::qutrit();
        let sup = StateVector::new(l, vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let s = sup.tensor(&ket(3, 1));
        for i in 0..9 {
            let expected = if i == 1 || i == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((s.amp(i).re - expected).abs() < 1e-15, "index {i}");
        }
    }

    #[test]
    fn phase_on_first_qutrit() {
        let l = SubsystemLayout::qutrit();
        let flip0 = Operator::diagonal(l.clone(), &[c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let out = apply_on_subsystems(&phi0(), &flip0, &[0]).unwrap();
        assert!((out.amp(0).re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amp(8).re - FRAC_1_SQRT_2).abs() < 1e-15);

        // phase on |1⟩ only: component absent, state unchanged
        let flip1 = Operator::diagonal(l, &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let same = apply_on_subsystems(&phi0(), &flip1, &[0]).unwrap();
        assert_eq!(same, phi0());

        let id = Operator::identity(SubsystemLayout::new(vec![3, 3]).unwrap());
        assert_eq!(apply_on_subsystems(&phi0(), &id, &[0, 1]).unwrap(), phi0());
    }

    #[test]
    fn apply_rejects_mismatches() {
        let id2 = Operator::identity(SubsystemLayout::qubit());
        assert!(matches!(
            apply_on_subsystems(&phi0(), &id2, &[0]),
            Err(QlinError::DimensionMismatch { .. })
        ));
        let p = Operator::ket_projector(&ket(3, 0));
        assert!(matches!(apply_on_subsystems(&phi0(), &p, &[1]), Err(QlinError::NotUnitary(_))));
    }

    #[test]
    fn reversed_targets_transpose_action() {
        // X-like permutation |a,b⟩ → |b,a⟩ expressed as an operator on (1,0)
        let l = SubsystemLayout::new(vec![2, 3]).unwrap();
        let s = StateVector::basis(l, &[1, 2]).unwrap();
        let l32 = SubsystemLayout::new(vec![3, 2]).unwrap();
        let mut m = CMatrix::zeros(6, 6);
        // shift on the qutrit digit (first in target order), identity on the qubit
        for q in 0..3 {
            for b in 0..2 {
                m[(((q + 1) % 3) * 2 + b, q * 2 + b)] = c(1.0, 0.0);
            }
        }
        let op = Operator::unitary(l32, m).unwrap();
        let out = apply_on_subsystems(&s, &op, &[1, 0]).unwrap();
        let idx = out.layout().index_of(&[1, 0]).unwrap();
        assert!((out.amp(idx).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = phi0().density();
        let red = partial_trace(&rho, &[0]).unwrap();
        let expected = [0.5, 0.0, 0.5];
        for (i, e) in expected.iter().enumerate() {
            assert!((red.matrix()[(i, i)].re - e).abs() < 1e-15);
        }
        assert!(red.matrix()[(0, 2)].norm() < 1e-15);
        assert_eq!(partial_trace(&rho, &[0, 1]).unwrap(), rho);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
        let pure_route = partial_trace_pure(&phi0(), &[0]).unwrap();
        assert!(pure_route.max_deviation(&red).unwrap() < 1e-15);
    }

    #[test]
    fn split_recovers_product_factors() {
        let a = StateVector::plus_minus(true);
        let b = ket(3, 2);
        let prod = a.tensor(&b).tensor(&StateVector::plus_minus(false));
        let (keep, rest) = try_split(&prod, &[1], 1e-12).unwrap();
        assert!(keep.approx_eq_up_to_phase(&b, 1e-12));
        let rebuilt = permute(&keep.tensor(&rest), &[1, 0, 2]).unwrap();
        for (x, y) in rebuilt.amps().iter().zip(prod.amps().iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(try_split(&phi0(), &[0], 1e-9).is_none());
    }

    #[test]
    fn permute_moves_digits() {
        let s = StateVector::basis(SubsystemLayout::new(vec![2, 3]).unwrap(), &[1, 2]).unwrap();
        let p = permute(&s, &[1, 0]).unwrap();
        assert_eq!(p.layout().dims(), &[3, 2]);
        assert_eq!(p.amp(p.layout().index_of(&[2, 1]).unwrap()), c(1.0, 0.0));
    }
}
