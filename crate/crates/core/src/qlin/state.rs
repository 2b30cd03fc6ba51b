use super::{c, hermitian_deviation, max_abs, CMatrix, CVector, QlinError, SubsystemLayout, C64, TOL};
use std::f64::consts::FRAC_1_SQRT_2;

/// Normalized pure state over a composite layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: SubsystemLayout,
    amps: CVector,
}

/// A measurement branch: the renormalized post-state together with the
/// squared norm it had before renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
}

impl StateVector {
    pub fn new(layout: SubsystemLayout, amps: Vec<C64>) -> Result<Self, QlinError> {
        let amps = check_amps(&layout, amps)?;
        let norm_sqr = amps.norm_squared();
        if (norm_sqr - 1.0).abs() > TOL {
            return Err(QlinError::NotNormalized(norm_sqr));
        }
        Ok(Self { layout, amps })
    }

    /// Normalizes `amps`, returning the squared norm as the branch probability.
    pub fn branch(layout: SubsystemLayout, amps: Vec<C64>) -> Result<Branch, QlinError> {
        let amps = check_amps(&layout, amps)?;
        Self::branch_from_vector(layout, amps)
    }

    pub(crate) fn branch_from_vector(
        layout: SubsystemLayout,
        amps: CVector,
    ) -> Result<Branch, QlinError> {
        let probability = amps.norm_squared();
        if probability <= f64::MIN_POSITIVE {
            return Err(QlinError::ZeroBranch);
        }
        let state = Self {
            layout,
            amps: amps.unscale(probability.sqrt()),
        };
        Ok(Branch { probability, state })
    }

    pub(crate) fn from_vector_unchecked(layout: SubsystemLayout, amps: CVector) -> Self {
        debug_assert_eq!(layout.total_dim(), amps.len());
        Self { layout, amps }
    }

    pub fn basis(layout: SubsystemLayout, digits: &[usize]) -> Result<Self, QlinError> {
        let index = layout.index_of(digits)?;
        let mut amps = CVector::zeros(layout.total_dim());
        amps[index] = c(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    /// Computational basis state `|k⟩` of a single qudit of dimension `dim`.
    pub fn ket(dim: usize, k: usize) -> Result<Self, QlinError> {
        Self::basis(SubsystemLayout::new(vec![dim])?, &[k])
    }

    /// `(|0⟩ + sign·|1⟩)/√2` on a qubit.
    pub fn plus_minus(negative: bool) -> Self {
        let s = if negative { -1.0 } else { 1.0 };
        Self {
            layout: SubsystemLayout::qubit(),
            amps: CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(s * FRAC_1_SQRT_2, 0.0)]),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64, QlinError> {
        same_layout(&self.layout, &other.layout)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Equality up to a global phase, within `tol` on every amplitude.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if self.layout != other.layout {
            return false;
        }
        let overlap = self.amps.dotc(&other.amps);
        if overlap.norm() < f64::MIN_POSITIVE {
            return false;
        }
        let phase = overlap / overlap.norm();
        self.amps
            .iter()
            .zip(other.amps.iter())
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

fn check_amps(layout: &SubsystemLayout, amps: Vec<C64>) -> Result<CVector, QlinError> {
    if amps.len() != layout.total_dim() {
        return Err(QlinError::DimensionMismatch {
            expected: layout.total_dim(),
            found: amps.len(),
        });
    }
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QlinError::NonFinite);
    }
    Ok(CVector::from_vec(amps))
}

pub(crate) fn same_layout(a: &SubsystemLayout, b: &SubsystemLayout) -> Result<(), QlinError> {
    if a.dims() != b.dims() {
        return Err(QlinError::LayoutMismatch(a.dims().to_vec(), b.dims().to_vec()));
    }
    Ok(())
}

fn check_square(layout: &SubsystemLayout, m: &CMatrix) -> Result<(), QlinError> {
    let n = layout.total_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(QlinError::DimensionMismatch {
            expected: n,
            found: m.nrows().max(m.ncols()),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QlinError::NonFinite);
    }
    Ok(())
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(layout: SubsystemLayout, entries: CMatrix) -> Result<Self, QlinError> {
        check_square(&layout, &entries)?;
        let dev = hermitian_deviation(&entries);
        if dev > TOL {
            return Err(QlinError::NotHermitian(dev));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TOL || trace.im.abs() > TOL {
            return Err(QlinError::BadTrace(trace.re));
        }
        let min_eig = nalgebra::SymmetricEigen::new(symmetrized(&entries))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -TOL {
            return Err(QlinError::NotPositive(min_eig));
        }
        Ok(Self { layout, entries })
    }

    pub(crate) fn from_matrix_unchecked(layout: SubsystemLayout, entries: CMatrix) -> Self {
        debug_assert_eq!(layout.total_dim(), entries.nrows());
        Self { layout, entries }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.amps();
        Self {
            layout: state.layout().clone(),
            entries: v * v.adjoint(),
        }
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self, QlinError> {
        let Some((_, first)) = parts.first() else {
            return Err(QlinError::EmptyTargets);
        };
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > TOL || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(QlinError::BadTrace(total));
        }
        let n = first.layout.total_dim();
        let mut entries = CMatrix::zeros(n, n);
        for (w, rho) in parts {
            same_layout(&first.layout, &rho.layout)?;
            entries += &rho.entries * c(*w, 0.0);
        }
        Ok(Self {
            layout: first.layout.clone(),
            entries,
        })
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self {
            entries: CMatrix::identity(n, n) * c(1.0 / n as f64, 0.0),
            layout,
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// `ρ − σ` as a Hermitian operator.
    pub fn difference(&self, other: &Self) -> Result<Operator, QlinError> {
        same_layout(&self.layout, &other.layout)?;
        Ok(Operator {
            layout: self.layout.clone(),
            entries: &self.entries - &other.entries,
            kind: OperatorKind::Hermitian,
        })
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            layout: self.layout.clone(),
            entries: self.entries.clone(),
            kind: OperatorKind::Hermitian,
        }
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_deviation(&self, other: &Self) -> Result<f64, QlinError> {
        same_layout(&self.layout, &other.layout)?;
        Ok(max_abs(&(&self.entries - &other.entries)))
    }
}

pub(crate) fn symmetrized(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Projector,
    /// One element of a Kraus family; completeness is checked on the family.
    Kraus,
    Hermitian,
    Generic,
}

/// Square matrix acting on a layout, tagged with what it has been verified to be.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SubsystemLayout,
    entries: CMatrix,
    kind: OperatorKind,
}

impl Operator {
    pub fn new(layout: SubsystemLayout, entries: CMatrix, kind: OperatorKind) -> Result<Self, QlinError> {
        check_square(&layout, &entries)?;
        let n = layout.total_dim();
        match kind {
            OperatorKind::Unitary => {
                let dev = max_abs(&(entries.adjoint() * &entries - CMatrix::identity(n, n)));
                if dev > TOL {
                    return Err(QlinError::NotUnitary(dev));
                }
            }
            OperatorKind::Projector => {
                let herm = hermitian_deviation(&entries);
                let idem = max_abs(&(&entries * &entries - &entries));
                if herm.max(idem) > TOL {
                    return Err(QlinError::NotProjector(herm.max(idem)));
                }
            }
            OperatorKind::Hermitian => {
                let dev = hermitian_deviation(&entries);
                if dev > TOL {
                    return Err(QlinError::NotHermitian(dev));
                }
            }
            OperatorKind::Kraus | OperatorKind::Generic => {}
        }
        Ok(Self { layout, entries, kind })
    }

    pub fn unitary(layout: SubsystemLayout, entries: CMatrix) -> Result<Self, QlinError> {
        Self::new(layout, entries, OperatorKind::Unitary)
    }

    pub fn projector(layout: SubsystemLayout, entries: CMatrix) -> Result<Self, QlinError> {
        Self::new(layout, entries, OperatorKind::Projector)
    }

    pub fn hermitian(layout: SubsystemLayout, entries: CMatrix) -> Result<Self, QlinError> {
        Self::new(layout, entries, OperatorKind::Hermitian)
    }

    pub fn generic(layout: SubsystemLayout, entries: CMatrix) -> Result<Self, QlinError> {
        Self::new(layout, entries, OperatorKind::Generic)
    }

    pub fn kraus(layout: SubsystemLayout, entries: CMatrix) -> Result<Self, QlinError> {
        Self::new(layout, entries, OperatorKind::Kraus)
    }

    pub(crate) fn from_parts_unchecked(layout: SubsystemLayout, entries: CMatrix, kind: OperatorKind) -> Self {
        Self { layout, entries, kind }
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            entries: CMatrix::identity(n, n),
            kind: OperatorKind::Unitary,
        }
    }

    /// Diagonal operator; the kind is inferred (unitary when every entry has
    /// modulus one, projector when every entry is 0 or 1, else generic).
    pub fn diagonal(layout: SubsystemLayout, diag: &[C64]) -> Result<Self, QlinError> {
        if diag.len() != layout.total_dim() {
            return Err(QlinError::DimensionMismatch {
                expected: layout.total_dim(),
                found: diag.len(),
            });
        }
        let entries = CMatrix::from_diagonal(&CVector::from_column_slice(diag));
        let kind = if diag.iter().all(|z| (z.norm() - 1.0).abs() <= TOL) {
            OperatorKind::Unitary
        } else if diag
            .iter()
            .all(|z| z.norm() <= TOL || (z - c(1.0, 0.0)).norm() <= TOL)
        {
            OperatorKind::Projector
        } else if diag.iter().all(|z| z.im.abs() <= TOL) {
            OperatorKind::Hermitian
        } else {
            OperatorKind::Generic
        };
        Self::new(layout, entries, kind)
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn ket_projector(state: &StateVector) -> Self {
        let v = state.amps();
        Self {
            layout: state.layout().clone(),
            entries: v * v.adjoint(),
            kind: OperatorKind::Projector,
        }
    }

    /// `I − Σ Pₖ`, the projector completing an orthogonal family.
    pub fn complement_of(projectors: &[&Operator]) -> Result<Self, QlinError> {
        let Some(first) = projectors.first() else {
            return Err(QlinError::EmptyTargets);
        };
        let n = first.layout.total_dim();
        let mut entries = CMatrix::identity(n, n);
        for p in projectors {
            same_layout(&first.layout, &p.layout)?;
            entries -= &p.entries;
        }
        Self::projector(first.layout.clone(), entries)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: self.entries.adjoint(),
            kind: match self.kind {
                OperatorKind::Kraus => OperatorKind::Generic,
                k => k,
            },
        }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self, QlinError> {
        same_layout(&self.layout, &other.layout)?;
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            _ => OperatorKind::Generic,
        };
        Ok(Self {
            layout: self.layout.clone(),
            entries: &self.entries * &other.entries,
            kind,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: &self.entries * c(factor, 0.0),
            kind: match self.kind {
                OperatorKind::Hermitian | OperatorKind::Projector => OperatorKind::Hermitian,
                _ => OperatorKind::Generic,
            },
        }
    }

    /// Hermitian linear combination `self + w·other` of two Hermitian operators.
    pub fn add_scaled(&self, w: f64, other: &Self) -> Result<Self, QlinError> {
        same_layout(&self.layout, &other.layout)?;
        Self::hermitian(self.layout.clone(), &self.entries + &other.entries * c(w, 0.0))
    }

    /// `⟨ψ|A|ψ⟩` real part.
    pub fn expectation(&self, state: &StateVector) -> Result<f64, QlinError> {
        same_layout(&self.layout, state.layout())?;
        let v = state.amps();
        Ok(v.dotc(&(&self.entries * v)).re)
    }

    /// `Tr(A ρ)` real part.
    pub fn expectation_mixed(&self, rho: &DensityMatrix) -> Result<f64, QlinError> {
        same_layout(&self.layout, rho.layout())?;
        Ok((&self.entries * rho.matrix()).trace().re)
    }
}

/// Family of Kraus operators on one layout with `Σ K†K = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausFamily {
    ops: Vec<Operator>,
}

impl KrausFamily {
    pub fn new(ops: Vec<Operator>) -> Result<Self, QlinError> {
        let Some(first) = ops.first() else {
            return Err(QlinError::EmptyTargets);
        };
        let n = first.dim();
        let mut sum = CMatrix::zeros(n, n);
        for k in &ops {
            same_layout(first.layout(), k.layout())?;
            sum += k.matrix().adjoint() * k.matrix();
        }
        let dev = max_abs(&(sum - CMatrix::identity(n, n)));
        if dev > TOL {
            return Err(QlinError::Incomplete(dev));
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.ops[0].layout()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_amps(a: f64, b: f64) -> Vec<C64> {
        vec![c(a, 0.0), c(b, 0.0)]
    }

    #[test]
    fn rejects_unnormalized_and_non_finite() {
        let l = SubsystemLayout::qubit();
        assert!(matches!(
            StateVector::new(l.clone(), qubit_amps(1.0, 1.0)),
            Err(QlinError::NotNormalized(_))
        ));
        assert_eq!(
            StateVector::new(l.clone(), qubit_amps(f64::NAN, 0.0)),
            Err(QlinError::NonFinite)
        );
        assert!(StateVector::new(l, qubit_amps(1.0, 0.0)).is_ok());
    }

    #[test]
    fn branch_carries_squared_norm() {
        let b = StateVector::branch(SubsystemLayout::qubit(), qubit_amps(0.6, 0.0)).unwrap();
        assert!((b.probability - 0.36).abs() < 1e-15);
        assert!((b.state.amp(0).re - 1.0).abs() < 1e-15);
        assert_eq!(
            StateVector::branch(SubsystemLayout::qubit(), qubit_amps(0.0, 0.0)),
            Err(QlinError::ZeroBranch)
        );
    }

    #[test]
    fn density_validation() {
        let l = SubsystemLayout::qubit();
        let bad_trace = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(l.clone(), bad_trace), Err(QlinError::BadTrace(_))));
        let negative = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(l.clone(), negative), Err(QlinError::NotPositive(_))));
        let mut skew = CMatrix::identity(2, 2) * c(0.5, 0.0);
        skew[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(l, skew), Err(QlinError::NotHermitian(_))));
    }

    #[test]
    fn operator_kinds_are_checked() {
        let l = SubsystemLayout::qubit();
        let not_unitary = CMatrix::identity(2, 2) * c(2.0, 0.0);
        assert!(Operator::unitary(l.clone(), not_unitary.clone()).is_err());
        assert!(Operator::projector(l.clone(), not_unitary).is_err());
        let p = Operator::ket_projector(&StateVector::plus_minus(false));
        assert!(Operator::projector(l.clone(), p.matrix().clone()).is_ok());
        let d = Operator::diagonal(l.clone(), &[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(d.kind(), OperatorKind::Unitary);
        let d = Operator::diagonal(l, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(d.kind(), OperatorKind::Projector);
    }

    #[test]
    fn kraus_family_completeness() {
        let l = SubsystemLayout::qutrit();
        let ops: Vec<_> = (0..3)
            .map(|k| Operator::ket_projector(&StateVector::ket(3, k).unwrap()))
            .collect();
        assert!(KrausFamily::new(ops.clone()).is_ok());
        assert!(matches!(
            KrausFamily::new(ops[..2].to_vec()),
            Err(QlinError::Incomplete(_))
        ));
        let _ = l;
    }

    #[test]
    fn phase_invariant_comparison() {
        let a = StateVector::plus_minus(true);
        let amps: Vec<C64> = a.amps().iter().map(|z| z * c(0.0, 1.0)).collect();
        let b = StateVector::new(SubsystemLayout::qubit(), amps).unwrap();
        assert!(a.approx_eq_up_to_phase(&b, 1e-12));
        assert!(!a.approx_eq_up_to_phase(&StateVector::plus_minus(false), 1e-6));
    }
}
