use super::kernels::check_same;
use super::state::symmetrized;
use super::{c, hermitian_deviation, CMatrix, DensityMatrix, Operator, OperatorKind, QlinError, TOL};

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigensystem {
    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let w = c(f(l), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub(crate) fn eigensystem_of(m: &CMatrix) -> Result<Eigensystem, QlinError> {
    let dev = hermitian_deviation(m);
    if dev > TOL {
        return Err(QlinError::NotHermitian(dev));
    }
    let eig = nalgebra::SymmetricEigen::new(symmetrized(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(Eigensystem { values, vectors })
}

/// Spectral decomposition of a Hermitian operator (input symmetrized first).
pub fn hermitian_eigensystem(h: &Operator) -> Result<Eigensystem, QlinError> {
    eigensystem_of(h.matrix())
}

/// Sum of singular values; for Hermitian input, `Σ|λᵢ|`.
pub fn trace_norm(h: &Operator) -> Result<f64, QlinError> {
    Ok(eigensystem_of(h.matrix())?.values.iter().map(|l| l.abs()).sum())
}

/// `½‖ρ − σ‖_Tr`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QlinError> {
    Ok(0.5 * trace_norm(&rho.difference(sigma)?)?)
}

/// Principal square root of a density matrix; eigenvalues in `[-TOL, 0)` are
/// clamped to zero.
pub fn psd_sqrt(rho: &DensityMatrix) -> Result<CMatrix, QlinError> {
    let eig = eigensystem_of(rho.matrix())?;
    if let Some(&min) = eig.values.last() {
        if min < -TOL {
            return Err(QlinError::NotPositive(min));
        }
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// Square-root fidelity `‖√ρ √σ‖_Tr`, evaluated as `Tr √(√ρ σ √ρ)` and
/// clamped into `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QlinError> {
    check_same(rho, sigma)?;
    let root = psd_sqrt(rho)?;
    let inner = &root * sigma.matrix() * &root;
    let eig = eigensystem_of(&symmetrized(&inner))?;
    let f: f64 = eig.values.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Equal-prior optimal success probability `½ + ¼‖ρ₀ − ρ₁‖_Tr`.
pub fn helstrom_success(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64, QlinError> {
    Ok(0.5 + 0.25 * trace_norm(&rho0.difference(rho1)?)?)
}

/// The optimal two-outcome measurement: `guess_zero` projects onto the
/// positive eigenspace of `ρ₀ − ρ₁`, `guess_one` is its complement.
#[derive(Debug, Clone)]
pub struct HelstromMeasurement {
    pub guess_zero: Operator,
    pub guess_one: Operator,
    /// `¼‖ρ₀ − ρ₁‖_Tr`; zero means the measurement carries no information.
    pub bias: f64,
}

impl HelstromMeasurement {
    pub fn success(&self, rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64, QlinError> {
        Ok(0.5 * self.guess_zero.expectation_mixed(rho0)? + 0.5 * self.guess_one.expectation_mixed(rho1)?)
    }

    pub fn projectors(&self) -> [Operator; 2] {
        [self.guess_zero.clone(), self.guess_one.clone()]
    }
}

pub fn helstrom_measurement(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<HelstromMeasurement, QlinError> {
    let diff = rho0.difference(rho1)?;
    let eig = eigensystem_of(diff.matrix())?;
    let positive = eig.map(|l| if l > 1e-12 { 1.0 } else { 0.0 });
    let n = positive.nrows();
    let layout = rho0.layout().clone();
    let complement = CMatrix::identity(n, n) - &positive;
    Ok(HelstromMeasurement {
        guess_zero: Operator::new(layout.clone(), positive, OperatorKind::Projector)?,
        guess_one: Operator::new(layout, complement, OperatorKind::Projector)?,
        bias: 0.25 * eig.values.iter().map(|l| l.abs()).sum::<f64>(),
    })
}
