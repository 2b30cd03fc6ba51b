use rand::Rng;

use super::kernels::apply_unnormalized;
use super::state::same_layout;
use super::{max_abs, Branch, CMatrix, KrausFamily, Operator, OperatorKind, QlinError, StateVector, TOL};

/// Outcome of a sampled measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub outcome: usize,
    pub state: StateVector,
    pub probability: f64,
}

/// Branches below this probability are treated as impossible.
const ZERO_BRANCH: f64 = 1e-15;

/// Checks that `projectors` are projectors on one layout, pairwise
/// orthogonal and summing to the identity, all within `TOL`.
pub fn validate_projective_set(projectors: &[Operator]) -> Result<(), QlinError> {
    let Some(first) = projectors.first() else {
        return Err(QlinError::EmptyTargets);
    };
    let n = first.dim();
    let mut sum = CMatrix::zeros(n, n);
    for (i, p) in projectors.iter().enumerate() {
        same_layout(first.layout(), p.layout())?;
        if p.kind() != OperatorKind::Projector {
            Operator::projector(p.layout().clone(), p.matrix().clone())?;
        }
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            if max_abs(&(p.matrix() * q.matrix())) > TOL {
                return Err(QlinError::NotOrthogonal(i, j));
            }
        }
        sum += p.matrix();
    }
    let dev = max_abs(&(sum - CMatrix::identity(n, n)));
    if dev > TOL {
        return Err(QlinError::Incomplete(dev));
    }
    Ok(())
}

fn enumerate(s: &StateVector, ops: &[Operator], targets: &[usize]) -> Result<Vec<Option<Branch>>, QlinError> {
    ops.iter()
        .map(|k| {
            let amps = apply_unnormalized(s, k, targets)?;
            if amps.norm_squared() < ZERO_BRANCH {
                Ok(None)
            } else {
                StateVector::branch_from_vector(s.layout().clone(), amps).map(Some)
            }
        })
        .collect()
}

fn sample<R: Rng + ?Sized>(branches: Vec<Option<Branch>>, rng: &mut R) -> Result<Measured, QlinError> {
    let total: f64 = branches.iter().flatten().map(|b| b.probability).sum();
    if (total - 1.0).abs() > TOL {
        return Err(QlinError::Incomplete((total - 1.0).abs()));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (outcome, branch) in branches.into_iter().enumerate() {
        let Some(branch) = branch else { continue };
        acc += branch.probability;
        if u < acc {
            return Ok(Measured {
                outcome,
                probability: branch.probability,
                state: branch.state,
            });
        }
        last = Some((outcome, branch));
    }
    // u landed in the rounding gap above the final cumulative sum
    let (outcome, branch) = last.ok_or(QlinError::ZeroBranch)?;
    Ok(Measured {
        outcome,
        probability: branch.probability,
        state: branch.state,
    })
}

/// Exact branch enumeration of a projective measurement on `targets`;
/// impossible outcomes are `None`.
pub fn projective_branches_on(
    s: &StateVector,
    projectors: &[Operator],
    targets: &[usize],
) -> Result<Vec<Option<Branch>>, QlinError> {
    validate_projective_set(projectors)?;
    enumerate(s, projectors, targets)
}

pub fn measure_on<R: Rng + ?Sized>(
    s: &StateVector,
    projectors: &[Operator],
    targets: &[usize],
    rng: &mut R,
) -> Result<Measured, QlinError> {
    sample(projective_branches_on(s, projectors, targets)?, rng)
}

/// Samples a projective measurement on the whole system.
pub fn measure_projective<R: Rng + ?Sized>(
    s: &StateVector,
    projectors: &[Operator],
    rng: &mut R,
) -> Result<Measured, QlinError> {
    let all: Vec<usize> = (0..s.layout().len()).collect();
    measure_on(s, projectors, &all, rng)
}

pub fn kraus_branches_on(
    s: &StateVector,
    family: &KrausFamily,
    targets: &[usize],
) -> Result<Vec<Option<Branch>>, QlinError> {
    enumerate(s, family.ops(), targets)
}

/// Samples a Kraus instrument, keeping the classical outcome.
pub fn measure_kraus_on<R: Rng + ?Sized>(
    s: &StateVector,
    family: &KrausFamily,
    targets: &[usize],
    rng: &mut R,
) -> Result<Measured, QlinError> {
    sample(kraus_branches_on(s, family, targets)?, rng)
}
