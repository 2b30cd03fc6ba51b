//! Exact check that a reliable `x_b` attack on a CKS round leaves Alice with
//! no information about `b`.
//!
//! Alice's most general no-abort action maps `|e⟩|j⟩ → |f_j⟩|j⟩` for
//! `j ∈ {0, 1}` and `|e⟩|2⟩ → |f'⟩|2⟩`, so after step 3 the joint state is
//! `(|f_b⟩|bb⟩ + |f'⟩|22⟩)/√2`. She then measures her ancilla with `M`. Her
//! view for a given `b` is the collection of unnormalized post-`M` ancilla
//! states, one block per outcome.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::cks::decode_projectors;
use crate::qlin::random::{random_unit_vector, random_unitary};
use crate::qlin::{
    c, partial_trace_pure, projective_branches_on, trace_norm, validate_projective_set, CMatrix, CVector,
    DensityMatrix, Operator, StateVector, SubsystemLayout,
};
use crate::Bit;

/// Joint branch probabilities below this count as impossible.
const RELIABILITY_TOL: f64 = 1e-16;

#[derive(Debug, Clone)]
pub struct CheatUnitarySpec {
    f: [CVector; 2],
    fprime: CVector,
    measurement: [Operator; 2],
}

impl CheatUnitarySpec {
    pub fn new(f0: CVector, f1: CVector, fprime: CVector, measurement: [Operator; 2]) -> Result<Self, AnalysisError> {
        let d = fprime.len();
        for v in [&f0, &f1, &fprime] {
            if v.len() != d || d < 2 {
                return Err(AnalysisError::Domain("ancilla vectors must share a dimension ≥ 2".into()));
            }
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(AnalysisError::Domain(format!("ancilla vector has norm {}", v.norm())));
            }
        }
        if measurement.iter().any(|p| p.dim() != d) {
            return Err(AnalysisError::Domain("measurement acts on the wrong dimension".into()));
        }
        validate_projective_set(&measurement)?;
        Ok(Self {
            f: [f0, f1],
            fprime,
            measurement,
        })
    }

    pub fn dim(&self) -> usize {
        self.fprime.len()
    }

    pub fn f(&self, b: Bit) -> &CVector {
        &self.f[b.index()]
    }

    pub fn fprime(&self) -> &CVector {
        &self.fprime
    }

    pub fn measurement(&self) -> &[Operator; 2] {
        &self.measurement
    }

    /// `(|f_b⟩|bb⟩ + |f'⟩|22⟩)/√2` on `α ⊗ β ⊗ β'`.
    pub fn joint_state(&self, b: Bit) -> StateVector {
        let d = self.dim();
        let layout = SubsystemLayout::new(vec![d, 3, 3]).expect("dims");
        let k = b.index();
        let mut bb = CVector::zeros(9);
        bb[k * 3 + k] = c(1.0, 0.0);
        let mut tt = CVector::zeros(9);
        tt[8] = c(1.0, 0.0);
        let amps = (self.f[k].kronecker(&bb) + self.fprime.kronecker(&tt)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        StateVector::new(layout, amps.iter().copied().collect()).expect("unit norm by construction")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// `½ Σ_k ‖σ_{0,k} − σ_{1,k}‖`: distance between Alice's post-`M` views.
    pub view_distance: f64,
    /// `½‖ρ_{b=0} − ρ_{b=1}‖` before `M`, for diagnostics.
    pub pre_measurement_distance: f64,
    /// `P(k | b)` indexed `[b][k]`.
    pub outcome_probabilities: [[f64; 2]; 2],
}

impl Theorem1Report {
    pub fn views_equal(&self, tol: f64) -> bool {
        self.view_distance <= tol
    }
}

/// Ancilla state (unnormalized, weighted by branch probability) for each `M`
/// outcome.
fn views(spec: &CheatUnitarySpec, b: Bit) -> Result<Vec<(f64, DensityMatrix)>, AnalysisError> {
    let s = spec.joint_state(b);
    projective_branches_on(&s, spec.measurement(), &[0])?
        .into_iter()
        .map(|br| match br {
            None => Ok((0.0, DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![spec.dim()])?))),
            Some(br) => Ok((br.probability, partial_trace_pure(&br.state, &[0])?)),
        })
        .collect()
}

/// For each `b` and `M` outcome, at most one of Bob's decode outcomes is
/// possible: knowing `b` and `k` fixes `x_b`.
pub fn reliability_holds(spec: &CheatUnitarySpec) -> Result<bool, AnalysisError> {
    for b in Bit::BOTH {
        let [p0, p1, rest] = decode_projectors(b);
        let s = spec.joint_state(b);
        let bob = projective_branches_on(&s, &[p0, p1, rest], &[1, 2])?;
        let mut joint = [[0.0; 2]; 2];
        for (x, br) in bob.iter().take(2).enumerate() {
            let Some(br) = br else { continue };
            for (k, m) in projective_branches_on(&br.state, spec.measurement(), &[0])?.iter().enumerate() {
                if let Some(m) = m {
                    joint[k][x] = br.probability * m.probability;
                }
            }
        }
        if joint.iter().any(|row| row[0] > RELIABILITY_TOL && row[1] > RELIABILITY_TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn weighted(m: &DensityMatrix, w: f64) -> CMatrix {
    m.matrix() * c(w, 0.0)
}

pub fn theorem1_verify(spec: &CheatUnitarySpec) -> Result<Theorem1Report, AnalysisError> {
    if !reliability_holds(spec)? {
        return Err(AnalysisError::Precondition(
            "measurement does not determine x_b with certainty".into(),
        ));
    }
    let v0 = views(spec, Bit::Zero)?;
    let v1 = views(spec, Bit::One)?;
    let layout = SubsystemLayout::new(vec![spec.dim()])?;
    let mut distance = 0.0;
    for ((p0, s0), (p1, s1)) in v0.iter().zip(&v1) {
        let diff = weighted(s0, *p0) - weighted(s1, *p1);
        distance += 0.5 * trace_norm(&Operator::hermitian(layout.clone(), diff)?)?;
    }
    let pre = |b: Bit| partial_trace_pure(&spec.joint_state(b), &[0]);
    let pre_distance = 0.5 * trace_norm(&pre(Bit::Zero)?.difference(&pre(Bit::One)?)?)?;
    Ok(Theorem1Report {
        view_distance: distance,
        pre_measurement_distance: pre_distance,
        outcome_probabilities: [[v0[0].0, v0[1].0], [v1[0].0, v1[1].0]],
    })
}

/// Random two-outcome projective measurement: a Haar unitary's columns split
/// into two nonempty groups.
pub fn random_two_outcome<R: Rng + ?Sized>(d: usize, rng: &mut R) -> [Operator; 2] {
    let layout = SubsystemLayout::new(vec![d]).expect("d >= 2");
    let u = random_unitary(&layout, rng);
    let split = rng.random_range(1..d);
    let block = |cols: std::ops::Range<usize>| {
        let v = u.matrix().columns(cols.start, cols.len()).into_owned();
        Operator::projector(layout.clone(), &v * v.adjoint()).expect("orthonormal columns")
    };
    [block(0..split), block(split..d)]
}

/// A random spec satisfying the reliability condition: `f'` and `M` random,
/// and on each `M` block `f_b` agrees with `f'` up to a random sign.
pub fn random_reliable_spec<R: Rng + ?Sized>(rng: &mut R) -> CheatUnitarySpec {
    let d = rng.random_range(2..=4);
    let m = random_two_outcome(d, rng);
    let fprime = random_unit_vector(d, rng);
    let f = |rng: &mut R| {
        let mut v = CVector::zeros(d);
        for p in &m {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            v += p.matrix() * &fprime * c(sign, 0.0);
        }
        v
    };
    let f0 = f(rng);
    let f1 = f(rng);
    CheatUnitarySpec::new(f0, f1, fprime, m).expect("unit vectors and a projective pair")
}
