//! Dense complex linear algebra over small composite Hilbert spaces.
//!
//! Everything the protocol layer needs lives here: state vectors and
//! density matrices over mixed-radix qudit layouts, subsystem-local operator
//! application, partial traces, Hermitian spectra, trace norm, fidelity, the
//! equal-prior Helstrom optimum and projective / Kraus measurement sampling.
//!
//! All values are immutable after construction; the only impure entry points
//! are the samplers, which draw from a caller-supplied random stream.

mod kernels;
mod layout;
mod measure;
pub mod random;
mod spectral;
mod state;

pub use kernels::{apply_on_subsystems, partial_trace, partial_trace_pure, Tensor};
pub(crate) use kernels::{permute, try_split};
pub use layout::SubsystemLayout;
pub use measure::{
    kraus_branches_on, measure_kraus_on, measure_on, measure_projective, projective_branches_on,
    validate_projective_set, Measured,
};
pub use spectral::{
    fidelity, helstrom_measurement, helstrom_success, hermitian_eigensystem, psd_sqrt,
    trace_distance, trace_norm, Eigensystem, HelstromMeasurement,
};
pub use state::{Branch, DensityMatrix, KrausFamily, Operator, OperatorKind, StateVector};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Structural tolerance for normalization, Hermiticity, unitarity and
/// projector identities.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlinError {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("subsystem {0} listed twice")]
    DuplicateTarget(usize),
    #[error("no subsystems selected")]
    EmptyTargets,
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("state not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not a projector (max deviation {0:e})")]
    NotProjector(f64),
    #[error("density matrix trace {0} differs from 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("projectors {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("operator family is not complete (max deviation {0:e})")]
    Incomplete(f64),
    #[error("layouts differ: {0:?} vs {1:?}")]
    LayoutMismatch(Vec<usize>, Vec<usize>),
    #[error("zero-probability branch cannot be normalized")]
    ZeroBranch,
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}
