use super::QlinError;

/// Ordered per-subsystem dimensions of a composite Hilbert space.
///
/// Basis indices are mixed-radix numbers over `dims` in big-endian order:
/// the first subsystem is the most significant digit, so `|0⟩₃ ⊗ |2⟩₃` is
/// index `0·3 + 2 = 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self, QlinError> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(QlinError::InvalidLayout("empty layout".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(QlinError::InvalidLayout(format!(
                "subsystem dimension {d} is below 2"
            )));
        }
        Ok(Self { dims })
    }

    pub fn qutrit() -> Self {
        Self { dims: vec![3] }
    }

    pub fn qubit() -> Self {
        Self { dims: vec![2] }
    }

    pub fn uniform(dim: usize, count: usize) -> Result<Self, QlinError> {
        Self::new(vec![dim; count])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Place value of each subsystem digit.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize, QlinError> {
        if digits.len() != self.dims.len() {
            return Err(QlinError::DimensionMismatch {
                expected: self.dims.len(),
                found: digits.len(),
            });
        }
        let mut index = 0;
        for (&digit, &d) in digits.iter().zip(&self.dims) {
            if digit >= d {
                return Err(QlinError::IndexOutOfRange { index: digit, len: d });
            }
            index = index * d + digit;
        }
        Ok(index)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    /// Layout of the listed subsystems, in the listed order.
    pub fn select(&self, targets: &[usize]) -> Result<Self, QlinError> {
        self.check_targets(targets)?;
        Ok(Self {
            dims: targets.iter().map(|&t| self.dims[t]).collect(),
        })
    }

    /// Subsystem indices not in `targets`, ascending.
    pub fn complement(&self, targets: &[usize]) -> Vec<usize> {
        (0..self.dims.len()).filter(|i| !targets.contains(i)).collect()
    }

    pub(crate) fn check_targets(&self, targets: &[usize]) -> Result<(), QlinError> {
        if targets.is_empty() {
            return Err(QlinError::EmptyTargets);
        }
        for (pos, &t) in targets.iter().enumerate() {
            if t >= self.dims.len() {
                return Err(QlinError::IndexOutOfRange {
                    index: t,
                    len: self.dims.len(),
                });
            }
            if targets[..pos].contains(&t) {
                return Err(QlinError::DuplicateTarget(t));
            }
        }
        Ok(())
    }

    /// Flat offsets of every basis state of `subsystems` (enumerated
    /// big-endian in the given order) with all other digits zero.
    pub(crate) fn offsets(&self, subsystems: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &s in subsystems {
            let d = self.dims[s];
            let mut next = Vec::with_capacity(offsets.len() * d);
            for &base in &offsets {
                for digit in 0..d {
                    next.push(base + digit * strides[s]);
                }
            }
            offsets = next;
        }
        offsets
    }
}
