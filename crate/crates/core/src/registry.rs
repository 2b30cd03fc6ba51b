//! Shared quantum state with party ownership of subsystems.
//!
//! The global state is kept as a set of disjoint pure-state factors. Sending a
//! qudit to the other party is an ownership transfer; only the owner may act on
//! a subsystem. Factors are merged lazily when an operation spans several of
//! them and split again after measurements whenever the result is a product.

use std::collections::BTreeMap;
use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::qlin::{
    apply_on_subsystems, measure_kraus_on, measure_on, partial_trace_pure, permute, try_split, DensityMatrix,
    KrausFamily, Operator, QlinError, StateVector, Tensor,
};

/// Residual below which a post-measurement state is treated as a product.
const SPLIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// Opaque subsystem token, unique within one registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle(u64);

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("{caller} does not own {handle} (owner: {owner})")]
    NotOwner { handle: Handle, owner: Party, caller: Party },
    #[error("{0} has been released")]
    Stale(Handle),
    #[error("{0} is not known to this registry")]
    Unknown(Handle),
    #[error("{0} listed twice")]
    Duplicate(Handle),
    #[error("allocation dims {dims:?} do not match state layout {layout:?}")]
    AllocMismatch { dims: Vec<usize>, layout: Vec<usize> },
    #[error(transparent)]
    Qlin(#[from] QlinError),
}

/// A local action a party performs on subsystems it owns.
#[derive(Debug, Clone, Copy)]
pub enum LocalOp<'a> {
    Unitary(&'a Operator),
    /// Complete projective measurement; the outcome index is returned.
    Measure(&'a [Operator]),
    /// Kraus instrument; the branch index is returned.
    Instrument(&'a KrausFamily),
}

#[derive(Debug, Clone)]
struct Slot {
    dim: usize,
    owner: Party,
    factor: u64,
    live: bool,
}

#[derive(Debug, Clone)]
struct Factor {
    handles: Vec<Handle>,
    state: StateVector,
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    next_handle: u64,
    next_factor: u64,
    slots: BTreeMap<Handle, Slot>,
    factors: BTreeMap<u64, Factor>,
    peak_dim: usize,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `state` as a fresh factor owned by `owner`, one handle per subsystem.
    pub fn alloc(&mut self, owner: Party, state: StateVector, dims: &[usize]) -> Result<Vec<Handle>, RegistryError> {
        if state.layout().dims() != dims {
            return Err(RegistryError::AllocMismatch {
                dims: dims.to_vec(),
                layout: state.layout().dims().to_vec(),
            });
        }
        let fid = self.next_factor;
        self.next_factor += 1;
        let handles: Vec<Handle> = dims
            .iter()
            .map(|&dim| {
                let h = Handle(self.next_handle);
                self.next_handle += 1;
                self.slots.insert(
                    h,
                    Slot {
                        dim,
                        owner,
                        factor: fid,
                        live: true,
                    },
                );
                h
            })
            .collect();
        self.peak_dim = self.peak_dim.max(state.layout().total_dim());
        self.factors.insert(
            fid,
            Factor {
                handles: handles.clone(),
                state,
            },
        );
        Ok(handles)
    }

    fn slot(&self, h: Handle) -> Result<&Slot, RegistryError> {
        let slot = self.slots.get(&h).ok_or(RegistryError::Unknown(h))?;
        if !slot.live {
            return Err(RegistryError::Stale(h));
        }
        Ok(slot)
    }

    fn check_owned(&self, caller: Party, handles: &[Handle]) -> Result<(), RegistryError> {
        for (i, &h) in handles.iter().enumerate() {
            let slot = self.slot(h)?;
            if slot.owner != caller {
                return Err(RegistryError::NotOwner {
                    handle: h,
                    owner: slot.owner,
                    caller,
                });
            }
            if handles[..i].contains(&h) {
                return Err(RegistryError::Duplicate(h));
            }
        }
        Ok(())
    }

    pub fn owner(&self, h: Handle) -> Result<Party, RegistryError> {
        Ok(self.slot(h)?.owner)
    }

    pub fn dim(&self, h: Handle) -> Result<usize, RegistryError> {
        Ok(self.slot(h)?.dim)
    }

    pub fn is_live(&self, h: Handle) -> bool {
        self.slots.get(&h).is_some_and(|s| s.live)
    }

    /// Hands `h` to `to`. The quantum state is untouched.
    pub fn transfer(&mut self, caller: Party, h: Handle, to: Party) -> Result<(), RegistryError> {
        self.check_owned(caller, &[h])?;
        if let Some(slot) = self.slots.get_mut(&h) {
            slot.owner = to;
        }
        Ok(())
    }

    /// Merges every factor touching `handles` into one and returns its id.
    fn merge(&mut self, handles: &[Handle]) -> u64 {
        let mut ids: Vec<u64> = handles.iter().map(|h| self.slots[h].factor).collect();
        ids.sort_unstable();
        ids.dedup();
        let target = ids[0];
        for &id in &ids[1..] {
            let other = self.factors.remove(&id).expect("factor of live handle");
            for h in &other.handles {
                if let Some(slot) = self.slots.get_mut(h) {
                    slot.factor = target;
                }
            }
            let base = self.factors.get_mut(&target).expect("factor of live handle");
            base.state = base.state.tensor(&other.state);
            base.handles.extend(other.handles);
        }
        self.peak_dim = self.peak_dim.max(self.factors[&target].state.layout().total_dim());
        target
    }

    fn positions(&self, fid: u64, handles: &[Handle]) -> Vec<usize> {
        let f = &self.factors[&fid];
        handles
            .iter()
            .map(|h| f.handles.iter().position(|x| x == h).expect("handle in its factor"))
            .collect()
    }

    /// Moves the subsystems at `keep` into a new factor if the state is a
    /// product across that cut.
    fn detach(&mut self, fid: u64, keep: &[usize]) -> bool {
        let f = &self.factors[&fid];
        let Some((kept, rest)) = try_split(&f.state, keep, SPLIT_TOL) else {
            return false;
        };
        let moved: Vec<Handle> = keep.iter().map(|&p| f.handles[p]).collect();
        let remaining: Vec<Handle> = f.handles.iter().copied().filter(|h| !moved.contains(h)).collect();
        let new_id = self.next_factor;
        self.next_factor += 1;
        for h in &moved {
            if let Some(slot) = self.slots.get_mut(h) {
                slot.factor = new_id;
            }
        }
        self.factors.insert(
            fid,
            Factor {
                handles: remaining,
                state: rest,
            },
        );
        self.factors.insert(
            new_id,
            Factor {
                handles: moved,
                state: kept,
            },
        );
        true
    }

    /// After a measurement, peels off measured subsystems that ended up in a
    /// product state, first jointly and then one at a time.
    fn compact(&mut self, handles: &[Handle]) {
        let fid = self.slots[&handles[0]].factor;
        let pos = self.positions(fid, handles);
        if pos.len() > 1 && self.detach(fid, &pos) {
            let sub = self.slots[&handles[0]].factor;
            for &h in handles {
                let p = self.positions(sub, &[h]);
                self.detach(sub, &p);
            }
            return;
        }
        for &h in handles {
            let f = self.slots[&h].factor;
            let p = self.positions(f, &[h]);
            self.detach(f, &p);
        }
    }

    /// Runs `op` on `targets` on behalf of `party`. Returns the measurement
    /// outcome for `Measure` and `Instrument`.
    pub fn apply_local(
        &mut self,
        party: Party,
        op: LocalOp<'_>,
        targets: &[Handle],
        rng: &mut dyn RngCore,
    ) -> Result<Option<usize>, RegistryError> {
        if targets.is_empty() {
            return Err(QlinError::EmptyTargets.into());
        }
        self.check_owned(party, targets)?;
        let fid = self.merge(targets);
        let pos = self.positions(fid, targets);
        let state = &self.factors[&fid].state;
        let (next, outcome) = match op {
            LocalOp::Unitary(u) => (apply_on_subsystems(state, u, &pos)?, None),
            LocalOp::Measure(ps) => {
                let m = measure_on(state, ps, &pos, rng)?;
                (m.state, Some(m.outcome))
            }
            LocalOp::Instrument(k) => {
                let m = measure_kraus_on(state, k, &pos, rng)?;
                (m.state, Some(m.outcome))
            }
        };
        self.factors.get_mut(&fid).expect("merged factor").state = next;
        if outcome.is_some() && self.factors[&fid].handles.len() > targets.len() {
            self.compact(targets);
        }
        Ok(outcome)
    }

    /// Discards `h`. Its handle becomes stale; if it is unentangled it is
    /// traced out of the registry immediately.
    pub fn release(&mut self, caller: Party, h: Handle) -> Result<(), RegistryError> {
        self.check_owned(caller, &[h])?;
        self.slots.get_mut(&h).expect("checked").live = false;
        let fid = self.slots[&h].factor;
        let f = &self.factors[&fid];
        if f.handles.len() == 1 {
            self.factors.remove(&fid);
            return Ok(());
        }
        // everything in the factor is dead: drop it wholesale
        if f.handles.iter().all(|x| !self.slots[x].live) {
            self.factors.remove(&fid);
            return Ok(());
        }
        let p = self.positions(fid, &[h]);
        if self.detach(fid, &p) {
            let dropped = self.slots[&h].factor;
            self.factors.remove(&dropped);
        }
        Ok(())
    }

    /// Reduced state of `handles` in the given order. Analysis-only
    /// introspection; strategies never see this.
    pub fn reduced_state(&self, handles: &[Handle]) -> Result<DensityMatrix, RegistryError> {
        if handles.is_empty() {
            return Err(QlinError::EmptyTargets.into());
        }
        for (i, &h) in handles.iter().enumerate() {
            self.slot(h)?;
            if handles[..i].contains(&h) {
                return Err(RegistryError::Duplicate(h));
            }
        }
        let mut ids: Vec<u64> = handles.iter().map(|h| self.slots[h].factor).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut order: Vec<Handle> = Vec::new();
        let mut joint: Option<StateVector> = None;
        for id in ids {
            let f = &self.factors[&id];
            order.extend(&f.handles);
            joint = Some(match joint {
                None => f.state.clone(),
                Some(s) => s.tensor(&f.state),
            });
        }
        let joint = joint.expect("at least one factor");
        let keep: Vec<usize> = handles
            .iter()
            .map(|h| order.iter().position(|x| x == h).expect("handle in joint"))
            .collect();
        Ok(partial_trace_pure(&joint, &keep)?)
    }

    /// Pure state of the factor holding `h`, with that factor's handle order.
    /// Analysis-only.
    pub fn factor_state(&self, h: Handle) -> Result<(Vec<Handle>, StateVector), RegistryError> {
        let slot = self.slot(h)?;
        let f = &self.factors[&slot.factor];
        Ok((f.handles.clone(), f.state.clone()))
    }

    /// The factor state of `h` with subsystems reordered as `handles`, which
    /// must list that whole factor.
    pub fn factor_state_ordered(&self, handles: &[Handle]) -> Result<StateVector, RegistryError> {
        let (order, state) = self.factor_state(handles[0])?;
        if order.len() != handles.len() {
            return Err(QlinError::DimensionMismatch {
                expected: order.len(),
                found: handles.len(),
            }
            .into());
        }
        let perm: Vec<usize> = handles
            .iter()
            .map(|h| order.iter().position(|x| x == h).ok_or(RegistryError::Unknown(*h)))
            .collect::<Result<_, _>>()?;
        Ok(permute(&state, &perm)?)
    }

    /// Handles sharing a factor with `h` (including `h`).
    pub fn entangled_with(&self, h: Handle) -> Result<Vec<Handle>, RegistryError> {
        Ok(self.factor_state(h)?.0)
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// Largest factor dimension ever held.
    pub fn peak_factor_dim(&self) -> usize {
        self.peak_dim
    }

    pub fn ctx(&mut self, party: Party) -> PartyCtx<'_> {
        PartyCtx { reg: self, party }
    }
}

/// A party's restricted view of the registry: it can only act as that party
/// and cannot inspect amplitudes.
pub struct PartyCtx<'a> {
    reg: &'a mut Registry,
    party: Party,
}

impl<'a> PartyCtx<'a> {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn alloc(&mut self, state: StateVector, dims: &[usize]) -> Result<Vec<Handle>, RegistryError> {
        self.reg.alloc(self.party, state, dims)
    }

    pub fn apply(&mut self, op: LocalOp<'_>, targets: &[Handle], rng: &mut dyn RngCore) -> Result<Option<usize>, RegistryError> {
        self.reg.apply_local(self.party, op, targets, rng)
    }

    pub fn unitary(&mut self, u: &Operator, targets: &[Handle], rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        self.apply(LocalOp::Unitary(u), targets, rng).map(|_| ())
    }

    pub fn measure(&mut self, projectors: &[Operator], targets: &[Handle], rng: &mut dyn RngCore) -> Result<usize, RegistryError> {
        Ok(self.apply(LocalOp::Measure(projectors), targets, rng)?.expect("measurement outcome"))
    }

    pub fn instrument(&mut self, family: &KrausFamily, targets: &[Handle], rng: &mut dyn RngCore) -> Result<usize, RegistryError> {
        Ok(self.apply(LocalOp::Instrument(family), targets, rng)?.expect("instrument outcome"))
    }

    pub fn send(&mut self, h: Handle) -> Result<(), RegistryError> {
        self.reg.transfer(self.party, h, self.party.other())
    }

    pub fn release(&mut self, h: Handle) -> Result<(), RegistryError> {
        self.reg.release(self.party, h)
    }

    pub fn owns(&self, h: Handle) -> bool {
        self.reg.owner(h).is_ok_and(|o| o == self.party)
    }
}
