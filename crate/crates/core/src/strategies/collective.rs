use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{computational, plus_minus, AliceRecord, AliceStrategy, BGuess, RunLayout};
use crate::cks::apply_alice_phase;
use crate::qlin::{c, Operator, StateVector, SubsystemLayout, C64};
use crate::registry::{Handle, PartyCtx, RegistryError};
use crate::Bit;

/// `Σ |x0 x1⟩⟨x0 x1| ⊗ diag((-1)^{x0}, (-1)^{x1}, 1)` on `(c0, c1, β)`.
pub fn controlled_phase() -> Operator {
    let mut d: Vec<C64> = Vec::with_capacity(12);
    for x0 in Bit::BOTH {
        for x1 in Bit::BOTH {
            d.extend([c(x0.sign(), 0.0), c(x1.sign(), 0.0), c(1.0, 0.0)]);
        }
    }
    Operator::diagonal(SubsystemLayout::new(vec![2, 2, 3]).expect("dims"), &d).expect("unitary")
}

/// Equal superposition `Σ_{X0,X1 ∈ S} |X0⟩|X1⟩` over `2L` qubits, all `c0`
/// qubits first.
pub fn control_register(words: &[Vec<Bit>]) -> StateVector {
    let l = words[0].len();
    let layout = SubsystemLayout::uniform(2, 2 * l).expect("dims");
    let mut amps = vec![c(0.0, 0.0); layout.total_dim()];
    let amp = c(1.0 / words.len() as f64, 0.0);
    for w0 in words {
        for w1 in words {
            let digits: Vec<usize> = w0.iter().chain(w1.iter()).map(|b| b.index()).collect();
            amps[layout.index_of(&digits).expect("binary digits")] += amp;
        }
    }
    StateVector::new(layout, amps).expect("distinct words give a unit vector")
}

/// Shared bookkeeping: control qubits per run, cached reveals, and the
/// ± readout of the encoding run.
#[derive(Debug, Clone, Default)]
struct Controls {
    handles: BTreeMap<usize, (Handle, Handle)>,
    revealed: BTreeMap<usize, (Bit, Bit)>,
    readout: BTreeMap<usize, Option<Bit>>,
}

impl Controls {
    fn clear(&mut self) {
        self.handles.clear();
        self.revealed.clear();
        self.readout.clear();
    }

    fn reveal(&mut self, round: usize, ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<Option<(Bit, Bit)>, RegistryError> {
        if let Some(&v) = self.revealed.get(&round) {
            return Ok(Some(v));
        }
        let Some(&(c0, c1)) = self.handles.get(&round) else {
            return Ok(None);
        };
        let z = computational(2);
        let x0 = Bit::from(ctx.measure(&z, &[c0], rng)? == 1);
        let x1 = Bit::from(ctx.measure(&z, &[c1], rng)? == 1);
        self.revealed.insert(round, (x0, x1));
        Ok(Some((x0, x1)))
    }

    /// Measures both controls of `round` in {|+⟩, |−⟩}; a `|−⟩` on `c_j`
    /// certifies `b = j`.
    fn read_b(&mut self, round: usize, ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        if self.readout.contains_key(&round) || self.revealed.contains_key(&round) {
            return Ok(());
        }
        let Some(&(c0, c1)) = self.handles.get(&round) else {
            return Ok(());
        };
        let pm = plus_minus();
        let m0 = ctx.measure(&pm, &[c0], rng)?;
        let m1 = ctx.measure(&pm, &[c1], rng)?;
        let hint = match (m0, m1) {
            (1, _) => Some(Bit::Zero),
            (_, 1) => Some(Bit::One),
            _ => None,
        };
        self.readout.insert(round, hint);
        Ok(())
    }

    fn guess(&self, round: usize, rng: &mut dyn RngCore) -> BGuess {
        match self.readout.get(&round).copied().flatten() {
            Some(bit) => BGuess::sure(bit),
            None => BGuess::coin(rng),
        }
    }
}

/// Collective attack: per block, a `2L`-qubit control register in the equal
/// superposition over `S × S` drives the phases of all `L` runs. Reveals read
/// the controls computationally (so announcements always lie in `S` and
/// match Bob's decodes); the encoding run's controls are read in the ± basis.
#[derive(Debug, Clone, Default)]
pub struct CollectiveTripleAlice {
    ctl: Controls,
    definite: BTreeMap<usize, bool>,
}

impl CollectiveTripleAlice {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether the ± readout of `round` produced a certain `b`.
    pub fn had_definite_b(&self, round: usize) -> bool {
        self.definite.get(&round).copied().unwrap_or(false)
    }

    pub fn control_handles(&self, round: usize) -> Option<(Handle, Handle)> {
        self.ctl.handles.get(&round).copied()
    }
}

impl AliceStrategy for CollectiveTripleAlice {
    fn name(&self) -> &str {
        "collective"
    }

    fn begin(&mut self, layout: &RunLayout, ctx: &mut PartyCtx<'_>, _rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        self.ctl.clear();
        self.definite.clear();
        let l = layout.block_len();
        let register = control_register(layout.set.enumerate());
        for block in 0..layout.runs.div_ceil(l) {
            let hs = ctx.alloc(register.clone(), &vec![2; 2 * l])?;
            for i in 0..l {
                let run = block * l + i;
                if run < layout.runs {
                    self.ctl.handles.insert(run, (hs[i], hs[l + i]));
                }
            }
        }
        Ok(())
    }

    fn on_round(
        &mut self,
        round: usize,
        beta: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<AliceRecord, RegistryError> {
        let (c0, c1) = self.ctl.handles[&round];
        ctx.unitary(&controlled_phase(), &[c0, c1, beta], rng)?;
        Ok(AliceRecord::Controlled)
    }

    fn on_reveal(&mut self, round: usize, ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(Bit, Bit), RegistryError> {
        Ok(self.ctl.reveal(round, ctx, rng)?.unwrap_or((Bit::Zero, Bit::Zero)))
    }

    fn on_encode(
        &mut self,
        round: usize,
        _targets: (Bit, Bit),
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<(Bit, Bit), RegistryError> {
        self.ctl.read_b(round, ctx, rng)?;
        let definite = self.ctl.readout.get(&round).copied().flatten().is_some();
        self.definite.insert(round, definite);
        Ok((Bit::random(rng), Bit::random(rng)))
    }

    fn guess_b(&mut self, round: usize, rng: &mut dyn RngCore) -> BGuess {
        self.ctl.guess(round, rng)
    }
}

/// Limited collective attack: in each block one uniformly chosen run keeps its
/// pair at the quantum level (two controls in `|+⟩|+⟩`), the rest are honest
/// with zeros. Every ancilla interacts with a single run only.
#[derive(Debug, Clone, Default)]
pub struct OnePairCollectiveAlice {
    ctl: Controls,
    quantum: Vec<bool>,
}

impl OnePairCollectiveAlice {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_quantum_run(&self, round: usize) -> bool {
        self.quantum.get(round).copied().unwrap_or(false)
    }

    pub fn control_handles(&self, round: usize) -> Option<(Handle, Handle)> {
        self.ctl.handles.get(&round).copied()
    }
}

impl AliceStrategy for OnePairCollectiveAlice {
    fn name(&self) -> &str {
        "one-pair"
    }

    fn begin(&mut self, layout: &RunLayout, _ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        self.ctl.clear();
        let l = layout.block_len();
        self.quantum = vec![false; layout.runs];
        for block in 0..layout.runs.div_ceil(l) {
            let run = block * l + rng.random_range(0..l);
            if run < layout.runs {
                self.quantum[run] = true;
            }
        }
        Ok(())
    }

    fn on_round(
        &mut self,
        round: usize,
        beta: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<AliceRecord, RegistryError> {
        if !self.is_quantum_run(round) {
            apply_alice_phase(ctx, Bit::Zero, Bit::Zero, beta, rng)?;
            return Ok(AliceRecord::Phase {
                x0: Bit::Zero,
                x1: Bit::Zero,
            });
        }
        let plus = StateVector::plus_minus(false);
        let hs = ctx.alloc(crate::qlin::Tensor::tensor(&plus, &plus), &[2, 2])?;
        self.ctl.handles.insert(round, (hs[0], hs[1]));
        ctx.unitary(&controlled_phase(), &[hs[0], hs[1], beta], rng)?;
        Ok(AliceRecord::Controlled)
    }

    fn on_reveal(&mut self, round: usize, ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(Bit, Bit), RegistryError> {
        Ok(self.ctl.reveal(round, ctx, rng)?.unwrap_or((Bit::Zero, Bit::Zero)))
    }

    fn on_encode(
        &mut self,
        round: usize,
        targets: (Bit, Bit),
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<(Bit, Bit), RegistryError> {
        if !self.is_quantum_run(round) {
            return Ok(targets);
        }
        self.ctl.read_b(round, ctx, rng)?;
        Ok((Bit::random(rng), Bit::random(rng)))
    }

    fn guess_b(&mut self, round: usize, rng: &mut dyn RngCore) -> BGuess {
        self.ctl.guess(round, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_amplitudes() {
        let s = crate::weakot::CodewordSet::default_s();
        let reg = control_register(s.enumerate());
        assert_eq!(reg.layout().total_dim(), 64);
        let nonzero = reg.amps().iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 16);
        assert!((reg.amp(0).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn controlled_phase_is_diagonal_sign_pattern() {
        let t = controlled_phase();
        // |1 0⟩ controls, β = |0⟩ → −1
        let idx = t.layout().index_of(&[1, 0, 0]).unwrap();
        assert_eq!(t.matrix()[(idx, idx)], c(-1.0, 0.0));
        let idx = t.layout().index_of(&[1, 1, 2]).unwrap();
        assert_eq!(t.matrix()[(idx, idx)], c(1.0, 0.0));
    }
}
