//! Party behaviors invoked at each protocol decision point.
//!
//! Strategies only ever see a [`PartyCtx`], so every quantum action they take
//! is checked against subsystem ownership by the registry.

mod bob;
mod channel;
mod collective;
mod honest;

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::cks::Decode;
use crate::registry::{Handle, PartyCtx, RegistryError};
use crate::weakot::CodewordSet;
use crate::Bit;

pub use bob::{CuriousBob, HonestBob};
pub use channel::{basis_attack_alice, AnnounceRule, ChannelAttackAlice, CheatRounds, KrausChannel};
pub use collective::{CollectiveTripleAlice, OnePairCollectiveAlice};
pub use honest::HonestAlice;

/// How runs are grouped for one execution: `runs` CKS rounds, split into
/// consecutive blocks of `set.n()` runs that share one codeword pair.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub runs: usize,
    pub set: Arc<CodewordSet>,
}

impl RunLayout {
    pub fn new(runs: usize, set: CodewordSet) -> Self {
        Self {
            runs,
            set: Arc::new(set),
        }
    }

    /// A single bare round with unconstrained bits.
    pub fn single_round() -> Self {
        Self::new(1, CodewordSet::full(1))
    }

    pub fn block_len(&self) -> usize {
        self.set.n()
    }

    pub fn block_of(&self, run: usize) -> usize {
        run / self.block_len()
    }

    pub fn position_in_block(&self, run: usize) -> usize {
        run % self.block_len()
    }
}

/// What Alice did in a round, as recorded for analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AliceRecord {
    Phase { x0: Bit, x1: Bit },
    Channel { outcome: usize },
    Controlled,
}

/// Alice's guess of Bob's choice bit; `certain` marks a guess backed by a
/// definite measurement result rather than a coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BGuess {
    pub bit: Bit,
    pub certain: bool,
}

impl BGuess {
    pub fn coin(rng: &mut dyn RngCore) -> Self {
        Self {
            bit: Bit::random(rng),
            certain: false,
        }
    }

    pub fn sure(bit: Bit) -> Self {
        Self { bit, certain: true }
    }
}

pub trait AliceStrategy: Send {
    fn name(&self) -> &str;

    /// Called once before the first round.
    fn begin(&mut self, _layout: &RunLayout, _ctx: &mut PartyCtx<'_>, _rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        Ok(())
    }

    /// Alice holds β for this round; the harness returns it to Bob afterwards.
    fn on_round(
        &mut self,
        round: usize,
        beta: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<AliceRecord, RegistryError>;

    /// Announced `(x0, x1)` for a checked run.
    fn on_reveal(&mut self, round: usize, ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(Bit, Bit), RegistryError>;

    /// Announced `(d0, d1)` for the encoding run, given the target bits.
    fn on_encode(
        &mut self,
        round: usize,
        targets: (Bit, Bit),
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<(Bit, Bit), RegistryError>;

    /// Guess of Bob's `b` in `round`.
    fn guess_b(&mut self, round: usize, rng: &mut dyn RngCore) -> BGuess;
}

pub trait BobStrategy: Send {
    fn name(&self) -> &str;

    fn choose_b(&mut self, _round: usize, rng: &mut dyn RngCore) -> Bit {
        Bit::random(rng)
    }

    /// Steps 4–5 for one round; Bob owns both qutrits.
    fn decode(
        &mut self,
        round: usize,
        b: Bit,
        beta: Handle,
        beta_prime: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<Decode, RegistryError>;

    /// Guess of `x_{b̄}` for `round`, or `None` if Bob does not try.
    fn guess_other(&mut self, _round: usize, _ctx: &mut PartyCtx<'_>, _rng: &mut dyn RngCore) -> Result<Option<Bit>, RegistryError> {
        Ok(None)
    }
}

/// Computational-basis projectors on a `dim`-level system.
pub(crate) fn computational(dim: usize) -> Vec<crate::qlin::Operator> {
    (0..dim)
        .map(|k| crate::qlin::Operator::ket_projector(&crate::qlin::StateVector::ket(dim, k).expect("k < dim")))
        .collect()
}

/// `{|+⟩⟨+|, |−⟩⟨−|}` on a qubit.
pub(crate) fn plus_minus() -> Vec<crate::qlin::Operator> {
    [false, true]
        .into_iter()
        .map(|neg| crate::qlin::Operator::ket_projector(&crate::qlin::StateVector::plus_minus(neg)))
        .collect()
}
