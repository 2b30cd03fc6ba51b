use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{AliceRecord, AliceStrategy, BGuess, RunLayout};
use crate::cks::{apply_alice_phase, phase_unitary};
use crate::qlin::{KrausFamily, Operator, QlinError, SubsystemLayout};
use crate::registry::{Handle, PartyCtx, RegistryError};
use crate::Bit;

/// An instrument on the received qutrit. Each branch carries what it tells
/// Alice about `b`: `Some(bit)` for certainty, `None` for nothing.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    family: KrausFamily,
    hints: Vec<Option<Bit>>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Operator>, hints: Vec<Option<Bit>>) -> Result<Self, QlinError> {
        if ops.len() != hints.len() {
            return Err(QlinError::DimensionMismatch {
                expected: ops.len(),
                found: hints.len(),
            });
        }
        let family = KrausFamily::new(ops)?;
        if family.layout().dims() != [3] {
            return Err(QlinError::LayoutMismatch(family.layout().dims().to_vec(), vec![3]));
        }
        Ok(Self { family, hints })
    }

    /// Projective measurement in `{|0⟩, |1⟩, |2⟩}`: outcomes 0 and 1 reveal `b`.
    pub fn computational() -> Self {
        Self::new(super::computational(3), vec![Some(Bit::Zero), Some(Bit::One), None]).expect("complete")
    }

    pub fn identity() -> Self {
        Self::new(vec![Operator::identity(SubsystemLayout::qutrit())], vec![None]).expect("complete")
    }

    /// The honest phase as a one-branch channel.
    pub fn honest_phase(x0: Bit, x1: Bit) -> Self {
        Self::new(vec![phase_unitary(x0, x1)], vec![None]).expect("complete")
    }

    pub fn family(&self) -> &KrausFamily {
        &self.family
    }

    pub fn hint(&self, outcome: usize) -> Option<Bit> {
        self.hints.get(outcome).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.hints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hints.is_empty()
    }
}

/// Which runs get the channel instead of the honest phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheatRounds {
    All,
    Fixed(Vec<usize>),
    /// This many runs, chosen uniformly at the start of the execution.
    Random(usize),
}

/// What Alice announces for a cheated run, as a function of her channel outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnounceRule {
    Zeros,
    Uniform,
    Table(Vec<(Bit, Bit)>),
}

impl AnnounceRule {
    /// Distribution over `(x0, x1)` announcements for `outcome`, as
    /// `(probability, pair)`.
    pub fn distribution(&self, outcome: usize) -> Vec<(f64, (Bit, Bit))> {
        match self {
            AnnounceRule::Zeros => vec![(1.0, (Bit::Zero, Bit::Zero))],
            AnnounceRule::Uniform => Bit::BOTH
                .iter()
                .flat_map(|&a| Bit::BOTH.iter().map(move |&b| (0.25, (a, b))))
                .collect(),
            AnnounceRule::Table(t) => vec![(1.0, t.get(outcome).copied().unwrap_or((Bit::Zero, Bit::Zero)))],
        }
    }

    fn draw(&self, outcome: usize, rng: &mut dyn RngCore) -> (Bit, Bit) {
        match self {
            AnnounceRule::Uniform => (Bit::random(rng), Bit::random(rng)),
            other => other.distribution(outcome)[0].1,
        }
    }
}

/// Individual attack: on cheat runs the received qutrit goes through a fixed
/// channel and announcements follow `rule`; other runs are honest with all-zero
/// strings.
#[derive(Debug, Clone)]
pub struct ChannelAttackAlice {
    name: String,
    channel: KrausChannel,
    rounds: CheatRounds,
    rule: AnnounceRule,
    cheat: Vec<bool>,
    outcomes: BTreeMap<usize, usize>,
    announced: BTreeMap<usize, (Bit, Bit)>,
}

impl ChannelAttackAlice {
    pub fn new(channel: KrausChannel, rounds: CheatRounds, rule: AnnounceRule) -> Self {
        Self {
            name: "channel-attack".into(),
            channel,
            rounds,
            rule,
            cheat: Vec::new(),
            outcomes: BTreeMap::new(),
            announced: BTreeMap::new(),
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_cheat_round(&self, round: usize) -> bool {
        self.cheat.get(round).copied().unwrap_or(false)
    }

    fn claimed(&mut self, round: usize, rng: &mut dyn RngCore) -> (Bit, Bit) {
        if !self.is_cheat_round(round) {
            return (Bit::Zero, Bit::Zero);
        }
        if let Some(&a) = self.announced.get(&round) {
            return a;
        }
        let outcome = self.outcomes.get(&round).copied().unwrap_or(0);
        let a = self.rule.draw(outcome, rng);
        self.announced.insert(round, a);
        a
    }
}

/// Computational-basis measurement of every received qutrit.
pub fn basis_attack_alice() -> ChannelAttackAlice {
    ChannelAttackAlice::new(KrausChannel::computational(), CheatRounds::All, AnnounceRule::Zeros).named("basis-attack")
}

impl AliceStrategy for ChannelAttackAlice {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin(&mut self, layout: &RunLayout, _ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        self.outcomes.clear();
        self.announced.clear();
        self.cheat = vec![false; layout.runs];
        match &self.rounds {
            CheatRounds::All => self.cheat.fill(true),
            CheatRounds::Fixed(list) => {
                for &r in list {
                    if let Some(slot) = self.cheat.get_mut(r) {
                        *slot = true;
                    }
                }
            }
            CheatRounds::Random(count) => {
                for r in sample(rng, layout.runs, (*count).min(layout.runs)) {
                    self.cheat[r] = true;
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
        if self.is_cheat_round(round) {
            let outcome = ctx.instrument(self.channel.family(), &[beta], rng)?;
            self.outcomes.insert(round, outcome);
            Ok(AliceRecord::Channel { outcome })
        } else {
            apply_alice_phase(ctx, Bit::Zero, Bit::Zero, beta, rng)?;
            Ok(AliceRecord::Phase {
                x0: Bit::Zero,
                x1: Bit::Zero,
            })
        }
    }

    fn on_reveal(&mut self, round: usize, _ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(Bit, Bit), RegistryError> {
        Ok(self.claimed(round, rng))
    }

    fn on_encode(
        &mut self,
        round: usize,
        targets: (Bit, Bit),
        _ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<(Bit, Bit), RegistryError> {
        let (a0, a1) = self.claimed(round, rng);
        Ok((targets.0 ^ a0, targets.1 ^ a1))
    }

    fn guess_b(&mut self, round: usize, rng: &mut dyn RngCore) -> BGuess {
        let hint = if self.is_cheat_round(round) {
            self.outcomes.get(&round).and_then(|&m| self.channel.hint(m))
        } else {
            None
        };
        match hint {
            Some(bit) => BGuess::sure(bit),
            None => BGuess::coin(rng),
        }
    }
}
