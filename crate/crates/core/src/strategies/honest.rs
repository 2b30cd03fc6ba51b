use rand::RngCore;

use super::{AliceRecord, AliceStrategy, BGuess, RunLayout};
use crate::cks::apply_alice_phase;
use crate::registry::{Handle, PartyCtx, RegistryError};
use crate::Bit;

/// Follows the protocol: per block, draws `X0` and `X1` uniformly from the
/// codeword set (unless fixed pairs were given), phases each round with its
/// pair, reveals truthfully and guesses `b` with a coin.
#[derive(Debug, Clone, Default)]
pub struct HonestAlice {
    fixed: Option<Vec<(Bit, Bit)>>,
    pairs: Vec<(Bit, Bit)>,
}

impl HonestAlice {
    pub fn new() -> Self {
        Self::default()
    }

    /// Uses exactly these per-round pairs instead of sampling.
    pub fn with_pairs(pairs: Vec<(Bit, Bit)>) -> Self {
        Self {
            fixed: Some(pairs.clone()),
            pairs,
        }
    }

    pub fn pairs(&self) -> &[(Bit, Bit)] {
        &self.pairs
    }

    fn pair(&self, round: usize) -> (Bit, Bit) {
        self.pairs.get(round).copied().unwrap_or((Bit::Zero, Bit::Zero))
    }
}

impl AliceStrategy for HonestAlice {
    fn name(&self) -> &str {
        "honest"
    }

    fn begin(&mut self, layout: &RunLayout, _ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<(), RegistryError> {
        if let Some(fixed) = &self.fixed {
            self.pairs = fixed.clone();
            return Ok(());
        }
        self.pairs.clear();
        let blocks = layout.runs.div_ceil(layout.block_len());
        for _ in 0..blocks {
            let w0 = layout.set.sample(rng).to_vec();
            let w1 = layout.set.sample(rng).to_vec();
            self.pairs.extend(w0.into_iter().zip(w1));
        }
        self.pairs.truncate(layout.runs);
        Ok(())
    }

    fn on_round(
        &mut self,
        round: usize,
        beta: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<AliceRecord, RegistryError> {
        let (x0, x1) = self.pair(round);
        apply_alice_phase(ctx, x0, x1, beta, rng)?;
        Ok(AliceRecord::Phase { x0, x1 })
    }

    fn on_reveal(&mut self, round: usize, _ctx: &mut PartyCtx<'_>, _rng: &mut dyn RngCore) -> Result<(Bit, Bit), RegistryError> {
        Ok(self.pair(round))
    }

    fn on_encode(
        &mut self,
        round: usize,
        targets: (Bit, Bit),
        _ctx: &mut PartyCtx<'_>,
        _rng: &mut dyn RngCore,
    ) -> Result<(Bit, Bit), RegistryError> {
        let (x0, x1) = self.pair(round);
        Ok((targets.0 ^ x0, targets.1 ^ x1))
    }

    fn guess_b(&mut self, _round: usize, rng: &mut dyn RngCore) -> BGuess {
        BGuess::coin(rng)
    }
}
