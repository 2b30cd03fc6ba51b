use std::collections::BTreeMap;

use rand::RngCore;

use super::BobStrategy;
use crate::cks::{bob_decode, decode_projectors, phase_unitary, phi, Decode};
use crate::qlin::{apply_on_subsystems, helstrom_measurement, DensityMatrix, QlinError};
use crate::registry::{Handle, PartyCtx, RegistryError};
use crate::Bit;

/// Follows steps 1–5 and never tries to learn `x_{b̄}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestBob;

impl BobStrategy for HonestBob {
    fn name(&self) -> &str {
        "honest"
    }

    fn decode(
        &mut self,
        _round: usize,
        b: Bit,
        beta: Handle,
        beta_prime: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<Decode, RegistryError> {
        bob_decode(b, beta, beta_prime, ctx, rng)
    }
}

/// Decodes honestly, keeps both qutrits, and afterwards guesses `x_{b̄}` with
/// the Helstrom measurement between his two possible post-decode states.
#[derive(Debug, Clone, Default)]
pub struct CuriousBob {
    kept: BTreeMap<usize, (Bit, Decode, Handle, Handle)>,
}

impl CuriousBob {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Bob's state after decoding `x_b` from an honest Alice holding `(x0, x1)`.
pub fn post_decode_state(b: Bit, x0: Bit, x1: Bit) -> Result<DensityMatrix, QlinError> {
    let s = apply_on_subsystems(&phi(b, false), &phase_unitary(x0, x1), &[0])?;
    let xb = if b == Bit::Zero { x0 } else { x1 };
    let [p0, p1, _] = decode_projectors(b);
    let p = if xb == Bit::Zero { p0 } else { p1 };
    let branch = crate::qlin::projective_branches_on(&s, &[p.clone(), crate::qlin::Operator::complement_of(&[&p])?], &[0, 1])?;
    let kept = branch[0].as_ref().ok_or(QlinError::ZeroBranch)?;
    Ok(kept.state.density())
}

impl BobStrategy for CuriousBob {
    fn name(&self) -> &str {
        "curious"
    }

    fn decode(
        &mut self,
        round: usize,
        b: Bit,
        beta: Handle,
        beta_prime: Handle,
        ctx: &mut PartyCtx<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<Decode, RegistryError> {
        let d = bob_decode(b, beta, beta_prime, ctx, rng)?;
        self.kept.insert(round, (b, d, beta, beta_prime));
        Ok(d)
    }

    fn guess_other(&mut self, round: usize, ctx: &mut PartyCtx<'_>, rng: &mut dyn RngCore) -> Result<Option<Bit>, RegistryError> {
        let Some(&(b, Decode::Decoded(xb), beta, beta_prime)) = self.kept.get(&round) else {
            return Ok(None);
        };
        let hypothesis = |other: Bit| {
            let (x0, x1) = if b == Bit::Zero { (xb, other) } else { (other, xb) };
            post_decode_state(b, x0, x1)
        };
        let h = helstrom_measurement(&hypothesis(Bit::Zero)?, &hypothesis(Bit::One)?)?;
        if h.bias < 1e-12 {
            return Ok(Some(Bit::random(rng)));
        }
        let outcome = ctx.measure(&h.projectors(), &[beta, beta_prime], rng)?;
        Ok(Some(Bit::from(outcome == 1)))
    }
}
