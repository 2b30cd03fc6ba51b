//! One CKS oblivious-transfer round over the registry.
//!
//! Bob prepares `(|bb⟩ + |22⟩)/√2` on a qutrit pair, sends the first qutrit,
//! Alice phases `|0⟩` and `|1⟩` by `(-1)^{x0}` and `(-1)^{x1}` and returns it,
//! and Bob measures `{|φ_b⟩⟨φ_b|, |φ_b'⟩⟨φ_b'|, rest}` to learn `x_b` or abort.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::qlin::{c, Operator, StateVector, SubsystemLayout};
use crate::registry::{Handle, Party, PartyCtx, Registry, RegistryError};
use crate::strategies::{AliceRecord, AliceStrategy, BobStrategy, HonestBob};
use crate::Bit;

/// Bob's step-5 result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decode {
    Decoded(Bit),
    Abort,
}

impl Decode {
    pub fn bit(self) -> Option<Bit> {
        match self {
            Decode::Decoded(x) => Some(x),
            Decode::Abort => None,
        }
    }
}

/// `(|bb⟩ + s|22⟩)/√2` with `s = +1` for `φ_b` and `-1` for `φ_b'`.
pub fn phi(b: Bit, negative: bool) -> StateVector {
    let mut amps = vec![c(0.0, 0.0); 9];
    let k = b.index();
    amps[k * 3 + k] = c(FRAC_1_SQRT_2, 0.0);
    amps[8] = c(if negative { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 }, 0.0);
    StateVector::new(pair_layout(), amps).expect("normalized")
}

pub fn pair_layout() -> SubsystemLayout {
    SubsystemLayout::new(vec![3, 3]).expect("valid dims")
}

/// `diag((-1)^{x0}, (-1)^{x1}, 1)` on one qutrit.
pub fn phase_unitary(x0: Bit, x1: Bit) -> Operator {
    Operator::diagonal(
        SubsystemLayout::qutrit(),
        &[c(x0.sign(), 0.0), c(x1.sign(), 0.0), c(1.0, 0.0)],
    )
    .expect("diagonal signs are unitary")
}

/// `[Π₀, Π₁, I − Π₀ − Π₁]` for Bob's choice `b`.
pub fn decode_projectors(b: Bit) -> [Operator; 3] {
    let p0 = Operator::ket_projector(&phi(b, false));
    let p1 = Operator::ket_projector(&phi(b, true));
    let rest = Operator::complement_of(&[&p0, &p1]).expect("orthogonal rank-one projectors");
    [p0, p1, rest]
}

/// Step 1: allocates `|φ_b⟩` for Bob and sends β to Alice. Returns `(β, β')`.
pub fn bob_prepare(b: Bit, reg: &mut Registry) -> Result<(Handle, Handle), RegistryError> {
    let hs = reg.alloc(Party::Bob, phi(b, false), &[3, 3])?;
    reg.transfer(Party::Bob, hs[0], Party::Alice)?;
    Ok((hs[0], hs[1]))
}

/// Step 2 without the return trip.
pub fn apply_alice_phase(
    ctx: &mut PartyCtx<'_>,
    x0: Bit,
    x1: Bit,
    beta: Handle,
    rng: &mut dyn RngCore,
) -> Result<(), RegistryError> {
    ctx.unitary(&phase_unitary(x0, x1), &[beta], rng)
}

/// Steps 2 and 3: honest phase, then β goes back to Bob.
pub fn alice_honest_phase(
    x0: Bit,
    x1: Bit,
    beta: Handle,
    reg: &mut Registry,
    rng: &mut dyn RngCore,
) -> Result<(), RegistryError> {
    apply_alice_phase(&mut reg.ctx(Party::Alice), x0, x1, beta, rng)?;
    reg.transfer(Party::Alice, beta, Party::Bob)
}

/// Steps 4 and 5.
pub fn bob_decode(
    b: Bit,
    beta: Handle,
    beta_prime: Handle,
    ctx: &mut PartyCtx<'_>,
    rng: &mut dyn RngCore,
) -> Result<Decode, RegistryError> {
    let outcome = ctx.measure(&decode_projectors(b), &[beta, beta_prime], rng)?;
    Ok(match outcome {
        0 => Decode::Decoded(Bit::Zero),
        1 => Decode::Decoded(Bit::One),
        _ => Decode::Abort,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CksRound {
    pub round: usize,
    pub b: Bit,
    pub alice: AliceRecord,
    pub outcome: Decode,
}

/// One full round inside an existing registry: Bob prepares, Alice acts and
/// returns β, Bob decodes.
pub fn play_round(
    reg: &mut Registry,
    round: usize,
    b: Bit,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
    rng: &mut dyn RngCore,
) -> Result<CksRound, RegistryError> {
    let (beta, beta_prime) = bob_prepare(b, reg)?;
    let record = alice.on_round(round, beta, &mut reg.ctx(Party::Alice), rng)?;
    reg.transfer(Party::Alice, beta, Party::Bob)?;
    let outcome = bob.decode(round, b, beta, beta_prime, &mut reg.ctx(Party::Bob), rng)?;
    Ok(CksRound {
        round,
        b,
        alice: record,
        outcome,
    })
}

/// A bare round with an honest decoder in a fresh registry.
pub fn run_cks_round(alice: &mut dyn AliceStrategy, b: Bit, rng: &mut dyn RngCore) -> Result<CksRound, RegistryError> {
    let mut reg = Registry::new();
    play_round(&mut reg, 0, b, alice, &mut HonestBob, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::projective_branches_on;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn joint(reg: &Registry, beta: Handle, beta_prime: Handle) -> StateVector {
        reg.factor_state_ordered(&[beta, beta_prime]).unwrap()
    }

    #[test]
    fn preparation_and_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for b in Bit::BOTH {
            for x0 in Bit::BOTH {
                for x1 in Bit::BOTH {
                    let mut reg = Registry::new();
                    let (beta, bp) = bob_prepare(b, &mut reg).unwrap();
                    assert!(joint(&reg, beta, bp).approx_eq_up_to_phase(&phi(b, false), 1e-12));
                    assert_eq!(reg.owner(beta).unwrap(), Party::Alice);
                    alice_honest_phase(x0, x1, beta, &mut reg, &mut rng).unwrap();
                    let xb = if b == Bit::Zero { x0 } else { x1 };
                    assert!(joint(&reg, beta, bp).approx_eq_up_to_phase(&phi(b, xb == Bit::One), 1e-12));
                    assert_eq!(reg.owner(beta).unwrap(), Party::Bob);
                }
            }
        }
    }

    #[test]
    fn reduced_sent_qutrit() {
        let mut reg = Registry::new();
        let (beta, _) = bob_prepare(Bit::Zero, &mut reg).unwrap();
        let rho = reg.reduced_state(&[beta]).unwrap();
        let d: Vec<f64> = (0..3).map(|i| rho.matrix()[(i, i)].re).collect();
        assert!((d[0] - 0.5).abs() < 1e-12 && d[1].abs() < 1e-12 && (d[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn decoding_honest_rounds_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for b in Bit::BOTH {
            for x0 in Bit::BOTH {
                for x1 in Bit::BOTH {
                    let mut reg = Registry::new();
                    let (beta, bp) = bob_prepare(b, &mut reg).unwrap();
                    alice_honest_phase(x0, x1, beta, &mut reg, &mut rng).unwrap();
                    let d = bob_decode(b, beta, bp, &mut reg.ctx(Party::Bob), &mut rng).unwrap();
                    assert_eq!(d, Decode::Decoded(if b == Bit::Zero { x0 } else { x1 }));
                }
            }
        }
    }

    #[test]
    fn wrong_basis_states_abort() {
        for b in Bit::BOTH {
            let set = decode_projectors(b);
            // |φ_b̄⟩ shares the |22⟩ term: overlap 1/2 with each of φ_b, φ_b'
            let br = projective_branches_on(&phi(b.flip(), false), &set, &[0, 1]).unwrap();
            for (k, want) in [0.25, 0.25, 0.5].into_iter().enumerate() {
                assert!((br[k].as_ref().unwrap().probability - want).abs() < 1e-12);
            }
            // |b̄b̄⟩ is orthogonal to both and always aborts
            let nb = b.flip().index();
            let s = StateVector::basis(pair_layout(), &[nb, nb]).unwrap();
            let br = projective_branches_on(&s, &set, &[0, 1]).unwrap();
            assert!(br[0].is_none() && br[1].is_none());
            assert!((br[2].as_ref().unwrap().probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decode_requires_both_qutrits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut reg = Registry::new();
        let (beta, bp) = bob_prepare(Bit::One, &mut reg).unwrap();
        let err = bob_decode(Bit::One, beta, bp, &mut reg.ctx(Party::Bob), &mut rng).unwrap_err();
        assert!(matches!(err, RegistryError::NotOwner { .. }));
    }
}
