//! Exact per-run statistics of an individual (channel) attack, by full branch
//! enumeration over `b`, the channel outcome and Bob's decode.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::cks::{decode_projectors, phi};
use crate::qlin::{kraus_branches_on, projective_branches_on};
use crate::strategies::{AnnounceRule, KrausChannel};
use crate::Bit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheatedRunStats {
    /// `P(check fails | run checked)`: Bob aborts or the announced `x_b`
    /// disagrees with his decode.
    pub epsilon: f64,
    /// `P(Alice's guess of b is right)` when this run is the encoding run
    /// (never checked); hints are followed, missing hints are coin flips.
    pub guess_success: f64,
    /// `P(Bob aborts)` in step 5.
    pub abort: f64,
}

pub fn cheated_run_stats(ch: &KrausChannel, rule: &AnnounceRule) -> Result<CheatedRunStats, AnalysisError> {
    let (mut eps, mut guess, mut abort) = (0.0, 0.0, 0.0);
    for b in Bit::BOTH {
        let prior = 0.5;
        let decode = decode_projectors(b);
        for (m, branch) in kraus_branches_on(&phi(b, false), ch.family(), &[0])?.into_iter().enumerate() {
            let Some(branch) = branch else { continue };
            let pm = prior * branch.probability;
            guess += pm
                * match ch.hint(m) {
                    Some(h) if h == b => 1.0,
                    Some(_) => 0.0,
                    None => 0.5,
                };
            let bob = projective_branches_on(&branch.state, &decode, &[0, 1])?;
            for (k, out) in bob.into_iter().enumerate() {
                let Some(out) = out else { continue };
                let p = pm * out.probability;
                if k == 2 {
                    abort += p;
                    eps += p;
                    continue;
                }
                let decoded = Bit::from(k == 1);
                for (q, (a0, a1)) in rule.distribution(m) {
                    let announced = if b == Bit::Zero { a0 } else { a1 };
                    if announced != decoded {
                        eps += p * q;
                    }
                }
            }
        }
    }
    Ok(CheatedRunStats {
        epsilon: eps,
        guess_success: guess,
        abort,
    })
}

/// `ε` for the channel and announcement rule.
pub fn epsilon_exact(ch: &KrausChannel, rule: &AnnounceRule) -> Result<f64, AnalysisError> {
    Ok(cheated_run_stats(ch, rule)?.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_honest_phase_never_fail() {
        let s = cheated_run_stats(&KrausChannel::identity(), &AnnounceRule::Zeros).unwrap();
        assert!(s.epsilon.abs() < 1e-12 && (s.guess_success - 0.5).abs() < 1e-12);
        let ch = KrausChannel::honest_phase(Bit::One, Bit::Zero);
        let rule = AnnounceRule::Table(vec![(Bit::One, Bit::Zero)]);
        assert!(epsilon_exact(&ch, &rule).unwrap().abs() < 1e-12);
        // lying about the phase is always caught when x_b is the lied-about bit
        let wrong = AnnounceRule::Table(vec![(Bit::Zero, Bit::Zero)]);
        assert!((epsilon_exact(&ch, &wrong).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn computational_channel() {
        for rule in [AnnounceRule::Zeros, AnnounceRule::Uniform] {
            let s = cheated_run_stats(&KrausChannel::computational(), &rule).unwrap();
            assert!((s.epsilon - 0.5).abs() < 1e-12);
            assert!((s.guess_success - 0.75).abs() < 1e-12);
            assert!(s.abort.abs() < 1e-12);
        }
    }
}
