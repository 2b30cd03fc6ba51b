//! Monte Carlo estimation of cheating probabilities.
//!
//! Trial `i` of a scenario with master seed `s` draws all of its randomness
//! from `ChaCha8Rng::seed_from_u64(s)` on stream `i`, so results do not depend
//! on how trials are scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::cks::{play_round, Decode};
use crate::registry::{Party, Registry};
use crate::strategies::{
    basis_attack_alice, AliceRecord, AliceStrategy, AnnounceRule, BobStrategy, ChannelAttackAlice, CheatRounds,
    CollectiveTripleAlice, CuriousBob, HonestAlice, HonestBob, KrausChannel, OnePairCollectiveAlice, RunLayout,
};
use crate::weakot::{run_protocol_a, run_protocol_b, AbortReason, CodewordSet, ProtocolConfig, RunOutcome};
use crate::Bit;

/// `z` for a two-sided 99% normal interval.
pub const Z99: f64 = 2.5758293035489004;

/// Wilson score interval at 99%.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheatEstimate {
    pub p_hat: f64,
    pub successes: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub abort_rate: f64,
    pub check_fail_rate: f64,
}

impl CheatEstimate {
    pub fn new(successes: u64, trials: u64, aborts: u64, check_fails: u64) -> Self {
        let (ci_low, ci_high) = wilson(successes, trials);
        let rate = |k: u64| if trials == 0 { 0.0 } else { k as f64 / trials as f64 };
        Self {
            p_hat: rate(successes),
            successes,
            trials,
            ci_low,
            ci_high,
            abort_rate: rate(aborts),
            check_fail_rate: rate(check_fails),
        }
    }

    /// Binomial standard error of `p_hat`.
    pub fn sigma(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelSpec {
    Computational,
    Identity,
}

impl ChannelSpec {
    pub fn build(self) -> KrausChannel {
        match self {
            ChannelSpec::Computational => KrausChannel::computational(),
            ChannelSpec::Identity => KrausChannel::identity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AliceSpec {
    Honest,
    BasisAttack,
    Collective,
    OnePair,
    Channel {
        channel: ChannelSpec,
        cheat: CheatRounds,
        announce: AnnounceRule,
    },
}

impl AliceSpec {
    /// Single-run computational channel with all-zero announcements.
    pub fn single_cheat() -> Self {
        AliceSpec::Channel {
            channel: ChannelSpec::Computational,
            cheat: CheatRounds::Random(1),
            announce: AnnounceRule::Zeros,
        }
    }

    pub fn build(&self) -> Box<dyn AliceStrategy> {
        match self {
            AliceSpec::Honest => Box::new(HonestAlice::new()),
            AliceSpec::BasisAttack => Box::new(basis_attack_alice()),
            AliceSpec::Collective => Box::new(CollectiveTripleAlice::new()),
            AliceSpec::OnePair => Box::new(OnePairCollectiveAlice::new()),
            AliceSpec::Channel {
                channel,
                cheat,
                announce,
            } => Box::new(ChannelAttackAlice::new(channel.build(), cheat.clone(), announce.clone())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AliceSpec::Honest => "honest",
            AliceSpec::BasisAttack => "basis-attack",
            AliceSpec::Collective => "collective",
            AliceSpec::OnePair => "one-pair",
            AliceSpec::Channel { .. } => "channel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BobSpec {
    Honest,
    Curious,
}

impl BobSpec {
    pub fn build(self) -> Box<dyn BobStrategy> {
        match self {
            BobSpec::Honest => Box::new(HonestBob),
            BobSpec::Curious => Box::new(CuriousBob::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProtocolSpec {
    CksRound,
    ProtocolA { m: usize, set: Vec<String> },
    ProtocolB { k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheatScenario {
    pub protocol: ProtocolSpec,
    pub alice: AliceSpec,
    pub bob: BobSpec,
    pub trials: u64,
    pub seed: u64,
}

/// Per-trial random stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A bare CKS round with uniform `b`, scored like a one-run protocol whose
/// encoding run is that round. Honest Alice's round bits play the targets.
fn bare_round(alice: &mut dyn AliceStrategy, bob: &mut dyn BobStrategy, rng: &mut dyn RngCore) -> Result<RunOutcome, AnalysisError> {
    let mut reg = Registry::new();
    alice.begin(&RunLayout::single_round(), &mut reg.ctx(Party::Alice), rng)?;
    let b = bob.choose_b(0, rng);
    let round = play_round(&mut reg, 0, b, alice, bob, rng)?;
    let targets = match round.alice {
        AliceRecord::Phase { x0, x1 } => (x0, x1),
        _ => (Bit::Zero, Bit::Zero),
    };
    let Decode::Decoded(xb) = round.outcome else {
        return Ok(RunOutcome {
            completed: false,
            abort_reason: Some(AbortReason::BobMeasurementAbort),
            targets,
            encoding_run: None,
            bob_b: None,
            bob_target: None,
            alice_guess: None,
            bob_other_guess: None,
        });
    };
    let guess = alice.guess_b(0, rng);
    let other = bob.guess_other(0, &mut reg.ctx(Party::Bob), rng)?;
    Ok(RunOutcome {
        completed: true,
        abort_reason: None,
        targets,
        encoding_run: Some(0),
        bob_b: Some(b),
        bob_target: Some(xb),
        alice_guess: Some(guess),
        bob_other_guess: other,
    })
}

/// Runs trial `index` of `scenario`.
pub fn run_trial(scenario: &CheatScenario, index: u64) -> Result<RunOutcome, AnalysisError> {
    let mut rng = trial_rng(scenario.seed, index);
    let mut alice = scenario.alice.build();
    let mut bob = scenario.bob.build();
    match &scenario.protocol {
        ProtocolSpec::CksRound => bare_round(alice.as_mut(), bob.as_mut(), &mut rng),
        ProtocolSpec::ProtocolB { k } => {
            let targets = (Bit::random(&mut rng), Bit::random(&mut rng));
            let cfg = ProtocolConfig::protocol_b(*k, targets);
            Ok(run_protocol_b(&cfg, alice.as_mut(), bob.as_mut(), &mut rng)?.0)
        }
        ProtocolSpec::ProtocolA { m, set } => {
            let set = CodewordSet::from_strs(set).map_err(|e| AnalysisError::Domain(e.to_string()))?;
            let targets = (Bit::random(&mut rng), Bit::random(&mut rng));
            let cfg = ProtocolConfig::protocol_a(*m, targets);
            Ok(run_protocol_a(&cfg, &set, alice.as_mut(), bob.as_mut(), &mut rng)?.0)
        }
    }
}

/// Aggregated results of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub trials: u64,
    /// Alice's success over scored executions.
    pub alice: CheatEstimate,
    /// Bob's success at `x_{b̄}` over completed executions.
    pub bob: CheatEstimate,
    pub completed: u64,
    pub no_useful_run: u64,
    pub check_mismatch: u64,
    pub set_violation: u64,
    pub bob_abort: u64,
    pub admissibility_failure: u64,
    /// Completed executions where Bob's recovered target bit was wrong.
    pub target_errors: u64,
    /// Completed executions where Alice's guess was backed by a definite result.
    pub definite_b: u64,
    /// Trials that raised an internal error (counted as Alice failures).
    pub errors: u64,
}

impl ScenarioStats {
    pub fn from_outcomes(outcomes: &[Result<RunOutcome, AnalysisError>]) -> Self {
        let mut s = ScenarioStats {
            trials: outcomes.len() as u64,
            alice: CheatEstimate::new(0, 0, 0, 0),
            bob: CheatEstimate::new(0, 0, 0, 0),
            completed: 0,
            no_useful_run: 0,
            check_mismatch: 0,
            set_violation: 0,
            bob_abort: 0,
            admissibility_failure: 0,
            target_errors: 0,
            definite_b: 0,
            errors: 0,
        };
        let (mut scored, mut a_wins, mut b_wins) = (0u64, 0u64, 0u64);
        for o in outcomes {
            let Ok(o) = o else {
                s.errors += 1;
                scored += 1;
                continue;
            };
            match o.abort_reason {
                Some(AbortReason::NoUsefulRun) => s.no_useful_run += 1,
                Some(AbortReason::CheckMismatch) => s.check_mismatch += 1,
                Some(AbortReason::SetViolation) => s.set_violation += 1,
                Some(AbortReason::BobMeasurementAbort) => s.bob_abort += 1,
                Some(AbortReason::AdmissibilityFailure) => s.admissibility_failure += 1,
                None => {}
            }
            if o.scored_for_alice() {
                scored += 1;
                a_wins += o.alice_success() as u64;
            }
            if o.completed {
                s.completed += 1;
                b_wins += o.bob_success() as u64;
                s.target_errors += (!o.target_correct()) as u64;
                s.definite_b += o.alice_guess.is_some_and(|g| g.certain) as u64;
            }
        }
        let aborts = scored - s.completed;
        let fails = s.check_mismatch + s.set_violation;
        s.alice = CheatEstimate::new(a_wins, scored, aborts, fails);
        s.bob = CheatEstimate::new(b_wins, s.completed, 0, 0);
        s
    }

    pub fn definite_b_rate(&self) -> f64 {
        if self.completed == 0 {
            0.0
        } else {
            self.definite_b as f64 / self.completed as f64
        }
    }
}

/// Runs every trial of `scenario` on `workers` threads (all cores if `None`).
pub fn estimate(scenario: &CheatScenario, workers: Option<usize>) -> Result<ScenarioStats, AnalysisError> {
    if scenario.trials == 0 {
        return Err(AnalysisError::Domain("trials must be at least 1".into()));
    }
    let run = || -> Vec<Result<RunOutcome, AnalysisError>> {
        (0..scenario.trials).into_par_iter().map(|i| run_trial(scenario, i)).collect()
    };
    let outcomes = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| AnalysisError::Domain(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(ScenarioStats::from_outcomes(&outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_behaves_at_edges() {
        let (lo, hi) = wilson(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
        let (lo, hi) = wilson(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert_eq!(wilson(0, 0), (0.0, 1.0));
    }

    #[test]
    fn trial_streams_differ_and_repeat() {
        let a = trial_rng(7, 0).next_u64();
        assert_eq!(a, trial_rng(7, 0).next_u64());
        assert_ne!(a, trial_rng(7, 1).next_u64());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let sc = CheatScenario {
            protocol: ProtocolSpec::ProtocolB { k: 2 },
            alice: AliceSpec::single_cheat(),
            bob: BobSpec::Curious,
            trials: 300,
            seed: 11,
        };
        let one = estimate(&sc, Some(1)).unwrap();
        let four = estimate(&sc, Some(4)).unwrap();
        assert_eq!(one, four);
    }
}
