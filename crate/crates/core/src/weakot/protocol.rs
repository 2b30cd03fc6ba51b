use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::codeword::{word_string, CodewordSet};
use super::transcript::{Actor, Payload, Phase, ProtocolTranscript};
use crate::cks::{play_round, CksRound, Decode};
use crate::registry::{Party, Registry, RegistryError};
use crate::strategies::{AliceStrategy, BGuess, BobStrategy, RunLayout};
use crate::Bit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    CheckMismatch,
    BobMeasurementAbort,
    NoUsefulRun,
    SetViolation,
    AdmissibilityFailure,
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Parameters of one execution. `k` is the number of triples for Protocol B;
/// `m` the number of checked runs for Protocol A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub k: usize,
    pub m: usize,
    pub targets: (Bit, Bit),
}

impl ProtocolConfig {
    pub fn protocol_b(k: usize, targets: (Bit, Bit)) -> Self {
        Self { k, m: 2, targets }
    }

    pub fn protocol_a(m: usize, targets: (Bit, Bit)) -> Self {
        Self { k: 1, m, targets }
    }
}

/// How an execution ended, from both parties' points of view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub completed: bool,
    pub abort_reason: Option<AbortReason>,
    pub targets: (Bit, Bit),
    /// The encoding run `î`, once chosen.
    pub encoding_run: Option<usize>,
    /// Bob's choice bit in the encoding run.
    pub bob_b: Option<Bit>,
    /// Bob's recovered target bit `x_b`.
    pub bob_target: Option<Bit>,
    pub alice_guess: Option<BGuess>,
    /// Bob's guess of the other target bit `x_{b̄}`.
    pub bob_other_guess: Option<Bit>,
}

impl RunOutcome {
    fn aborted(reason: AbortReason, targets: (Bit, Bit)) -> Self {
        Self {
            completed: false,
            abort_reason: Some(reason),
            targets,
            encoding_run: None,
            bob_b: None,
            bob_target: None,
            alice_guess: None,
            bob_other_guess: None,
        }
    }

    /// Whether this execution counts toward Alice's cheating probability.
    /// Executions left without a usable encoding run are honest-behavior
    /// artifacts, not detections.
    pub fn scored_for_alice(&self) -> bool {
        !matches!(
            self.abort_reason,
            Some(AbortReason::NoUsefulRun | AbortReason::AdmissibilityFailure)
        )
    }

    /// Alice learned `b` and Bob did not abort.
    pub fn alice_success(&self) -> bool {
        self.completed && matches!((self.alice_guess, self.bob_b), (Some(g), Some(b)) if g.bit == b)
    }

    /// Bob's guess of `x_{b̄}` was right (completed executions only).
    pub fn bob_success(&self) -> bool {
        let Some(b) = self.bob_b else { return false };
        let other = if b == Bit::Zero { self.targets.1 } else { self.targets.0 };
        self.completed && self.bob_other_guess == Some(other)
    }

    pub fn target_correct(&self) -> bool {
        let Some(b) = self.bob_b else { return false };
        let want = if b == Bit::Zero { self.targets.0 } else { self.targets.1 };
        self.bob_target == Some(want)
    }
}

fn pick(pair: (Bit, Bit), b: Bit) -> Bit {
    if b == Bit::Zero {
        pair.0
    } else {
        pair.1
    }
}

struct Exec<'a> {
    reg: Registry,
    t: ProtocolTranscript,
    rounds: Vec<CksRound>,
    revealed: BTreeMap<usize, (Bit, Bit)>,
    alice: &'a mut dyn AliceStrategy,
    bob: &'a mut dyn BobStrategy,
    rng: &'a mut dyn RngCore,
    targets: (Bit, Bit),
}

impl<'a> Exec<'a> {
    fn new(
        alice: &'a mut dyn AliceStrategy,
        bob: &'a mut dyn BobStrategy,
        rng: &'a mut dyn RngCore,
        targets: (Bit, Bit),
    ) -> Self {
        Self {
            reg: Registry::new(),
            t: ProtocolTranscript::default(),
            rounds: Vec::new(),
            revealed: BTreeMap::new(),
            alice,
            bob,
            rng,
            targets,
        }
    }

    fn setup(&mut self, protocol: &str, layout: &RunLayout, checked: usize) -> Result<(), ProtocolError> {
        self.t.push(
            Phase::Setup,
            Actor::Referee,
            Payload::Config {
                protocol: protocol.into(),
                runs: layout.runs,
                block: layout.block_len(),
                checked,
                set: layout.set.enumerate().iter().map(|w| word_string(w)).collect(),
                alice: self.alice.name().into(),
                bob: self.bob.name().into(),
            },
        );
        self.alice.begin(layout, &mut self.reg.ctx(Party::Alice), self.rng)?;
        Ok(())
    }

    /// Runs every CKS round; stops at the first Bob abort.
    fn play_rounds(&mut self, runs: usize) -> Result<bool, ProtocolError> {
        for r in 0..runs {
            let b = self.bob.choose_b(r, self.rng);
            let round = play_round(&mut self.reg, r, b, self.alice, self.bob, self.rng)?;
            let aborted = round.outcome == Decode::Abort;
            self.t.push(Phase::Rounds, Actor::Bob, Payload::Round(round.clone()));
            self.rounds.push(round);
            if aborted {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn request(&mut self, phase: Phase, runs: &[usize]) -> Result<(), ProtocolError> {
        self.t.push(phase, Actor::Bob, Payload::RevealRequest { runs: runs.to_vec() });
        for &run in runs {
            let (x0, x1) = self.alice.on_reveal(run, &mut self.reg.ctx(Party::Alice), self.rng)?;
            self.t.push(phase, Actor::Alice, Payload::Reveal { run, x0, x1 });
            self.revealed.insert(run, (x0, x1));
        }
        Ok(())
    }

    /// The announced `x_{b_i}` equals Bob's decoded bit.
    fn consistent(&self, run: usize) -> bool {
        let r = &self.rounds[run];
        r.outcome.bit() == Some(pick(self.revealed[&run], r.b))
    }

    fn verdict(&mut self, phase: Phase, runs: Vec<usize>, passed: bool, useful: Option<bool>) {
        self.t.push(phase, Actor::Bob, Payload::Verdict { runs, passed, useful });
    }

    fn abort(mut self, reason: AbortReason) -> (RunOutcome, ProtocolTranscript) {
        let o = RunOutcome::aborted(reason, self.targets);
        self.t.push(Phase::Outcome, Actor::Referee, Payload::Outcome(o.clone()));
        (o, self.t)
    }

    /// Steps A6/B3: Bob names `î`, Alice announces `d_j = x_j ⊕ x_j^{(î)}`,
    /// Bob recovers `x_b = d_b ⊕ x_b^{(î)}`. Returns the partial outcome.
    fn encode(&mut self, run: usize) -> Result<RunOutcome, ProtocolError> {
        self.t.push(Phase::Select, Actor::Bob, Payload::Choose { run });
        let (d0, d1) = self
            .alice
            .on_encode(run, self.targets, &mut self.reg.ctx(Party::Alice), self.rng)?;
        self.t.push(Phase::Encode, Actor::Alice, Payload::Announce { d0, d1 });
        let b = self.rounds[run].b;
        let decoded = self.rounds[run].outcome.bit().expect("every played round decoded");
        Ok(RunOutcome {
            completed: false,
            abort_reason: None,
            targets: self.targets,
            encoding_run: Some(run),
            bob_b: Some(b),
            bob_target: Some(pick((d0, d1), b) ^ decoded),
            alice_guess: None,
            bob_other_guess: None,
        })
    }

    fn complete(mut self, mut o: RunOutcome, d: (Bit, Bit)) -> Result<(RunOutcome, ProtocolTranscript), ProtocolError> {
        let run = o.encoding_run.expect("encoding run chosen");
        let b = o.bob_b.expect("encoding run chosen");
        o.completed = true;
        o.alice_guess = Some(self.alice.guess_b(run, self.rng));
        let other_d = pick(d, b.flip());
        o.bob_other_guess = self
            .bob
            .guess_other(run, &mut self.reg.ctx(Party::Bob), self.rng)?
            .map(|g| g ^ other_d);
        self.t.push(Phase::Outcome, Actor::Referee, Payload::Outcome(o.clone()));
        Ok((o, self.t))
    }

    fn announced_d(&self) -> (Bit, Bit) {
        self.t
            .events
            .iter()
            .rev()
            .find_map(|e| match e.payload {
                Payload::Announce { d0, d1 } => Some((d0, d1)),
                _ => None,
            })
            .expect("announcement recorded")
    }
}

/// Protocol B: `k` triples over `S = {000, 001, 010, 100}`.
pub fn run_protocol_b(
    cfg: &ProtocolConfig,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
    rng: &mut dyn RngCore,
) -> Result<(RunOutcome, ProtocolTranscript), ProtocolError> {
    if cfg.k == 0 {
        return Err(ProtocolError::Config("k must be at least 1".into()));
    }
    let set = CodewordSet::default_s();
    let layout = RunLayout::new(3 * cfg.k, set.clone());
    let mut ex = Exec::new(alice, bob, rng, cfg.targets);
    ex.setup("b", &layout, 2)?;

    // B1
    if !ex.play_rounds(layout.runs)? {
        return Ok(ex.abort(AbortReason::BobMeasurementAbort));
    }

    // B2
    let mut useful = Vec::new();
    for triple in 0..cfg.k {
        let base = 3 * triple;
        let picked = sample(ex.rng, 3, 2).into_vec();
        let (i1, i2) = (base + picked[0], base + picked[1]);
        let i3 = base + (3 - picked[0] - picked[1]);
        ex.request(Phase::Check, &[i1, i2])?;
        if !(ex.consistent(i1) && ex.consistent(i2)) {
            ex.verdict(Phase::Check, vec![i1, i2], false, None);
            return Ok(ex.abort(AbortReason::CheckMismatch));
        }
        let zero = (Bit::Zero, Bit::Zero);
        if ex.revealed[&i1] == zero && ex.revealed[&i2] == zero {
            ex.verdict(Phase::Check, vec![i1, i2], true, Some(true));
            useful.push(i3);
            continue;
        }
        ex.request(Phase::Check, &[i3])?;
        let words = |j: usize| -> Vec<Bit> { (base..base + 3).map(|r| if j == 0 { ex.revealed[&r].0 } else { ex.revealed[&r].1 }).collect() };
        if !(set.contains(&words(0)) && set.contains(&words(1))) {
            ex.verdict(Phase::Check, vec![i1, i2, i3], false, Some(false));
            return Ok(ex.abort(AbortReason::SetViolation));
        }
        if !ex.consistent(i3) {
            ex.verdict(Phase::Check, vec![i1, i2, i3], false, Some(false));
            return Ok(ex.abort(AbortReason::CheckMismatch));
        }
        ex.verdict(Phase::Check, vec![i1, i2, i3], true, Some(false));
    }

    // B3
    if useful.is_empty() {
        return Ok(ex.abort(AbortReason::NoUsefulRun));
    }
    let chosen = useful[ex.rng.random_range(0..useful.len())];
    let partial = ex.encode(chosen)?;
    let d = ex.announced_d();

    // B4
    let rest: Vec<usize> = useful.iter().copied().filter(|&r| r != chosen).collect();
    if !rest.is_empty() {
        ex.request(Phase::Verify, &rest)?;
        let ok = rest.iter().all(|&r| ex.consistent(r));
        ex.verdict(Phase::Verify, rest, ok, None);
        if !ok {
            return Ok(ex.abort(AbortReason::CheckMismatch));
        }
    }
    ex.complete(partial, d)
}

/// Protocol A: `n = S.n()` runs, `m` uniformly chosen checked runs, and the
/// encoding run drawn uniformly among admissible unchecked runs.
pub fn run_protocol_a(
    cfg: &ProtocolConfig,
    set: &CodewordSet,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
    rng: &mut dyn RngCore,
) -> Result<(RunOutcome, ProtocolTranscript), ProtocolError> {
    let n = set.n();
    if cfg.m == 0 || cfg.m >= n {
        return Err(ProtocolError::Config(format!("need 0 < m < n, got m={} n={n}", cfg.m)));
    }
    let layout = RunLayout::new(n, set.clone());
    let mut ex = Exec::new(alice, bob, rng, cfg.targets);
    ex.setup("a", &layout, cfg.m)?;

    // A3
    if !ex.play_rounds(n)? {
        return Ok(ex.abort(AbortReason::BobMeasurementAbort));
    }

    // A4
    let checked = sample(ex.rng, n, cfg.m).into_vec();
    ex.request(Phase::Check, &checked)?;
    if !checked.iter().all(|&r| ex.consistent(r)) {
        ex.verdict(Phase::Check, checked, false, None);
        return Ok(ex.abort(AbortReason::CheckMismatch));
    }
    let partial = |j: usize| -> Vec<(usize, Bit)> {
        checked
            .iter()
            .map(|&r| (r, if j == 0 { ex.revealed[&r].0 } else { ex.revealed[&r].1 }))
            .collect()
    };
    let (p0, p1) = (partial(0), partial(1));
    if set.count_completions(&p0) == 0 || set.count_completions(&p1) == 0 {
        ex.verdict(Phase::Check, checked, false, None);
        return Ok(ex.abort(AbortReason::SetViolation));
    }

    // A5
    let admissible: Vec<usize> = (0..n)
        .filter(|r| !checked.contains(r))
        .filter(|&r| set.admissible_at(&p0, r) && set.admissible_at(&p1, r))
        .collect();
    ex.verdict(Phase::Check, checked, true, Some(!admissible.is_empty()));
    if admissible.is_empty() {
        return Ok(ex.abort(AbortReason::AdmissibilityFailure));
    }

    // A6
    let chosen = admissible[ex.rng.random_range(0..admissible.len())];
    let partial = ex.encode(chosen)?;
    let d = ex.announced_d();
    ex.complete(partial, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{HonestAlice, HonestBob};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn honest_b(k: usize, seed: u64) -> (RunOutcome, ProtocolTranscript) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = ProtocolConfig::protocol_b(k, (Bit::One, Bit::Zero));
        run_protocol_b(&cfg, &mut HonestAlice::new(), &mut HonestBob, &mut rng).unwrap()
    }

    #[test]
    fn honest_protocol_b_completes_or_lacks_useful_run() {
        for seed in 0..200 {
            let (o, t) = honest_b(4, seed);
            match o.abort_reason {
                None => {
                    assert!(o.completed && o.target_correct());
                    let mut seen = t.revealed_runs();
                    seen.push(o.encoding_run.unwrap());
                    seen.sort_unstable();
                    assert_eq!(seen, (0..12).collect::<Vec<_>>());
                }
                Some(r) => assert_eq!(r, AbortReason::NoUsefulRun),
            }
            assert!(matches!(t.events.last().unwrap().payload, Payload::Outcome(_)));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = ProtocolConfig::protocol_b(0, (Bit::Zero, Bit::Zero));
        assert!(run_protocol_b(&cfg, &mut HonestAlice::new(), &mut HonestBob, &mut rng).is_err());
        let cfg = ProtocolConfig::protocol_a(3, (Bit::Zero, Bit::Zero));
        let s = CodewordSet::default_s();
        assert!(run_protocol_a(&cfg, &s, &mut HonestAlice::new(), &mut HonestBob, &mut rng).is_err());
    }

    #[test]
    fn off_codeword_announcement_is_a_set_violation() {
        // every run announces (1, 1): strings 111 are outside S
        let ones = vec![(Bit::One, Bit::One); 3];
        let s = CodewordSet::default_s();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = ProtocolConfig::protocol_a(2, (Bit::Zero, Bit::Zero));
        let (o, _) = run_protocol_a(&cfg, &s, &mut HonestAlice::with_pairs(ones), &mut HonestBob, &mut rng).unwrap();
        assert_eq!(o.abort_reason, Some(AbortReason::SetViolation));
    }

    #[test]
    fn protocol_a_full_cube_completes() {
        let s = CodewordSet::full(4);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = ProtocolConfig::protocol_a(2, (Bit::Zero, Bit::One));
            let (o, _) = run_protocol_a(&cfg, &s, &mut HonestAlice::new(), &mut HonestBob, &mut rng).unwrap();
            assert!(o.completed && o.target_correct());
        }
    }
}
