use qwot::analysis::{
    cheated_run_stats, collective_formula, epsilon_exact, estimate, p_decomposition, random_reliable_spec,
    theorem1_verify, wilson, AliceSpec, BobSpec, CheatScenario, ProtocolSpec,
};
use qwot::qlin::{projective_branches_on, Operator, StateVector, SubsystemLayout, C64};
use qwot::strategies::{AnnounceRule, KrausChannel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

fn scenario(protocol: ProtocolSpec, alice: AliceSpec, bob: BobSpec, trials: u64, seed: u64) -> CheatScenario {
    CheatScenario { protocol, alice, bob, trials, seed }
}

#[test]
fn theorem1_has_no_counterexamples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for i in 0..1000 {
        let spec = random_reliable_spec(&mut rng);
        let r = theorem1_verify(&spec).unwrap();
        assert!(r.views_equal(1e-10), "spec {i}: {}", r.view_distance);
    }
}

/// Chance that the encoding run's ± readout certifies `b`, from the
/// post-reveal state `|+⟩_{c_b̄} ⊗ (|−⟩_{c_b}|bb⟩ + |+⟩_{c_b}|22⟩)/√2`.
fn definite_probability() -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![C64::new(0.0, 0.0); 4 * 9];
    for cb in 0..2 {
        for cbar in 0..2 {
            let base = (cb * 2 + cbar) * 9;
            amps[base] += C64::new(h * h * h * if cb == 1 { -1.0 } else { 1.0 }, 0.0);
            amps[base + 8] += C64::new(h * h * h, 0.0);
        }
    }
    let s = StateVector::new(SubsystemLayout::new(vec![2, 2, 3, 3]).unwrap(), amps).unwrap();
    let minus = Operator::ket_projector(&StateVector::plus_minus(true));
    let plus = Operator::ket_projector(&StateVector::plus_minus(false));
    let br = projective_branches_on(&s, &[plus, minus], &[0]).unwrap();
    br[1].as_ref().map_or(0.0, |b| b.probability)
}

/// Alice's success with one quantum run per triple, by enumerating where the
/// quantum run sits and what its checked controls reveal.
fn one_pair_oracle() -> f64 {
    let pd = definite_probability();
    let quantum_guess = pd + (1.0 - pd) * 0.5;
    let (mut scored, mut wins) = (0.0, 0.0);
    for quantum in 0..3 {
        for unchecked in 0..3 {
            let p = 1.0 / 9.0;
            if quantum == unchecked {
                scored += p;
                wins += p * quantum_guess;
                continue;
            }
            // quantum run checked: its reveal is uniform over two bits and only
            // (0, 0) leaves the triple useful, with a classical encoding run
            scored += p / 4.0;
            wins += p / 4.0 * 0.5;
        }
    }
    wins / scored
}

#[test]
fn one_pair_matches_enumeration() {
    let exact = one_pair_oracle();
    assert!((exact - 2.0 / 3.0).abs() < 1e-12);
    let r = estimate(&scenario(ProtocolSpec::ProtocolB { k: 2 }, AliceSpec::OnePair, BobSpec::Honest, 20_000, 3), None).unwrap();
    assert!(r.alice.contains(exact), "{:?}", r.alice);
    // the formula value for a third of the runs being quantum
    let formula = collective_formula(1.0 / 3.0, 1.0).unwrap();
    assert!((formula - 7.0 / 12.0).abs() < 1e-15);
}

#[test]
fn channel_attack_matches_decomposition() {
    let eps = epsilon_exact(&KrausChannel::computational(), &AnnounceRule::Zeros).unwrap();
    for k in [1usize, 2] {
        let n = 3 * k;
        let want = p_decomposition(1.0 / n as f64, n, eps).unwrap().combined;
        let r = estimate(&scenario(ProtocolSpec::ProtocolB { k }, AliceSpec::single_cheat(), BobSpec::Honest, 20_000, 4), None).unwrap();
        assert!(r.alice.contains(want), "n={n}: {:?} vs {want}", r.alice);
    }
}

#[test]
fn channel_estimates_order_with_n() {
    let est = |k: usize| {
        estimate(&scenario(ProtocolSpec::ProtocolB { k }, AliceSpec::single_cheat(), BobSpec::Honest, 10_000, 5), None)
            .unwrap()
            .alice
    };
    let (a, b, c) = (est(1), est(5), est(10));
    assert!(a.ci_low > b.ci_high, "{a:?} {b:?}");
    assert!(b.p_hat >= c.p_hat - 3.0 * (b.sigma() + c.sigma()), "{b:?} {c:?}");
}

/// Misses allowed in `batches` 99% intervals before coverage is
/// significantly below 99% (one-sided, level 1e-3).
fn allowed_misses(batches: u64) -> u64 {
    let bin = Binomial::new(0.01, batches).unwrap();
    (0..batches).find(|&c| 1.0 - bin.cdf(c) < 1e-3).unwrap()
}

#[test]
fn estimator_is_calibrated() {
    let basis = cheated_run_stats(&KrausChannel::computational(), &AnnounceRule::Zeros).unwrap();
    let eps = basis.epsilon;
    let cases = [
        (ProtocolSpec::CksRound, AliceSpec::BasisAttack, basis.guess_success),
        (ProtocolSpec::CksRound, AliceSpec::Honest, 0.5),
        (ProtocolSpec::ProtocolB { k: 1 }, AliceSpec::single_cheat(), p_decomposition(1.0 / 3.0, 3, eps).unwrap().combined),
        (ProtocolSpec::ProtocolB { k: 2 }, AliceSpec::single_cheat(), p_decomposition(1.0 / 6.0, 6, eps).unwrap().combined),
    ];
    let batches = 200u64;
    for (protocol, alice, exact) in cases {
        let mut misses = 0;
        for seed in 0..batches {
            let r = estimate(&scenario(protocol.clone(), alice.clone(), BobSpec::Honest, 400, 7000 + seed), None).unwrap();
            misses += (!r.alice.contains(exact)) as u64;
        }
        assert!(misses <= allowed_misses(batches), "{alice:?} on {protocol:?}: {misses} misses");
    }
}

#[test]
fn honest_pair_sits_at_three_halves() {
    let r = estimate(&scenario(ProtocolSpec::ProtocolB { k: 2 }, AliceSpec::Honest, BobSpec::Curious, 20_000, 8), None).unwrap();
    assert!(r.alice.contains(0.5) && r.bob.contains(0.5), "{:?} {:?}", r.alice, r.bob);
    assert_eq!(r.target_errors, 0);
    let (lo, hi) = wilson(r.no_useful_run, r.trials);
    assert!(lo <= 0.5625 && 0.5625 <= hi);
}

#[test]
fn collective_b_certainty_rate() {
    let r = estimate(&scenario(ProtocolSpec::ProtocolB { k: 1 }, AliceSpec::Collective, BobSpec::Honest, 4_000, 9), None).unwrap();
    assert_eq!(r.check_mismatch + r.set_violation, 0);
    let (lo, hi) = wilson(r.definite_b, r.completed);
    assert!(lo <= definite_probability() && definite_probability() <= hi);
    assert!(r.alice.contains(0.75));
}
