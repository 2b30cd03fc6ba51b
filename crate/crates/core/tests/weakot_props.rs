use proptest::prelude::*;
use qwot::analysis::{wilson, AliceSpec, BobSpec};
use qwot::weakot::{
    run_protocol_a, run_protocol_b, AbortReason, CodecError, CodewordSet, Payload, ProtocolConfig, ProtocolTranscript,
};
use qwot::strategies::{AliceRecord, HonestAlice, HonestBob};
use qwot::Bit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn honest_b(k: usize, seed: u64) -> (qwot::weakot::RunOutcome, ProtocolTranscript) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = ProtocolConfig::protocol_b(k, (Bit::random(&mut rng), Bit::random(&mut rng)));
    run_protocol_b(&cfg, &mut HonestAlice::new(), &mut HonestBob, &mut rng).unwrap()
}

fn useful_flags(t: &ProtocolTranscript) -> Vec<bool> {
    t.events
        .iter()
        .filter_map(|e| match e.payload {
            Payload::Verdict { useful: Some(u), .. } => Some(u),
            _ => None,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn honest_protocol_is_complete(k in 1usize..=5, seed: u64) {
        let (o, t) = honest_b(k, seed);
        let flags = useful_flags(&t);
        prop_assert_eq!(flags.len(), k);
        if flags.iter().any(|&u| u) {
            prop_assert!(o.completed);
            prop_assert!(o.target_correct());
        } else {
            prop_assert_eq!(o.abort_reason, Some(AbortReason::NoUsefulRun));
        }
    }

    #[test]
    fn every_run_but_the_encoding_run_is_checked(k in 1usize..=5, seed: u64) {
        let (o, t) = honest_b(k, seed);
        if let Some(enc) = o.encoding_run.filter(|_| o.completed) {
            let mut revealed = t.revealed_runs();
            revealed.sort_unstable();
            let want: Vec<usize> = (0..3 * k).filter(|&r| r != enc).collect();
            prop_assert_eq!(revealed, want);
        }
    }

    #[test]
    fn transcripts_round_trip(k in 1usize..=4, seed: u64) {
        let (_, t) = honest_b(k, seed);
        let text = t.encode();
        prop_assert_eq!(ProtocolTranscript::parse(&text).unwrap(), t.clone());
        // same seed, same bytes
        prop_assert_eq!(honest_b(k, seed).1.encode(), text.clone());
        // cutting the stream anywhere is detected
        let cut = text.len() / 2;
        prop_assert!(ProtocolTranscript::parse(&text[..cut]).is_err());
        let lines: Vec<&str> = text.split_inclusive('\n').collect();
        let without_outcome: String = lines[..lines.len() - 1].concat();
        prop_assert_eq!(ProtocolTranscript::parse(&without_outcome), Err(CodecError::Truncated(lines.len() - 1)));
        prop_assert_eq!(ProtocolTranscript::parse(""), Err(CodecError::MissingOutcome));
    }

    /// Protocol A with three runs, two checks and the default set replays
    /// Protocol B with one triple from the same random stream.
    #[test]
    fn protocol_a_matches_one_triple_b(seed: u64, which in 0usize..5) {
        let (alice, bob) = [
            (AliceSpec::Honest, BobSpec::Honest),
            (AliceSpec::single_cheat(), BobSpec::Curious),
            (AliceSpec::Collective, BobSpec::Honest),
            (AliceSpec::OnePair, BobSpec::Curious),
            (AliceSpec::BasisAttack, BobSpec::Honest),
        ][which].clone();
        let targets = (Bit::from(seed & 1 == 1), Bit::from(seed & 2 == 2));
        let (a, _) = run_protocol_a(
            &ProtocolConfig::protocol_a(2, targets),
            &CodewordSet::default_s(),
            alice.build().as_mut(),
            bob.build().as_mut(),
            &mut ChaCha8Rng::seed_from_u64(seed),
        ).unwrap();
        let (b, _) = run_protocol_b(
            &ProtocolConfig::protocol_b(1, targets),
            alice.build().as_mut(),
            bob.build().as_mut(),
            &mut ChaCha8Rng::seed_from_u64(seed),
        ).unwrap();
        match a.abort_reason {
            None => prop_assert_eq!(&a, &b),
            Some(AbortReason::AdmissibilityFailure) => {
                let mapped = matches!(
                    b.abort_reason,
                    Some(AbortReason::NoUsefulRun | AbortReason::CheckMismatch | AbortReason::SetViolation)
                );
                prop_assert!(mapped, "{:?}", b.abort_reason);
            }
            Some(r) => prop_assert_eq!(b.abort_reason, Some(r)),
        }
        if b.abort_reason == Some(AbortReason::NoUsefulRun) {
            prop_assert_eq!(a.abort_reason, Some(AbortReason::AdmissibilityFailure));
        }
    }
}

#[test]
fn no_useful_run_probability() {
    for k in 1..=4usize {
        let trials = 20_000u64;
        let misses = (0..trials)
            .filter(|&s| honest_b(k, s).0.abort_reason == Some(AbortReason::NoUsefulRun))
            .count() as u64;
        let (lo, hi) = wilson(misses, trials);
        let want = 0.75f64.powi(k as i32);
        assert!(lo <= want && want <= hi, "k={k}: [{lo}, {hi}] vs {want}");
    }
}

fn pair_of(t: &ProtocolTranscript, run: usize) -> (Bit, Bit) {
    t.rounds()
        .find_map(|r| match (r.round == run, &r.alice) {
            (true, AliceRecord::Phase { x0, x1 }) => Some((*x0, *x1)),
            _ => None,
        })
        .expect("honest rounds carry phases")
}

/// The encoding run's bits are independent of what the other triple revealed.
#[test]
fn encoding_run_is_independent_of_other_triples() {
    let mut table = [[0u64; 4]; 4];
    let code = |(a, b): (Bit, Bit)| a.index() * 2 + b.index();
    for seed in 0..100_000u64 {
        let (o, t) = honest_b(2, seed);
        let Some(enc) = o.encoding_run.filter(|_| o.completed) else { continue };
        let other = if enc < 3 { 3..6 } else { 0..3 };
        let run = t.revealed_runs().into_iter().find(|r| other.contains(r)).expect("other triple checked");
        table[code(pair_of(&t, enc))][code(pair_of(&t, run))] += 1;
    }
    let n: u64 = table.iter().flatten().sum();
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..4).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let (mut stat, mut df_rows, mut df_cols) = (0.0, 0, 0);
    for i in 0..4 {
        for j in 0..4 {
            let e = rows[i] as f64 * cols[j] as f64 / n as f64;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    df_rows += rows.iter().filter(|&&r| r > 0).count() - 1;
    df_cols += cols.iter().filter(|&&c| c > 0).count() - 1;
    let critical = ChiSquared::new((df_rows * df_cols) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "chi2 = {stat} >= {critical}, table {table:?}");
}
