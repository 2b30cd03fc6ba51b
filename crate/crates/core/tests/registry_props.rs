use proptest::prelude::*;
use qwot::analysis::wilson;
use qwot::qlin::random::{random_state, random_unitary};
use qwot::qlin::{projective_branches_on, Operator, StateVector, SubsystemLayout};
use qwot::registry::{Handle, LocalOp, Party, Registry, RegistryError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
enum Step {
    Unitary(Party, usize, usize, u64),
    Measure(Party, usize),
    Send(Party, usize),
    Release(Party, usize),
}

fn party() -> impl Strategy<Value = Party> {
    prop_oneof![Just(Party::Alice), Just(Party::Bob)]
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        (party(), 0..4usize, 0..4usize, any::<u64>()).prop_map(|(p, a, b, s)| Step::Unitary(p, a, b, s)),
        (party(), 0..4usize).prop_map(|(p, a)| Step::Measure(p, a)),
        (party(), 0..4usize).prop_map(|(p, a)| Step::Send(p, a)),
        (party(), 0..4usize).prop_map(|(p, a)| Step::Release(p, a)),
    ]
}

fn qubit_basis() -> Vec<Operator> {
    (0..2).map(|k| Operator::ket_projector(&StateVector::ket(2, k).unwrap())).collect()
}

/// Four entangled qubits, the first two Alice's and the last two Bob's.
fn setup(seed: u64) -> (Registry, Vec<Handle>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reg = Registry::new();
    let s = random_state(&SubsystemLayout::uniform(2, 4).unwrap(), &mut rng);
    let hs = reg.alloc(Party::Alice, s, &[2, 2, 2, 2]).unwrap();
    reg.transfer(Party::Alice, hs[2], Party::Bob).unwrap();
    reg.transfer(Party::Alice, hs[3], Party::Bob).unwrap();
    (reg, hs)
}

fn live(reg: &Registry, hs: &[Handle], who: Option<Party>) -> Vec<Handle> {
    hs.iter()
        .copied()
        .filter(|&h| reg.is_live(h) && who.is_none_or(|p| reg.owner(h).unwrap() == p))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ownership_is_enforced(seed: u64, steps in prop::collection::vec(step(), 1..24)) {
        let (mut reg, hs) = setup(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut owner: BTreeMap<Handle, Option<Party>> =
            hs.iter().enumerate().map(|(i, &h)| (h, Some(if i < 2 { Party::Alice } else { Party::Bob }))).collect();
        let basis = qubit_basis();
        for st in steps {
            let all = live(&reg, &hs, None);
            let before = (!all.is_empty()).then(|| reg.reduced_state(&all).unwrap());
            let (caller, targets) = match &st {
                Step::Unitary(p, a, b, _) => (*p, vec![hs[*a], hs[*b]]),
                Step::Measure(p, a) | Step::Send(p, a) | Step::Release(p, a) => (*p, vec![hs[*a]]),
            };
            let allowed = targets.iter().all(|h| owner[h] == Some(caller))
                && (targets.len() == 1 || targets[0] != targets[1]);
            let bob_before = {
                let b = live(&reg, &hs, Some(caller.other()));
                (!b.is_empty()).then(|| (b.clone(), reg.reduced_state(&b).unwrap()))
            };
            let result = match &st {
                Step::Unitary(_, _, _, s) => {
                    let u = random_unitary(&SubsystemLayout::uniform(2, 2).unwrap(), &mut ChaCha8Rng::seed_from_u64(*s));
                    reg.ctx(caller).unitary(&u, &targets, &mut rng)
                }
                Step::Measure(..) => reg.apply_local(caller, LocalOp::Measure(&basis), &targets, &mut rng).map(|_| ()),
                Step::Send(..) => reg.ctx(caller).send(targets[0]),
                Step::Release(..) => reg.ctx(caller).release(targets[0]),
            };
            prop_assert_eq!(result.is_ok(), allowed, "{:?} -> {:?}", st, result);
            match result {
                Err(e) => {
                    let expected = matches!(e, RegistryError::NotOwner { .. } | RegistryError::Stale(_) | RegistryError::Duplicate(_));
                    prop_assert!(expected);
                    // a rejected call leaves the global state untouched
                    prop_assert_eq!(live(&reg, &hs, None), all.clone());
                    if let Some(before) = before {
                        prop_assert!(reg.reduced_state(&all).unwrap().max_deviation(&before).unwrap() < 1e-12);
                    }
                }
                Ok(()) => {
                    match st {
                        Step::Send(..) => { owner.insert(targets[0], Some(caller.other())); }
                        Step::Release(..) => { owner.insert(targets[0], None); }
                        _ => {}
                    }
                    // non-measuring local actions never move the other party's marginal
                    if !matches!(st, Step::Measure(..)) {
                        if let Some((b, rho)) = bob_before {
                            let still: Vec<Handle> = b.into_iter().filter(|h| owner[h] == Some(caller.other())).collect();
                            if !still.is_empty() && matches!(st, Step::Unitary(..) | Step::Release(..)) {
                                let now = reg.reduced_state(&still).unwrap();
                                prop_assert!(now.max_deviation(&rho).unwrap() < 1e-9);
                            }
                        }
                    }
                }
            }
            for (&h, o) in &owner {
                match o {
                    Some(p) => prop_assert_eq!(reg.owner(h).unwrap(), *p),
                    None => prop_assert!(!reg.is_live(h)),
                }
            }
        }
    }

    #[test]
    fn alice_unitaries_do_not_signal(seed: u64) {
        let (mut reg, hs) = setup(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bob = [hs[2], hs[3]];
        let before = reg.reduced_state(&bob).unwrap();
        let u = random_unitary(&SubsystemLayout::uniform(2, 2).unwrap(), &mut rng);
        reg.ctx(Party::Alice).unitary(&u, &[hs[1], hs[0]], &mut rng).unwrap();
        prop_assert!(reg.reduced_state(&bob).unwrap().max_deviation(&before).unwrap() < 1e-9);
    }
}

#[test]
fn alice_measurements_do_not_signal_on_average() {
    let (reg0, hs) = setup(17);
    let bob = [hs[2], hs[3]];
    let before = reg0.reduced_state(&bob).unwrap();
    let basis = qubit_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trials = 4000;
    let mut avg = before.matrix() * qwot::qlin::C64::new(0.0, 0.0);
    for _ in 0..trials {
        let mut reg = reg0.clone();
        reg.ctx(Party::Alice).measure(&basis, &[hs[0]], &mut rng).unwrap();
        avg += reg.reduced_state(&bob).unwrap().matrix() / qwot::qlin::C64::new(trials as f64, 0.0);
    }
    let diff = (avg - before.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 0.03, "marginal moved by {diff}");
}

/// Alice and Bob each measure their half of a random entangled qutrit pair.
/// The joint outcome statistics do not depend on who goes first.
#[test]
fn local_measurements_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pair = SubsystemLayout::new(vec![3, 3]).unwrap();
    let s = random_state(&pair, &mut rng);
    let q = SubsystemLayout::qutrit();
    let alice_basis: Vec<Operator> = (0..3).map(|k| Operator::ket_projector(&StateVector::ket(3, k).unwrap())).collect();
    let u = random_unitary(&q, &mut rng);
    let bob_basis: Vec<Operator> = (0..3)
        .map(|k| {
            let v = u.matrix().column(k).into_owned();
            Operator::projector(q.clone(), &v * v.adjoint()).unwrap()
        })
        .collect();

    let mut exact = [[0.0; 3]; 3];
    for (a, br) in projective_branches_on(&s, &alice_basis, &[0]).unwrap().into_iter().enumerate() {
        let Some(br) = br else { continue };
        for (b, inner) in projective_branches_on(&br.state, &bob_basis, &[1]).unwrap().into_iter().enumerate() {
            exact[a][b] = br.probability * inner.map_or(0.0, |x| x.probability);
        }
    }

    let trials = 20_000u64;
    for alice_first in [true, false] {
        let mut counts = [[0u64; 3]; 3];
        for _ in 0..trials {
            let mut reg = Registry::new();
            let hs = reg.alloc(Party::Alice, s.clone(), &[3, 3]).unwrap();
            reg.transfer(Party::Alice, hs[1], Party::Bob).unwrap();
            let (a, b) = if alice_first {
                let a = reg.ctx(Party::Alice).measure(&alice_basis, &[hs[0]], &mut rng).unwrap();
                (a, reg.ctx(Party::Bob).measure(&bob_basis, &[hs[1]], &mut rng).unwrap())
            } else {
                let b = reg.ctx(Party::Bob).measure(&bob_basis, &[hs[1]], &mut rng).unwrap();
                (reg.ctx(Party::Alice).measure(&alice_basis, &[hs[0]], &mut rng).unwrap(), b)
            };
            counts[a][b] += 1;
        }
        for a in 0..3 {
            for b in 0..3 {
                let (lo, hi) = wilson(counts[a][b], trials);
                assert!(lo - 1e-3 <= exact[a][b] && exact[a][b] <= hi + 1e-3, "alice_first={alice_first} ({a},{b})");
            }
        }
    }
}
