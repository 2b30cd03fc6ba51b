//! Built-in scenarios, one or more per acceptance claim, with their
//! thresholds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qwot::analysis::{
    bound_report_from, cks_bob_states, delta_quantity, epsilon_exact, estimate, f_quantity, fuchs_vdg_check,
    individual_bound, p_alice_bound, p_bob_bound, p_decomposition, random_reliable_spec, random_two_outcome,
    theorem1_verify, wilson, AliceSpec, BobSpec, CheatEstimate, CheatScenario, ProtocolSpec, ScenarioStats,
    GENERAL_BOUND, LIMITED_LOWER, MAX_VIOLATION,
};
use qwot::qlin::random::random_density;
use qwot::qlin::{helstrom_measurement, helstrom_success, SubsystemLayout};
use qwot::strategies::{AnnounceRule, KrausChannel};

use crate::oracle::helstrom_qutrit;
use crate::report::{emit_report, Check, Format, ReportRow};
use crate::CliError;

/// Overrides applied on top of a scenario's defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub trials: Option<u64>,
    pub seed: u64,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub alice: Option<AliceSpec>,
    pub bob: Option<BobSpec>,
    pub workers: Option<usize>,
    /// Replaces the target of a scenario's headline row.
    pub target: Option<f64>,
    /// Replaces the tolerance of a scenario's headline row.
    pub tolerance: Option<f64>,
}

impl Params {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn trials(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }

    fn target(&self, default: f64) -> f64 {
        self.target.unwrap_or(default)
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn triples(&self, default: usize) -> Result<usize, CliError> {
        match (self.k, self.n) {
            (Some(k), _) => Ok(k),
            (None, Some(n)) if n % 3 == 0 && n > 0 => Ok(n / 3),
            (None, Some(n)) => Err(CliError::Usage(format!("n = {n} is not a positive multiple of 3"))),
            (None, None) => Ok(default),
        }
    }

    fn run(&self, protocol: ProtocolSpec, alice: AliceSpec, bob: BobSpec, trials: u64) -> Result<ScenarioStats, CliError> {
        let sc = CheatScenario {
            protocol,
            alice: self.alice.clone().unwrap_or(alice),
            bob: self.bob.unwrap_or(bob),
            trials,
            seed: self.seed,
        };
        Ok(estimate(&sc, self.workers)?)
    }
}

pub struct ScenarioDef {
    pub name: &'static str,
    pub summary: &'static str,
    run: fn(&Params) -> Result<Vec<ReportRow>, CliError>,
}

impl ScenarioDef {
    pub fn run(&self, params: &Params) -> Result<Vec<ReportRow>, CliError> {
        (self.run)(params)
    }
}

pub fn catalog() -> &'static [ScenarioDef] {
    const CATALOG: &[ScenarioDef] = &[
        ScenarioDef {
            name: "honest-completeness",
            summary: "Protocol B, honest parties, k=4: targets always correct, aborts only for lack of a useful triple",
            run: honest_completeness,
        },
        ScenarioDef {
            name: "cks-basis-attack",
            summary: "bare CKS round, Alice measures in the computational basis: P_A = 3/4, no aborts",
            run: cks_basis_attack,
        },
        ScenarioDef {
            name: "cks-bound-quantities",
            summary: "Delta = 0 and F = 4 on the CKS states, giving bounds 1/2 and 3/4",
            run: cks_bound_quantities,
        },
        ScenarioDef {
            name: "theorem1-sweep",
            summary: "random reliable x_b attacks leave Alice's view independent of b",
            run: theorem1_sweep,
        },
        ScenarioDef {
            name: "collective-attack",
            summary: "Protocol B, k=4, collective control-register attack: P_A = 3/4, b certain half the time",
            run: collective_attack,
        },
        ScenarioDef {
            name: "one-pair-collective",
            summary: "Protocol B, one quantum run per triple: 2P_A + P_B against 5/3",
            run: one_pair_collective,
        },
        ScenarioDef {
            name: "channel-attack",
            summary: "Protocol B, one cheated run, n in {3, 15, 30}: P_A against the closed form and 1/2 + 1/(4n)",
            run: channel_attack,
        },
        ScenarioDef {
            name: "max-violation",
            summary: "n=30: best of honest and channel Alice with a curious Bob, 2P_A + P_B near 3/2",
            run: max_violation,
        },
        ScenarioDef {
            name: "fuchs-van-de-graaf",
            summary: "trace-distance / fidelity sandwich on random density pairs, dims 2-4",
            run: fuchs_van_de_graaf,
        },
        ScenarioDef {
            name: "helstrom-oracle",
            summary: "Helstrom success beats sampled measurements and matches the closed form on qutrits",
            run: helstrom_oracle,
        },
        ScenarioDef {
            name: "determinism",
            summary: "reports are byte-identical across worker counts",
            run: determinism,
        },
    ];
    CATALOG
}

pub fn find(name: &str) -> Option<&'static ScenarioDef> {
    catalog().iter().find(|s| s.name == name)
}

fn est_row(name: String, e: &CheatEstimate, target: f64, check: Check) -> ReportRow {
    ReportRow::judged(name, e.trials, e.p_hat, (e.ci_low, e.ci_high), target, check)
}

fn rate_row(name: String, k: u64, n: u64, target: f64, check: Check) -> ReportRow {
    let p = if n == 0 { 0.0 } else { k as f64 / n as f64 };
    ReportRow::judged(name, n, p, wilson(k, n), target, check)
}

/// `2P_A + P_B` with the interval from the two endpoint combinations, against
/// the three reference values. `headline` picks the judged reference.
fn bound_rows(prefix: &str, pa: &CheatEstimate, pb: &CheatEstimate, headline: (f64, Check)) -> Vec<ReportRow> {
    let r = bound_report_from(pa.p_hat, pb.p_hat);
    let ci = (2.0 * pa.ci_low + pb.ci_low, 2.0 * pa.ci_high + pb.ci_high);
    let trials = pa.trials.min(pb.trials);
    [("bound-general", GENERAL_BOUND), ("bound-max-violation", MAX_VIOLATION), ("bound-limited", LIMITED_LOWER)]
        .into_iter()
        .map(|(name, reference)| {
            let check = if reference == headline.0 { headline.1 } else { Check::Info };
            ReportRow::judged(format!("{prefix}/{name}"), trials, r.two_pa_plus_pb, ci, reference, check)
        })
        .collect()
}

fn honest_completeness(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let k = p.triples(4)?;
    let s = p.run(ProtocolSpec::ProtocolB { k }, AliceSpec::Honest, BobSpec::Honest, p.trials(10_000))?;
    let want = p.target(0.75f64.powi(k as i32));
    let sigma = (want * (1.0 - want) / s.trials as f64).sqrt();
    let other_aborts = s.check_mismatch + s.set_violation + s.bob_abort + s.admissibility_failure + s.errors;
    Ok(vec![
        rate_row("honest-completeness/no-useful-run".into(), s.no_useful_run, s.trials, want, Check::Within(p.tol(3.0 * sigma))),
        rate_row("honest-completeness/target-correct".into(), s.completed - s.target_errors, s.completed, 1.0, Check::Within(0.0)),
        rate_row("honest-completeness/other-aborts".into(), other_aborts, s.trials, 0.0, Check::Within(0.0)),
    ])
}

fn cks_basis_attack(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let s = p.run(ProtocolSpec::CksRound, AliceSpec::BasisAttack, BobSpec::Honest, p.trials(100_000))?;
    Ok(vec![
        est_row("cks-basis-attack/p-alice".into(), &s.alice, p.target(0.75), Check::CiInside(p.tol(0.01))),
        rate_row("cks-basis-attack/bob-aborts".into(), s.bob_abort, s.trials, 0.0, Check::Within(0.0)),
    ])
}

fn cks_bound_quantities(_: &Params) -> Result<Vec<ReportRow>, CliError> {
    let states = cks_bob_states();
    let delta = delta_quantity(&states)?;
    let f = f_quantity(&states)?;
    Ok(vec![
        ReportRow::exact("cks-bound-quantities/delta", delta, 0.0, Check::Within(1e-12)),
        ReportRow::exact("cks-bound-quantities/f", f, 4.0, Check::Within(1e-9)),
        ReportRow::exact("cks-bound-quantities/p-bob-bound", p_bob_bound(delta)?, 0.5, Check::Within(1e-12)),
        ReportRow::exact("cks-bound-quantities/p-alice-bound", p_alice_bound(f)?, 0.75, Check::Within(1e-9)),
    ])
}

fn theorem1_sweep(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let n = p.trials(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (mut bad, mut worst) = (0u64, 0.0f64);
    let tol = p.tol(1e-10);
    for _ in 0..n {
        let r = theorem1_verify(&random_reliable_spec(&mut rng))?;
        worst = worst.max(r.view_distance);
        bad += (!r.views_equal(tol)) as u64;
    }
    Ok(vec![
        rate_row("theorem1-sweep/counterexamples".into(), bad, n, 0.0, Check::Within(0.0)),
        ReportRow::judged("theorem1-sweep/max-view-distance", n, worst, (worst, worst), 0.0, Check::AtMost(tol)),
    ])
}

fn collective_attack(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let k = p.triples(4)?;
    let s = p.run(ProtocolSpec::ProtocolB { k }, AliceSpec::Collective, BobSpec::Honest, p.trials(20_000))?;
    Ok(vec![
        est_row("collective-attack/p-alice".into(), &s.alice, p.target(0.75), Check::Within(p.tol(0.01))),
        rate_row("collective-attack/definite-b".into(), s.definite_b, s.completed, 0.5, Check::Within(0.015)),
        rate_row(
            "collective-attack/check-failures".into(),
            s.check_mismatch + s.set_violation,
            s.trials,
            0.0,
            Check::Within(0.0),
        ),
    ])
}

fn one_pair_collective(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let k = p.triples(4)?;
    let s = p.run(ProtocolSpec::ProtocolB { k }, AliceSpec::OnePair, BobSpec::Curious, p.trials(20_000))?;
    let mut rows = vec![
        est_row("one-pair-collective/p-alice".into(), &s.alice, 7.0 / 12.0, Check::Info),
        est_row("one-pair-collective/p-bob".into(), &s.bob, 0.5, Check::Info),
    ];
    rows.extend(bound_rows(
        "one-pair-collective",
        &s.alice,
        &s.bob,
        (LIMITED_LOWER, Check::Within(p.tol(0.02))),
    ));
    if let Some(t) = p.target {
        let last = rows.len() - 1;
        let r = &rows[last];
        rows[last] = ReportRow::judged(r.scenario.clone(), r.trials, r.p_hat, (r.ci_low, r.ci_high), t, Check::Within(p.tol(0.02)));
    }
    Ok(rows)
}

fn channel_ns(p: &Params) -> Result<Vec<usize>, CliError> {
    match (p.n, p.k) {
        (Some(n), _) if n % 3 == 0 && n > 0 => Ok(vec![n]),
        (Some(n), _) => Err(CliError::Usage(format!("n = {n} is not a positive multiple of 3"))),
        (None, Some(k)) if k > 0 => Ok(vec![3 * k]),
        (None, Some(_)) => Err(CliError::Usage("k must be at least 1".into())),
        (None, None) => Ok(vec![3, 15, 30]),
    }
}

fn channel_attack(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let eps = epsilon_exact(&KrausChannel::computational(), &AnnounceRule::Zeros)?;
    let mut rows = Vec::new();
    for n in channel_ns(p)? {
        let s = p.run(ProtocolSpec::ProtocolB { k: n / 3 }, AliceSpec::single_cheat(), BobSpec::Honest, p.trials(100_000))?;
        let closed = p_decomposition(1.0 / n as f64, n, eps)?.combined;
        let cap = individual_bound(n, 0.0)?;
        rows.push(est_row(format!("channel-attack/n{n}/p-alice"), &s.alice, p.target(closed), Check::CiContains));
        rows.push(est_row(format!("channel-attack/n{n}/cap"), &s.alice, cap, Check::AtMost(3.0 * s.alice.sigma())));
    }
    Ok(rows)
}

fn max_violation(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let n = p.n.unwrap_or(30);
    if !n.is_multiple_of(3) || n == 0 {
        return Err(CliError::Usage(format!("n = {n} is not a positive multiple of 3")));
    }
    let trials = p.trials(100_000);
    let protocol = ProtocolSpec::ProtocolB { k: n / 3 };
    let honest = p.run(protocol.clone(), AliceSpec::Honest, BobSpec::Curious, trials)?;
    let cheat = p.run(protocol, AliceSpec::single_cheat(), BobSpec::Curious, trials)?;
    let best = |a: CheatEstimate, b: CheatEstimate| if a.p_hat >= b.p_hat { a } else { b };
    let pa = best(honest.alice, cheat.alice);
    let pb = best(honest.bob, cheat.bob);
    let mut rows = vec![
        est_row("max-violation/p-alice".into(), &pa, 0.5, Check::Info),
        est_row("max-violation/p-bob".into(), &pb, 0.5, Check::Info),
    ];
    let slack = p.target.map_or(0.02, |t| t - MAX_VIOLATION);
    rows.extend(bound_rows("max-violation", &pa, &pb, (MAX_VIOLATION, Check::AtMost(slack))));
    Ok(rows)
}

fn fuchs_van_de_graaf(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let n = p.trials(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (mut bad, mut slack) = (0u64, f64::INFINITY);
    for i in 0..n {
        let l = SubsystemLayout::new(vec![2 + (i % 3) as usize])?;
        let c = fuchs_vdg_check(&random_density(&l, &mut rng), &random_density(&l, &mut rng))?;
        bad += (!c.holds()) as u64;
        slack = slack.min(c.slack());
    }
    Ok(vec![
        rate_row("fuchs-van-de-graaf/violations".into(), bad, n, 0.0, Check::Within(0.0)),
        ReportRow::judged("fuchs-van-de-graaf/min-slack", n, slack, (slack, slack), 0.0, Check::Info),
    ])
}

fn helstrom_oracle(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let pairs = p.trials(100);
    let samples = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let q = SubsystemLayout::qutrit();
    let (mut beaten, mut worst_gap, mut worst_dev) = (0u64, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..pairs {
        let r0 = random_density(&q, &mut rng);
        let r1 = random_density(&q, &mut rng);
        let opt = helstrom_success(&r0, &r1)?;
        worst_dev = worst_dev
            .max((opt - helstrom_qutrit(r0.matrix(), r1.matrix())).abs())
            .max((helstrom_measurement(&r0, &r1)?.success(&r0, &r1)? - opt).abs());
        let mut any = false;
        for _ in 0..samples {
            let [m0, m1] = random_two_outcome(3, &mut rng);
            let sampled = 0.5 * (m0.expectation_mixed(&r0)? + m1.expectation_mixed(&r1)?);
            worst_gap = worst_gap.max(sampled - opt);
            any |= sampled > opt + 1e-12;
        }
        beaten += any as u64;
    }
    Ok(vec![
        rate_row("helstrom-oracle/beaten".into(), beaten, pairs, 0.0, Check::Within(0.0)),
        ReportRow::judged("helstrom-oracle/max-sampled-gap", pairs * samples, worst_gap, (worst_gap, worst_gap), 0.0, Check::AtMost(1e-12)),
        ReportRow::judged("helstrom-oracle/closed-form-deviation", pairs, worst_dev, (worst_dev, worst_dev), 0.0, Check::AtMost(p.tol(1e-9))),
    ])
}

fn determinism(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let trials = p.trials(2_000);
    let cases = [
        (ProtocolSpec::ProtocolB { k: 2 }, AliceSpec::single_cheat(), BobSpec::Curious),
        (ProtocolSpec::ProtocolB { k: 2 }, AliceSpec::OnePair, BobSpec::Curious),
        (ProtocolSpec::CksRound, AliceSpec::BasisAttack, BobSpec::Honest),
    ];
    let report = |workers: usize| -> Result<Vec<u8>, CliError> {
        let mut rows = Vec::new();
        for (protocol, alice, bob) in &cases {
            let s = estimate(
                &CheatScenario {
                    protocol: protocol.clone(),
                    alice: alice.clone(),
                    bob: *bob,
                    trials,
                    seed: p.seed,
                },
                Some(workers),
            )?;
            rows.push(est_row(alice.label().to_string(), &s.alice, 0.5, Check::Info));
            rows.push(est_row(format!("{}-bob", alice.label()), &s.bob, 0.5, Check::Info));
        }
        emit_report(&rows, Format::Csv)
    };
    let base = report(1)?;
    let mut same = 0u64;
    let counts = [1usize, 2, 3, 4];
    for w in counts {
        same += (report(w)? == base) as u64;
    }
    let n = counts.len() as u64;
    Ok(vec![rate_row("determinism/identical-reports".into(), same, n, 1.0, Check::Within(0.0))])
}
