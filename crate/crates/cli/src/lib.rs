//! Experiment runner: resolves scenarios from the built-in catalog or a TOML
//! config, runs them, and writes CSV or JSONL reports.

pub mod catalog;
pub mod oracle;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;
use thiserror::Error;

use qwot::analysis::{AliceSpec, AnalysisError, BobSpec, ProtocolSpec};

pub use catalog::{catalog, find, Params, ScenarioDef};
pub use report::{emit_report, summary, Check, Format, ReportRow, Verdict, CSV_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed config: {0}")]
    Config(#[from] toml::de::Error),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<qwot::qlin::QlinError> for CliError {
    fn from(e: qwot::qlin::QlinError) -> Self {
        CliError::Analysis(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qwot", about = "Cheating-probability experiments for CKS-based weak OT")]
pub struct Args {
    /// Catalog scenario, or `all`. Without it, --alice selects a custom run.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of triples in Protocol B.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of runs (a multiple of 3).
    #[arg(long)]
    pub n: Option<usize>,
    /// honest | basis-attack | collective | one-pair | channel
    #[arg(long)]
    pub alice: Option<String>,
    /// honest | curious
    #[arg(long)]
    pub bob: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, env = "QWOT_WORKERS")]
    pub workers: Option<usize>,
    /// TOML document with the same keys as the flags (flags win).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// List catalog scenarios and exit.
    #[arg(long)]
    pub list: bool,
}

/// Config file contents. Keys mirror the flags; `target` and `tolerance`
/// override a scenario's headline threshold.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub alice: Option<String>,
    pub bob: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(toml::from_str(text)?)
    }

    /// Flags given on the command line replace config values.
    fn merge(mut self, a: Args) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if a.$f.is_some() { self.$f = a.$f; } )* };
        }
        take!(scenario, trials, seed, k, n, alice, bob, out, format, workers);
        self
    }
}

pub const DEFAULT_SEED: u64 = 7;

pub fn parse_alice(name: &str) -> Result<AliceSpec, CliError> {
    Ok(match name {
        "honest" => AliceSpec::Honest,
        "basis-attack" => AliceSpec::BasisAttack,
        "collective" => AliceSpec::Collective,
        "one-pair" => AliceSpec::OnePair,
        "channel" => AliceSpec::single_cheat(),
        other => return Err(CliError::Usage(format!("unknown alice strategy '{other}'"))),
    })
}

pub fn parse_bob(name: &str) -> Result<BobSpec, CliError> {
    Ok(match name {
        "honest" => BobSpec::Honest,
        "curious" => BobSpec::Curious,
        other => return Err(CliError::Usage(format!("unknown bob strategy '{other}'"))),
    })
}

impl TryFrom<&ScenarioConfig> for Params {
    type Error = CliError;

    fn try_from(c: &ScenarioConfig) -> Result<Self, CliError> {
        Ok(Params {
            trials: c.trials,
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            k: c.k,
            n: c.n,
            alice: c.alice.as_deref().map(parse_alice).transpose()?,
            bob: c.bob.as_deref().map(parse_bob).transpose()?,
            workers: c.workers,
            target: c.target,
            tolerance: c.tolerance,
        })
    }
}

/// A run outside the catalog: the given strategies on Protocol B (or a bare
/// round when neither k nor n is set). Rows carry no thresholds.
fn custom(p: &Params) -> Result<Vec<ReportRow>, CliError> {
    let alice = p.alice.clone().ok_or_else(|| CliError::Usage("custom runs need --alice".into()))?;
    let protocol = match (p.k, p.n) {
        (None, None) => ProtocolSpec::CksRound,
        (Some(k), _) => ProtocolSpec::ProtocolB { k },
        (None, Some(n)) if n % 3 == 0 && n > 0 => ProtocolSpec::ProtocolB { k: n / 3 },
        (None, Some(n)) => return Err(CliError::Usage(format!("n = {n} is not a positive multiple of 3"))),
    };
    let sc = qwot::analysis::CheatScenario {
        protocol,
        alice: alice.clone(),
        bob: p.bob.unwrap_or(BobSpec::Honest),
        trials: p.trials.unwrap_or(10_000),
        seed: p.seed,
    };
    let s = qwot::analysis::estimate(&sc, p.workers)?;
    let row = |name: &str, e: &qwot::analysis::CheatEstimate| ReportRow {
        scenario: format!("custom-{}/{name}", alice.label()),
        trials: e.trials,
        p_hat: e.p_hat,
        ci_low: e.ci_low,
        ci_high: e.ci_high,
        target: None,
        margin: None,
        verdict: Verdict::Info,
    };
    Ok(vec![row("p-alice", &s.alice), row("p-bob", &s.bob)])
}

/// Runs whatever `cfg` selects and returns the report rows.
pub fn run_config(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, CliError> {
    let params = Params::try_from(cfg)?;
    match cfg.scenario.as_deref() {
        Some("all") => {
            let mut rows = Vec::new();
            for s in catalog() {
                rows.extend(s.run(&params)?);
            }
            Ok(rows)
        }
        Some(name) => find(name)
            .ok_or_else(|| CliError::Usage(format!("unknown scenario '{name}' (see --list)")))?
            .run(&params),
        None if params.alice.is_some() => custom(&params),
        None => Err(CliError::Usage("nothing to run: pass --scenario or --alice".into())),
    }
}

fn execute(args: Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    if args.list {
        for s in catalog() {
            writeln!(out, "{:<22} {}", s.name, s.summary)?;
        }
        return Ok(EXIT_OK);
    }
    let base = match &args.config {
        Some(path) => ScenarioConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    let cfg = base.merge(args);
    let rows = run_config(&cfg)?;
    let bytes = emit_report(&rows, cfg.format.unwrap_or_default())?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => out.write_all(&bytes)?,
    }
    err.write_all(summary(&rows).as_bytes())?;
    Ok(if rows.iter().all(ReportRow::passed) { EXIT_OK } else { EXIT_THRESHOLD })
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. The report goes to `--out` or `out`; the summary and errors go to
/// `err`.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(args, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(err, "usage: qwot --scenario <name> [--trials N] [--seed S] [--format csv|jsonl] (see --help)");
            }
            EXIT_USAGE
        }
    }
}

pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli_with(std::iter::once("qwot").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_scenario_is_a_usage_error() {
        let (code, out, err) = run(&["--scenario", "bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty() && err.contains("unknown scenario") && err.contains("usage"));
        assert_eq!(run(&["--format", "xml", "--scenario", "cks-bound-quantities"]).0, EXIT_USAGE);
        assert_eq!(run(&[]).0, EXIT_USAGE);
        assert_eq!(run(&["--alice", "sneaky"]).0, EXIT_USAGE);
    }

    #[test]
    fn exact_scenario_report() {
        let (code, out, err) = run(&["--scenario", "cks-bound-quantities"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("scenario,trials,p_hat,ci_low,ci_high,target,margin,verdict\n"));
        assert_eq!(out.lines().count(), 5);
        assert!(err.lines().all(|l| l.starts_with("PASS ")));
        let (_, jsonl, _) = run(&["--scenario", "cks-bound-quantities", "--format", "jsonl"]);
        assert_eq!(jsonl.lines().count(), 4);
    }

    #[test]
    fn threshold_failure_exits_one() {
        // an impossible target turns the headline row into a failure
        let dir = std::env::temp_dir().join(format!("qwot-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("c.toml");
        std::fs::write(&cfg, "scenario = \"cks-basis-attack\"\ntrials = 2000\ntarget = 0.5\n").unwrap();
        let (code, out, _) = run(&["--config", cfg.to_str().unwrap()]);
        assert_eq!(code, EXIT_THRESHOLD);
        assert!(out.contains("cks-basis-attack/p-alice,2000,"));
        std::fs::write(&cfg, "scenario = \"cks-basis-attack\"\nbogus_key = 1\n").unwrap();
        assert_eq!(run(&["--config", cfg.to_str().unwrap()]).0, EXIT_USAGE);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn custom_run_and_output_file() {
        let dir = std::env::temp_dir().join(format!("qwot-cli-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.csv");
        let (code, out, _) = run(&["--alice", "basis-attack", "--trials", "500", "--out", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.is_empty());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("custom-basis-attack/p-alice,500,"));
        let (code, _, _) = run(&["--alice", "honest", "--out", "/nonexistent-dir/x.csv", "--trials", "10"]);
        assert_eq!(code, EXIT_USAGE);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn list_names_every_scenario() {
        let (code, out, _) = run(&["--list"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), catalog().len());
    }
}
