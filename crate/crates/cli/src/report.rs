//! Report rows and their CSV / JSONL encodings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for reference, carries no threshold.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        })
    }
}

/// How a row's value is judged against its target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    /// `|value − target| ≤ tol`
    Within(f64),
    /// The interval `[ci_low, ci_high]` contains the target.
    CiContains,
    /// The interval lies inside `target ± tol`.
    CiInside(f64),
    /// `value ≤ target + slack`
    AtMost(f64),
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub target: Option<f64>,
    pub margin: Option<f64>,
    pub verdict: Verdict,
}

impl ReportRow {
    /// A row judged by `check` against `target`. The margin is always
    /// `p_hat − target`.
    pub fn judged(name: impl Into<String>, trials: u64, p_hat: f64, ci: (f64, f64), target: f64, check: Check) -> Self {
        let pass = match check {
            Check::Within(tol) => (p_hat - target).abs() <= tol,
            Check::CiContains => ci.0 <= target && target <= ci.1,
            Check::CiInside(tol) => ci.0 >= target - tol && ci.1 <= target + tol,
            Check::AtMost(slack) => p_hat <= target + slack,
            Check::Info => true,
        };
        Self {
            scenario: name.into(),
            trials,
            p_hat,
            ci_low: ci.0,
            ci_high: ci.1,
            target: Some(target),
            margin: Some(p_hat - target),
            verdict: match (check, pass) {
                (Check::Info, _) => Verdict::Info,
                (_, true) => Verdict::Pass,
                (_, false) => Verdict::Fail,
            },
        }
    }

    /// An exact (non-sampled) quantity.
    pub fn exact(name: impl Into<String>, value: f64, target: f64, check: Check) -> Self {
        Self::judged(name, 0, value, (value, value), target, check)
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(CliError::Usage(format!("unsupported format '{other}'"))),
        }
    }
}

pub const CSV_HEADER: [&str; 8] = ["scenario", "trials", "p_hat", "ci_low", "ci_high", "target", "margin", "verdict"];

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

/// Encodes `rows`. Output depends only on the rows.
pub fn emit_report(rows: &[ReportRow], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record([
                    r.scenario.clone(),
                    r.trials.to_string(),
                    fixed(r.p_hat),
                    fixed(r.ci_low),
                    fixed(r.ci_high),
                    r.target.map(fixed).unwrap_or_default(),
                    r.margin.map(fixed).unwrap_or_default(),
                    r.verdict.to_string(),
                ])?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.into_error()))
        }
        Format::Jsonl => {
            let mut out = Vec::new();
            for r in rows {
                serde_json::to_writer(&mut out, r)?;
                out.push(b'\n');
            }
            Ok(out)
        }
    }
}

/// One human-readable line per row.
pub fn summary(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let target = r.target.map(|t| format!(" target={t:.6}")).unwrap_or_default();
        s.push_str(&format!(
            "{} {} p_hat={:.6} ci=[{:.6}, {:.6}]{target} n={}\n",
            r.verdict, r.scenario, r.p_hat, r.ci_low, r.ci_high, r.trials
        ));
    }
    s
}
