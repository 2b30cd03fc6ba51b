//! Closed-form bound quantities and the trace-norm / fidelity sandwich.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::cks::{phase_unitary, phi};
use crate::qlin::{apply_on_subsystems, fidelity, trace_norm, DensityMatrix, TOL};
use crate::Bit;

/// Bob's states indexed `[b][x0][x1]`.
pub type StateTable = [[[DensityMatrix; 2]; 2]; 2];

/// Bob's two-qutrit state after step 3 of an honest CKS round.
pub fn cks_bob_states() -> StateTable {
    std::array::from_fn(|b| {
        std::array::from_fn(|x0| {
            std::array::from_fn(|x1| {
                let bits = |v: usize| Bit::from(v == 1);
                let u = phase_unitary(bits(x0), bits(x1));
                apply_on_subsystems(&phi(bits(b), false), &u, &[0]).expect("qutrit phase").density()
            })
        })
    })
}

fn norm_of_difference(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, AnalysisError> {
    Ok(trace_norm(&a.difference(b)?)?)
}

/// `½ (Σ_{x0} ‖ρ_{0,x0,0} − ρ_{0,x0,1}‖ + Σ_{x1} ‖ρ_{1,0,x1} − ρ_{1,1,x1}‖)`.
pub fn delta_quantity(s: &StateTable) -> Result<f64, AnalysisError> {
    let mut sum = 0.0;
    for x in 0..2 {
        sum += norm_of_difference(&s[0][x][0], &s[0][x][1])?;
        sum += norm_of_difference(&s[1][0][x], &s[1][1][x])?;
    }
    Ok(0.5 * sum)
}

/// `Σ_{x0} F(ρ_{0,x0,0}, ρ_{0,x0,1}) + Σ_{x1} F(ρ_{1,0,x1}, ρ_{1,1,x1})`.
pub fn f_quantity(s: &StateTable) -> Result<f64, AnalysisError> {
    let mut sum = 0.0;
    for x in 0..2 {
        sum += fidelity(&s[0][x][0], &s[0][x][1])?;
        sum += fidelity(&s[1][0][x], &s[1][1][x])?;
    }
    Ok(sum)
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), AnalysisError> {
    if !(v >= lo - TOL && v <= hi + TOL) {
        return Err(AnalysisError::Domain(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Lower bound on Bob's cheating probability, `1/2 + Δ/8`.
pub fn p_bob_bound(delta: f64) -> Result<f64, AnalysisError> {
    in_range("delta", delta, 0.0, 4.0)?;
    Ok(0.5 + delta / 8.0)
}

/// Lower bound on Alice's cheating probability, `1/2 + F/16`.
pub fn p_alice_bound(f: f64) -> Result<f64, AnalysisError> {
    in_range("F", f, 0.0, 4.0)?;
    Ok(0.5 + f / 16.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvdgCheck {
    pub trace_norm: f64,
    pub fidelity: f64,
    /// `1 − ½‖ρ − ξ‖`
    pub lower: f64,
    /// `√(1 − ¼‖ρ − ξ‖²)`
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl FvdgCheck {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }

    /// Smallest of the two gaps; negative means a violation.
    pub fn slack(&self) -> f64 {
        (self.fidelity - self.lower).min(self.upper - self.fidelity)
    }
}

/// Evaluates `1 − ½‖ρ−ξ‖ ≤ F(ρ,ξ) ≤ √(1 − ¼‖ρ−ξ‖²)` with `1e−9` slack.
pub fn fuchs_vdg_check(rho: &DensityMatrix, xi: &DensityMatrix) -> Result<FvdgCheck, AnalysisError> {
    let t = norm_of_difference(rho, xi)?;
    let f = fidelity(rho, xi)?;
    let lower = 1.0 - 0.5 * t;
    let upper = (1.0 - 0.25 * t * t).max(0.0).sqrt();
    Ok(FvdgCheck {
        trace_norm: t,
        fidelity: f,
        lower,
        upper,
        lower_ok: lower <= f + TOL,
        upper_ok: f <= upper + TOL,
    })
}

fn check_eps(eps: f64) -> Result<(), AnalysisError> {
    in_range("epsilon", eps, 0.0, 1.0)
}

/// `1/2 + 1/(4n) − (ε/2)(1 − 1/n)`.
pub fn individual_bound(n: usize, eps: f64) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::Domain("n must be at least 1".into()));
    }
    check_eps(eps)?;
    let n = n as f64;
    Ok(0.5 + 0.25 / n - 0.5 * eps * (1.0 - 1.0 / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PDecomposition {
    /// Cap when the encoding run is one of the cheated runs: `¾(1−ε)^{pn−1}`.
    pub cheated: f64,
    /// Cap when it is honest: `½(1−ε)^{pn}`.
    pub honest: f64,
    /// `p·cheated + (1−p)·honest`.
    pub combined: f64,
}

/// Decomposition of Alice's success when she cheats on a fraction `p` of `n` runs.
pub fn p_decomposition(p: f64, n: usize, eps: f64) -> Result<PDecomposition, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::Domain("n must be at least 1".into()));
    }
    check_eps(eps)?;
    in_range("p", p, 1.0 / n as f64, 1.0)?;
    let pn = p * n as f64;
    let cheated = 0.75 * (1.0 - eps).powf(pn - 1.0);
    let honest = 0.5 * (1.0 - eps).powf(pn);
    Ok(PDecomposition {
        cheated,
        honest,
        combined: p * cheated + (1.0 - p) * honest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decreasing,
    Increasing,
    Flat,
    Mixed,
}

/// Observed direction of `combined` over `p = j/n`, `j = 1..=n`.
pub fn decomposition_trend(n: usize, eps: f64) -> Result<Trend, AnalysisError> {
    let values = (1..=n)
        .map(|j| p_decomposition(j as f64 / n as f64, n, eps).map(|d| d.combined))
        .collect::<Result<Vec<_>, _>>()?;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = 1e-15;
    Ok(if diffs.iter().all(|d| d.abs() <= scale) {
        Trend::Flat
    } else if diffs.iter().all(|&d| d < -scale) {
        Trend::Decreasing
    } else if diffs.iter().all(|&d| d > scale) {
        Trend::Increasing
    } else {
        Trend::Mixed
    })
}

/// `(1/2 + p/4) p_c`.
pub fn collective_formula(p: f64, pc: f64) -> Result<f64, AnalysisError> {
    in_range("p", p, 0.0, 1.0)?;
    in_range("p_c", pc, 0.0, 1.0)?;
    Ok((0.5 + 0.25 * p) * pc)
}

pub const GENERAL_BOUND: f64 = 2.0;
pub const MAX_VIOLATION: f64 = 1.5;
pub const LIMITED_LOWER: f64 = 5.0 / 3.0;

/// `2P_A + P_B` and its signed margins (value minus reference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub two_pa_plus_pb: f64,
    pub vs_general_bound: f64,
    pub vs_max_violation: f64,
    pub vs_limited_lower: f64,
}

pub fn bound_report_from(pa: f64, pb: f64) -> BoundReport {
    let v = 2.0 * pa + pb;
    BoundReport {
        two_pa_plus_pb: v,
        vs_general_bound: v - GENERAL_BOUND,
        vs_max_violation: v - MAX_VIOLATION,
        vs_limited_lower: v - LIMITED_LOWER,
    }
}
