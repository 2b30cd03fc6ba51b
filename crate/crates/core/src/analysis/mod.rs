//! Closed-form quantities, exact checks and Monte Carlo estimates.

mod bounds;
mod epsilon;
mod estimate;
mod theorem1;

use thiserror::Error;

use crate::qlin::QlinError;
use crate::registry::RegistryError;
use crate::weakot::ProtocolError;

pub use bounds::{
    bound_report_from, cks_bob_states, collective_formula, decomposition_trend, delta_quantity, f_quantity,
    fuchs_vdg_check, individual_bound, p_alice_bound, p_bob_bound, p_decomposition, BoundReport, FvdgCheck,
    PDecomposition, StateTable, Trend, GENERAL_BOUND, LIMITED_LOWER, MAX_VIOLATION,
};
pub use epsilon::{cheated_run_stats, epsilon_exact, CheatedRunStats};
pub use estimate::{
    estimate, run_trial, trial_rng, wilson, AliceSpec, BobSpec, ChannelSpec, CheatEstimate, CheatScenario,
    ProtocolSpec, ScenarioStats, Z99,
};
pub use theorem1::{
    random_reliable_spec, random_two_outcome, reliability_holds, theorem1_verify, CheatUnitarySpec, Theorem1Report,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Qlin(#[from] QlinError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("precondition not met: {0}")]
    Precondition(String),
}
