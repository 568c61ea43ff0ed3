//! Execution environment: rounds, adversaries, transcripts and the
//! Monte-Carlo scenario driver.

pub mod adversary;
pub mod scenario;
pub mod scheduler;
pub mod stats;
pub mod transcript;

pub use scenario::{csv_header, run_scenario, total_variation, AqaForm, RunOptions, Scenario, ScenarioConfig, ScenarioKind};
pub use stats::{TrialOutcome, TrialStats};
