//! Experiment runner for qsnap: random-target cohorts, the standard-state
//! benchmark, entropy comparison, mid-circuit snapshots and the mixed-target
//! diagnostic, with CSV/JSON emission for external plotting.

pub mod cohort;
pub mod emit;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod mixed;
pub mod runs;
pub mod snapshot;
pub mod standard;

pub use cohort::{run_cohort, CohortSummary, TrialRecord};
pub use entropy::run_entropy_analysis;
pub use error::{HarnessError, Result};
pub use experiment::{ExperimentSpec, NoiseSetting};
pub use mixed::{run_mixed_state_diagnostic, MixedDiagnosticConfig};
pub use runs::RunSettings;
pub use snapshot::run_midcircuit_snapshot;
pub use standard::run_standard_states;
