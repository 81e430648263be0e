//! Cascading bandits under adversarial click corruption.
//!
//! - [`model`]: items, weights, lists, feedback, reward and regret.
//! - [`environment`]: cascade feedback from synthetic or file-backed models.
//! - [`adversary`]: scheduled click-suppression attack and its budget ledger.
//! - [`policy`]: position-based elimination, its corruption-robust
//!   multi-instance variants, and UCB / ranked-bandit baselines.
//! - [`harness`]: seeded experiments and CSV reporting.

pub mod adversary;
pub mod environment;
pub mod error;
pub mod harness;
pub mod model;
pub mod policy;
pub mod rng;

pub use adversary::{pick_target, schedule_active, Adversary, AttackMode, CorruptionLedger, CorruptionSchedule};
pub use environment::{
    generate_synthetic_model, load_feedback_matrix, load_weight_file, model_from_matrix, sample_round,
    Environment, EnvironmentConfig, FeedbackMatrix, FeedbackMode, ModelSource,
};
pub use error::{CascadeError, Result};
pub use harness::{
    run_experiment, run_experiment_with_threads, table_summary, ExperimentSpec, RunRecord, SnapshotRow,
    SummaryRow, Trial,
};
pub use model::{
    expected_reward, optimal_list, optimal_value, realized_reward, regret_increment, AttractionModel, ItemId,
    RecList, RegretMode, RoundFeedback,
};
pub use policy::{Algorithm, Policy, PolicyConfig, PolicyDecision};
