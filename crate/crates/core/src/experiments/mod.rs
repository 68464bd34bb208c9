//! Experiment configuration, Monte Carlo evaluation and result output.

pub mod config;
pub mod harness;
pub mod levels;
pub mod model;
pub mod output;
pub mod sweep;

pub use config::{Axis, ExperimentConfig, Metric, SweepConfig};
pub use harness::{calibrate_threshold, run_trials, simulate_trial, DetectorTally, Hypothesis, TrialPool, TrialStats};
pub use model::Experiment;
pub use output::{dump_trials, write_calibration, write_rows, RunManifest, RESULTS_HEADER};
pub use sweep::{calibration_table, roc_curve, run_experiment, CalibrationRow, RocPoint, RunOutput, SweepRow};
