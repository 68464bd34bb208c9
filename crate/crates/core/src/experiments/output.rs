//! Result files: the tidy CSV table, the run manifest and debug dumps.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::random::{Domain, TrialSeed};
use crate::synthesis::DEBUG_DUMP_HEADER;

use super::config::ExperimentConfig;
use super::harness::{simulate_trial, Hypothesis};
use super::model::Experiment;
use super::sweep::{CalibrationRow, SweepRow};

pub const RESULTS_HEADER: [&str; 8] = [
    "detector",
    "mode",
    "axis",
    "value",
    "detection_rate",
    "false_alarm_rate",
    "trials",
    "epsilon",
];

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_calibration<W: Write>(rows: &[CalibrationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub results: String,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, wall_time_s: f64, warnings: Vec<String>, results: &str) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.master_seed,
            config: config.clone(),
            wall_time_s,
            warnings,
            results: results.to_string(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

/// Writes the received matrices of the first `count` target-present trials
/// as long-format CSV.
pub fn dump_trials<W: Write>(exp: &Experiment, count: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DEBUG_DUMP_HEADER)?;
    for i in 0..count as u64 {
        let alt = simulate_trial(exp, TrialSeed::new(exp.master_seed, Domain::Alternative, i), Hypothesis::Alternative)?;
        alt.write_debug_rows(i, &mut w)?;
    }
    w.flush()?;
    Ok(())
}
