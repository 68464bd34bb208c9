//! Parameter sweeps and ROC curves over resolved experiments.

use std::collections::HashMap;

use log::{debug, info};
use serde::Serialize;

use crate::detect::{epsilon_from_null_statistics, Method};
use crate::error::{Error, Result};
use crate::precoding::Mode;

use super::config::{Axis, ExperimentConfig};
use super::harness::{null_max_ratios, DetectorTally, TrialPool};
use super::model::Experiment;

/// One row of the tidy results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub detector: Method,
    pub mode: Mode,
    /// Swept parameter, `"none"` for a single-point run.
    pub axis: String,
    pub value: Option<f64>,
    pub detection_rate: f64,
    pub false_alarm_rate: f64,
    pub trials: usize,
    pub epsilon: Option<f64>,
}

impl SweepRow {
    fn new(mode: Mode, axis: Option<Axis>, value: Option<f64>, tally: &DetectorTally) -> Self {
        Self {
            detector: tally.method,
            mode,
            axis: axis.map_or("none", Axis::as_str).to_string(),
            value,
            detection_rate: tally.detection_rate(),
            false_alarm_rate: tally.false_alarm_rate(),
            trials: tally.trials,
            epsilon: tally.epsilon,
        }
    }
}

/// Result of [`run_experiment`]: table rows plus modelling warnings gathered
/// from every sweep point.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Null max-ratio statistics, shared by sweep points with the same null model.
#[derive(Default)]
struct CalibrationCache {
    stats: HashMap<(String, usize), Vec<f64>>,
}

impl CalibrationCache {
    fn epsilon(&mut self, exp: &Experiment, pfa: f64) -> Result<f64> {
        if let Some(eps) = exp.epsilon {
            return Ok(eps);
        }
        let key = (exp.null_key(), exp.calibration_trials);
        if !self.stats.contains_key(&key) {
            debug!("calibrating with {} null trials", exp.calibration_trials);
            let stats = null_max_ratios(exp, exp.calibration_trials)?;
            self.stats.insert(key.clone(), stats);
        }
        epsilon_from_null_statistics(&self.stats[&key], pfa)
    }
}

fn push_warnings(out: &mut Vec<String>, exp: &Experiment) {
    for w in exp.assumption_warnings() {
        if !out.contains(&w) {
            out.push(w);
        }
    }
}

/// Runs the configured experiment, over the sweep axis if one is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut out = RunOutput::default();
    let Some(sweep) = &config.sweep else {
        let exp = Experiment::from_config(config)?;
        push_warnings(&mut out.warnings, &exp);
        let eps = CalibrationCache::default().epsilon(&exp, exp.detectors[0].target_pfa)?;
        let pool = TrialPool::collect(&exp)?;
        for d in &exp.detectors {
            out.rows.push(SweepRow::new(exp.plan.mode, None, None, &pool.tally(d.method, eps)));
        }
        return Ok(out);
    };

    if sweep.axis == Axis::Pfa {
        let exp = Experiment::from_config(config)?;
        push_warnings(&mut out.warnings, &exp);
        out.rows = roc_rows(&exp, &sweep.values)?;
        return Ok(out);
    }

    let mut cache = CalibrationCache::default();
    for &value in &sweep.values {
        let cfg = config.with_axis_value(sweep.axis, value, sweep.couple_slots)?;
        let exp = Experiment::from_config(&cfg)?;
        push_warnings(&mut out.warnings, &exp);
        let eps = cache.epsilon(&exp, exp.detectors[0].target_pfa)?;
        let pool = TrialPool::collect(&exp)?;
        info!("{} = {value}: {} trials", sweep.axis.as_str(), exp.trials);
        for d in &exp.detectors {
            out.rows.push(SweepRow::new(
                exp.plan.mode,
                Some(sweep.axis),
                Some(value),
                &pool.tally(d.method, eps),
            ));
        }
    }
    Ok(out)
}

/// ROC rows: every target P_FA re-thresholds the same stored statistics.
fn roc_rows(exp: &Experiment, pfas: &[f64]) -> Result<Vec<SweepRow>> {
    if exp.epsilon.is_some() {
        return Err(Error::config("a pfa sweep needs a calibrated threshold; remove detection.epsilon"));
    }
    let null = null_max_ratios(exp, exp.calibration_trials)?;
    let pool = TrialPool::collect(exp)?;
    let mut rows = Vec::new();
    for &pfa in pfas {
        let eps = epsilon_from_null_statistics(&null, pfa)?;
        for d in &exp.detectors {
            rows.push(SweepRow::new(exp.plan.mode, Some(Axis::Pfa), Some(pfa), &pool.tally(d.method, eps)));
        }
    }
    Ok(rows)
}

/// Point on the ratio-test ROC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub target_pfa: f64,
    pub epsilon: f64,
    pub false_alarm_rate: f64,
    pub detection_rate: f64,
}

/// Ratio-test ROC over a grid of target false-alarm probabilities.
pub fn roc_curve(config: &ExperimentConfig, pfas: &[f64]) -> Result<Vec<RocPoint>> {
    let mut cfg = config.clone();
    cfg.sweep = None;
    cfg.detection.epsilon = None;
    cfg.detection.methods = vec![Method::Ratio];
    let exp = Experiment::from_config(&cfg)?;
    Ok(roc_rows(&exp, pfas)?
        .into_iter()
        .zip(pfas)
        .map(|(row, &pfa)| RocPoint {
            target_pfa: pfa,
            epsilon: row.epsilon.expect("ratio rows carry a threshold"),
            false_alarm_rate: row.false_alarm_rate,
            detection_rate: row.detection_rate,
        })
        .collect())
}

/// Row of a calibration table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub axis: String,
    pub value: Option<f64>,
    pub pfa: f64,
    pub epsilon: f64,
    pub trials: usize,
}

/// Ratio thresholds for each target P_FA in `pfas`, at every sweep point of
/// `config` (a pfa sweep in the config is ignored).
pub fn calibration_table(config: &ExperimentConfig, pfas: &[f64], trials: usize) -> Result<Vec<CalibrationRow>> {
    let mut base = config.clone();
    base.calibration_trials = trials;
    base.detection.epsilon = None;
    let points: Vec<(Option<Axis>, Option<f64>, ExperimentConfig)> = match &config.sweep {
        Some(s) if s.axis != Axis::Pfa => s
            .values
            .iter()
            .map(|&v| Ok((Some(s.axis), Some(v), base.with_axis_value(s.axis, v, s.couple_slots)?)))
            .collect::<Result<_>>()?,
        _ => {
            base.sweep = None;
            vec![(None, None, base)]
        }
    };
    let mut rows = Vec::new();
    let mut cache = CalibrationCache::default();
    for (axis, value, cfg) in points {
        let exp = Experiment::from_config(&cfg)?;
        for &pfa in pfas {
            rows.push(CalibrationRow {
                axis: axis.map_or("none", Axis::as_str).to_string(),
                value,
                pfa,
                epsilon: cache.epsilon(&exp, pfa)?,
                trials,
            });
        }
    }
    Ok(rows)
}
