//! Monte Carlo trials, threshold calibration and detection tallies.
//!
//! Each trial draws from streams keyed by `(master_seed, domain, trial)`, so
//! results do not depend on how rayon schedules the work, and configurations
//! that differ only in mode, power split or target level see the same noise,
//! symbols and gains for a given trial index.

use rayon::prelude::*;
use serde::Serialize;

use crate::detect::{
    aic_estimate, count_from_ratios, eigenvalue_ratios, epsilon_from_null_statistics, max_ratio,
    mdl_estimate, Method, RatioRule,
};
use crate::error::Result;
use crate::noise::generate_noise;
use crate::random::{CMatrix, Component, Domain, TrialSeed};
use crate::scene::{clutter_channel, draw_clutter_gains, draw_target_gains, target_channel};
use crate::synthesis::{
    draw_symbols, received_matrix, synthesize_clutter_tx, synthesize_tx_with_symbols,
    ObservationBatch,
};

use super::config::{ExperimentConfig, Metric};
use super::model::Experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Clutter and noise only.
    Null,
    /// Targets present.
    Alternative,
}

/// Synthesizes one trial's observation.
pub fn simulate_trial(exp: &Experiment, seed: TrialSeed, hypothesis: Hypothesis) -> Result<ObservationBatch> {
    let scene = &exp.scene;
    let (n, m) = (scene.rx_antennas, scene.tx_antennas);
    let frame = exp.plan.total_slots;
    let window = exp.schedule.sensing_slots();
    let t_s = window.len();

    // Noise and clutter illumination are drawn over the whole frame and then
    // restricted to the sensing window, which keeps them paired across modes.
    let v = generate_noise(&exp.noise, n, frame, &mut seed.rng(Component::Noise))
        .select_columns(window.iter());

    let (h, x) = if hypothesis == Hypothesis::Alternative && scene.num_targets() > 0 {
        let gains = draw_target_gains(scene, &mut seed.rng(Component::TargetGains));
        let symbols = draw_symbols(frame, &mut seed.rng(Component::Symbols));
        (
            target_channel(scene, &gains)?,
            synthesize_tx_with_symbols(&exp.plan, &exp.schedule, &symbols)?,
        )
    } else {
        (CMatrix::zeros(n, m), CMatrix::zeros(m, t_s))
    };

    let (h_cl, x_cl) = if scene.clutter.is_empty() {
        (CMatrix::zeros(n, m), CMatrix::zeros(m, t_s))
    } else {
        let gains = draw_clutter_gains(scene, &mut seed.rng(Component::ClutterGains));
        let x_cl = synthesize_clutter_tx(
            exp.clutter_illumination_power,
            m,
            frame,
            &mut seed.rng(Component::ClutterSymbols),
        )
        .select_columns(window.iter());
        (clutter_channel(scene, &gains)?, x_cl)
    };

    ObservationBatch::from_received(received_matrix(&h, &x, &h_cl, &x_cl, &v)?)
}

/// Per-trial summary that every detector can be evaluated from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    pub ratios: Vec<f64>,
    pub mdl: Option<usize>,
    pub aic: Option<usize>,
}

impl TrialStats {
    pub fn from_eigenvalues(eigenvalues: &[f64], samples: usize, k_max: usize, methods: &[Method]) -> Result<Self> {
        let ratios = eigenvalue_ratios(eigenvalues, k_max)?;
        let mdl = if methods.contains(&Method::Mdl) {
            Some(mdl_estimate(eigenvalues, samples, k_max)?)
        } else {
            None
        };
        let aic = if methods.contains(&Method::Aic) {
            Some(aic_estimate(eigenvalues, samples, k_max)?)
        } else {
            None
        };
        Ok(Self { ratios, mdl, aic })
    }

    pub fn max_ratio(&self) -> f64 {
        max_ratio(&self.ratios).0
    }

    /// Estimated count for `method`; `epsilon` applies to the ratio test only.
    pub fn count(&self, method: Method, epsilon: f64, rule: RatioRule) -> usize {
        match method {
            Method::Ratio => count_from_ratios(&self.ratios, epsilon, rule),
            Method::Mdl => self.mdl.expect("MDL statistics collected"),
            Method::Aic => self.aic.expect("AIC statistics collected"),
        }
    }
}

fn methods(exp: &Experiment) -> Vec<Method> {
    exp.detectors.iter().map(|d| d.method).collect()
}

/// Runs `trials` trials of one hypothesis in parallel; output is in trial order.
pub fn collect_stats(
    exp: &Experiment,
    domain: Domain,
    hypothesis: Hypothesis,
    trials: usize,
    methods: &[Method],
) -> Result<Vec<TrialStats>> {
    let k_max = exp.k_max();
    let t_s = exp.window_len();
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let batch = simulate_trial(exp, TrialSeed::new(exp.master_seed, domain, i), hypothesis)?;
            TrialStats::from_eigenvalues(&batch.eigenvalues, t_s, k_max, methods)
        })
        .collect()
}

/// Null-hypothesis max-ratio statistics from the calibration stream.
pub fn null_max_ratios(exp: &Experiment, trials: usize) -> Result<Vec<f64>> {
    Ok(collect_stats(exp, Domain::Calibration, Hypothesis::Null, trials, &[])?
        .iter()
        .map(TrialStats::max_ratio)
        .collect())
}

/// Empirical ratio threshold for `config`'s null hypothesis (targets removed).
pub fn calibrate_threshold(config: &ExperimentConfig, trials: usize, target_pfa: f64) -> Result<f64> {
    let exp = Experiment::from_config(config)?;
    calibrate_experiment(&exp, trials, target_pfa)
}

pub fn calibrate_experiment(exp: &Experiment, trials: usize, target_pfa: f64) -> Result<f64> {
    let stats = null_max_ratios(exp, trials)?;
    epsilon_from_null_statistics(&stats, target_pfa)
}

/// Tally for one detector over paired null and alternative runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorTally {
    pub method: Method,
    pub correct_detections: usize,
    pub false_alarms: usize,
    pub trials: usize,
    /// Ratio threshold used; `None` for the information criteria.
    pub epsilon: Option<f64>,
}

impl DetectorTally {
    pub fn detection_rate(&self) -> f64 {
        self.correct_detections as f64 / self.trials as f64
    }

    pub fn false_alarm_rate(&self) -> f64 {
        self.false_alarms as f64 / self.trials as f64
    }
}

/// Stored statistics of one run, enough to re-threshold the ratio test.
#[derive(Debug, Clone)]
pub struct TrialPool {
    pub null: Vec<TrialStats>,
    pub alternative: Vec<TrialStats>,
    pub true_count: usize,
    pub metric: Metric,
    pub rule: RatioRule,
}

impl TrialPool {
    pub fn collect(exp: &Experiment) -> Result<Self> {
        let methods = methods(exp);
        Ok(Self {
            null: collect_stats(exp, Domain::Null, Hypothesis::Null, exp.trials, &methods)?,
            alternative: collect_stats(exp, Domain::Alternative, Hypothesis::Alternative, exp.trials, &methods)?,
            true_count: exp.num_targets(),
            metric: exp.metric,
            rule: exp.detectors[0].rule,
        })
    }

    fn is_correct(&self, estimate: usize) -> bool {
        match self.metric {
            Metric::Exact => estimate == self.true_count,
            Metric::AtLeast => estimate >= self.true_count,
        }
    }

    pub fn tally(&self, method: Method, epsilon: f64) -> DetectorTally {
        let correct_detections = self
            .alternative
            .iter()
            .filter(|s| self.is_correct(s.count(method, epsilon, self.rule)))
            .count();
        let false_alarms = self
            .null
            .iter()
            .filter(|s| s.count(method, epsilon, self.rule) > 0)
            .count();
        DetectorTally {
            method,
            correct_detections,
            false_alarms,
            trials: self.alternative.len(),
            epsilon: (method == Method::Ratio).then_some(epsilon),
        }
    }
}

/// Ratio threshold for `exp`: the configured one, or calibrated at the
/// configured P_FA.
pub fn resolve_epsilon(exp: &Experiment) -> Result<f64> {
    match exp.epsilon {
        Some(eps) => Ok(eps),
        None => calibrate_experiment(exp, exp.calibration_trials, exp.detectors[0].target_pfa),
    }
}

/// Calibrates (unless a threshold is fixed) and tallies every detector.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<DetectorTally>> {
    let exp = Experiment::from_config(config)?;
    let epsilon = resolve_epsilon(&exp)?;
    let pool = TrialPool::collect(&exp)?;
    Ok(exp
        .detectors
        .iter()
        .map(|d| pool.tally(d.method, epsilon))
        .collect())
}
