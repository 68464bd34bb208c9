//! Resolution of an [`ExperimentConfig`] into the simulation model.

use serde::Serialize;

use crate::detect::{DetectorConfig, Method};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::precoding::{BeamformingPlan, Schedule};
use crate::scene::{ClutterCluster, Scene, Target};

use super::config::{ExperimentConfig, Metric};
use super::levels::{scnr_to_gain_variance, snr_to_gain_variance};

/// Fully resolved experiment: scene with target gains set, noise model,
/// precoding plan and its schedule, detectors.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scene: Scene,
    pub noise: NoiseModel,
    pub plan: BeamformingPlan,
    pub schedule: Schedule,
    pub clutter_illumination_power: f64,
    pub detectors: Vec<DetectorConfig>,
    pub metric: Metric,
    pub trials: usize,
    pub calibration_trials: usize,
    pub master_seed: u64,
    /// Fixed ratio threshold, if the config provides one.
    pub epsilon: Option<f64>,
}

impl Experiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.array.rx_antennas;
        let m = cfg.array.tx_antennas;
        let noise = NoiseModel::ar1(cfg.noise.variance, cfg.noise.gamma)?;

        let clutter: Vec<ClutterCluster> = cfg
            .clutter
            .iter()
            .map(|c| ClutterCluster {
                center_aoa: c.center_aoa_deg.to_radians(),
                center_aod: c.center_aod_deg.to_radians(),
                num_points: c.num_points,
                angular_spacing: c.spacing_deg.to_radians(),
                power: c.power,
            })
            .collect();
        let clutter_powers: Vec<f64> = clutter.iter().map(|c| c.power).collect();

        let bf = &cfg.beamforming;
        let gain_variance = match (cfg.signal.snr_db, cfg.signal.scnr_db) {
            (Some(snr), _) => snr_to_gain_variance(snr, noise.variance, bf.sensing_power, m, n)?,
            (None, Some(scnr)) => scnr_to_gain_variance(
                scnr,
                noise.variance,
                &clutter_powers,
                bf.sensing_power,
                m,
                n,
            )?,
            (None, None) => unreachable!("validated above"),
        };
        let targets = cfg
            .targets
            .iter()
            .map(|t| Target {
                aoa: t.aoa_deg.to_radians(),
                aod: t.aod_deg.to_radians(),
                gain_variance,
            })
            .collect();
        let scene = Scene::new(targets, clutter, m, n)?;

        let sensing_aods_deg = match &bf.sensing_aods_deg {
            Some(v) => v.clone(),
            None if cfg.targets.is_empty() => vec![90.0],
            None => cfg.targets.iter().map(|t| t.aod_deg).collect(),
        };
        let plan = BeamformingPlan {
            mode: bf.mode,
            total_slots: bf.total_slots,
            alpha: bf.alpha,
            delta: bf.delta,
            sensing_aods: sensing_aods_deg
                .iter()
                .map(|d| (d + bf.pointing_error_deg).to_radians())
                .collect(),
            ue_aod: bf.ue_aod_deg.to_radians(),
            sensing_power: bf.sensing_power,
            comm_power: bf.comm_power,
            tx_antennas: m,
            sensing_beam: bf.sensing_beam,
        };
        let schedule = plan.schedule()?;
        let window = schedule.sensing_slots().len();

        let det = &cfg.detection;
        let mut methods = det.methods.clone();
        methods.sort();
        methods.dedup();
        let detectors: Vec<DetectorConfig> = methods
            .into_iter()
            .map(|method| DetectorConfig {
                method,
                k_max: det.k_max,
                epsilon: det.epsilon.unwrap_or(0.0),
                target_pfa: det.target_pfa,
                rule: det.rule,
            })
            .collect();
        for d in &detectors {
            d.validate(n)?;
        }
        if det.k_max >= window {
            return Err(Error::config(format!(
                "k_max = {} needs more than {window} sensing snapshots",
                det.k_max
            )));
        }
        let needs_full_rank = detectors
            .iter()
            .any(|d| matches!(d.method, Method::Mdl | Method::Aic));
        if needs_full_rank && window < n {
            return Err(Error::config(format!(
                "MDL/AIC need at least N = {n} snapshots, the sensing window has {window}"
            )));
        }

        Ok(Self {
            scene,
            noise,
            plan,
            schedule,
            clutter_illumination_power: cfg.clutter_illumination_power,
            detectors,
            metric: det.metric,
            trials: cfg.trials,
            calibration_trials: cfg.calibration_trials,
            master_seed: cfg.master_seed,
            epsilon: det.epsilon,
        })
    }

    pub fn num_targets(&self) -> usize {
        self.scene.num_targets()
    }

    pub fn window_len(&self) -> usize {
        self.schedule.sensing_slots().len()
    }

    pub fn k_max(&self) -> usize {
        self.detectors[0].k_max
    }

    /// Everything the null-hypothesis observation depends on. Two experiments
    /// with equal keys share calibration results.
    pub fn null_key(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            n: usize,
            m: usize,
            total_slots: usize,
            window: Vec<usize>,
            noise: &'a NoiseModel,
            clutter: &'a [ClutterCluster],
            clutter_power: f64,
            k_max: usize,
            seed: u64,
        }
        serde_json::to_string(&Key {
            n: self.scene.rx_antennas,
            m: self.scene.tx_antennas,
            total_slots: self.plan.total_slots,
            window: self.schedule.sensing_slots(),
            noise: &self.noise,
            clutter: &self.scene.clutter,
            clutter_power: self.clutter_illumination_power,
            k_max: self.k_max(),
            seed: self.master_seed,
        })
        .expect("key serializes")
    }

    /// Large-system modelling assumptions that this configuration strains.
    /// These are reported, never enforced.
    pub fn assumption_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.scene.rx_antennas as f64;
        let m = self.scene.tx_antennas as f64;
        let t = self.window_len() as f64;
        let k = self.num_targets();
        if k > 0 && (4 * k) as f64 >= n {
            out.push(format!("K = {k} is not small against N = {n} (K >= N/4)"));
        }
        let c = n / t;
        if !(0.1..=10.0).contains(&c) {
            out.push(format!("N/T_s = {c:.3} is outside [0.1, 10]"));
        }
        let cbar = m / n;
        if !(0.1..=10.0).contains(&cbar) {
            out.push(format!("M/N = {cbar:.3} is outside [0.1, 10]"));
        }
        for (l, cl) in self.scene.clutter.iter().enumerate() {
            if (cl.num_points as f64) * 8.0 < n {
                out.push(format!(
                    "cluster {l} has J = {} < N/8 points; it behaves like isolated point clutter",
                    cl.num_points
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::*;
    use crate::precoding::Mode;

    pub(crate) fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 1,
            trials: 10,
            calibration_trials: 200,
            array: ArrayConfig { tx_antennas: 8, rx_antennas: 16 },
            noise: NoiseConfig::default(),
            beamforming: BeamformingConfig {
                mode: Mode::Cm,
                total_slots: 64,
                alpha: 1.0,
                delta: 1.0,
                ue_aod_deg: 140.0,
                sensing_power: 1.0,
                comm_power: 1.0,
                pointing_error_deg: 0.0,
                sensing_beam: Default::default(),
                sensing_aods_deg: None,
            },
            targets: vec![TargetConfig { aoa_deg: 100.0, aod_deg: 60.0 }],
            clutter: vec![],
            clutter_illumination_power: 1.0,
            signal: SignalConfig::snr(0.0),
            detection: DetectionConfig::default(),
            sweep: None,
        }
    }

    #[test]
    fn resolves_gain_variance_and_beams() {
        let mut cfg = base_config();
        cfg.beamforming.pointing_error_deg = 4.0;
        let exp = Experiment::from_config(&cfg).unwrap();
        assert!((exp.scene.targets[0].gain_variance - 128.0).abs() < 1e-9);
        assert!((exp.plan.sensing_aods[0] - 64f64.to_radians()).abs() < 1e-12);
        assert_eq!(exp.window_len(), 64);
        assert_eq!(exp.detectors.len(), 3);
        assert!(exp.assumption_warnings().is_empty());
    }

    #[test]
    fn warns_on_strained_assumptions() {
        let mut cfg = base_config();
        cfg.targets = (0..4).map(|i| TargetConfig { aoa_deg: 30.0 + 20.0 * i as f64, aod_deg: 60.0 }).collect();
        cfg.clutter = vec![ClusterConfig {
            center_aoa_deg: 40.0,
            center_aod_deg: 40.0,
            num_points: 1,
            spacing_deg: 2.0,
            power: 1.0,
        }];
        cfg.array.tx_antennas = 1;
        let w = Experiment::from_config(&cfg).unwrap().assumption_warnings();
        assert_eq!(w.len(), 3, "{w:?}");
    }

    #[test]
    fn rejects_underdetermined_information_criteria() {
        let mut cfg = base_config();
        cfg.beamforming.mode = Mode::Tdm;
        cfg.beamforming.alpha = 0.2;
        assert!(matches!(Experiment::from_config(&cfg), Err(Error::Config(_))));
        cfg.detection.methods = vec![Method::Ratio];
        assert!(Experiment::from_config(&cfg).is_ok());
    }

    #[test]
    fn null_key_ignores_target_level() {
        let a = Experiment::from_config(&base_config()).unwrap();
        let mut cfg = base_config();
        cfg.signal = SignalConfig::snr(7.0);
        cfg.beamforming.delta = 0.3;
        let b = Experiment::from_config(&cfg).unwrap();
        assert_eq!(a.null_key(), b.null_key());
        cfg.noise.gamma = 0.5;
        let c = Experiment::from_config(&cfg).unwrap();
        assert_ne!(a.null_key(), c.null_key());
    }
}
