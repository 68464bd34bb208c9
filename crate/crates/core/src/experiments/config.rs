//! Experiment configuration as read from a TOML file. Angles are in degrees
//! here and converted to radians when the experiment is resolved.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::{Method, RatioRule};
use crate::error::{Error, Result};
use crate::precoding::{Mode, SensingBeam};

fn default_calibration_trials() -> usize {
    10_000
}
fn default_one() -> f64 {
    1.0
}
fn default_k_max() -> usize {
    4
}
fn default_pfa() -> f64 {
    0.01
}
fn default_methods() -> Vec<Method> {
    vec![Method::Ratio, Method::Mdl, Method::Aic]
}
fn default_ue_aod() -> f64 {
    140.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub trials: usize,
    #[serde(default = "default_calibration_trials")]
    pub calibration_trials: usize,
    pub array: ArrayConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub beamforming: BeamformingConfig,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    #[serde(default)]
    pub clutter: Vec<ClusterConfig>,
    /// Variance of each entry of the clutter illumination matrix.
    #[serde(default = "default_one")]
    pub clutter_illumination_power: f64,
    pub signal: SignalConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_one")]
    pub variance: f64,
    /// AR(1) coefficient; 0 means white noise.
    #[serde(default)]
    pub gamma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            variance: 1.0,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamformingConfig {
    pub mode: Mode,
    pub total_slots: usize,
    #[serde(default = "default_one")]
    pub alpha: f64,
    #[serde(default = "default_one")]
    pub delta: f64,
    #[serde(default = "default_ue_aod")]
    pub ue_aod_deg: f64,
    #[serde(default = "default_one")]
    pub sensing_power: f64,
    #[serde(default = "default_one")]
    pub comm_power: f64,
    /// Added to every sensing direction.
    #[serde(default)]
    pub pointing_error_deg: f64,
    #[serde(default)]
    pub sensing_beam: SensingBeam,
    /// Explicit sensing directions; defaults to the target AoDs (or broadside
    /// when the scene has no targets).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing_aods_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub aoa_deg: f64,
    pub aod_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub center_aoa_deg: f64,
    pub center_aod_deg: f64,
    pub num_points: usize,
    pub spacing_deg: f64,
    /// Expected clutter power per receive antenna (linear).
    pub power: f64,
}

/// Target strength, given as exactly one of SNR or SCNR (dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scnr_db: Option<f64>,
}

impl SignalConfig {
    pub fn snr(db: f64) -> Self {
        Self {
            snr_db: Some(db),
            scnr_db: None,
        }
    }

    pub fn scnr(db: f64) -> Self {
        Self {
            snr_db: None,
            scnr_db: Some(db),
        }
    }
}

/// What counts as a correct detection under the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Estimated count equals the true count.
    #[default]
    Exact,
    /// Estimated count is at least the true count.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_pfa")]
    pub target_pfa: f64,
    /// Fixed ratio threshold; calibrated from null runs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub rule: RatioRule,
    #[serde(default)]
    pub metric: Metric,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            methods: default_methods(),
            k_max: default_k_max(),
            target_pfa: default_pfa(),
            epsilon: None,
            rule: RatioRule::default(),
            metric: Metric::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    ScnrDb,
    Alpha,
    Delta,
    Gamma,
    RxAntennas,
    Pfa,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::ScnrDb => "scnr_db",
            Axis::Alpha => "alpha",
            Axis::Delta => "delta",
            Axis::Gamma => "gamma",
            Axis::RxAntennas => "rx_antennas",
            Axis::Pfa => "pfa",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "snr_db" => Axis::SnrDb,
            "scnr_db" => Axis::ScnrDb,
            "alpha" => Axis::Alpha,
            "delta" => Axis::Delta,
            "gamma" => Axis::Gamma,
            "rx_antennas" => Axis::RxAntennas,
            "pfa" => Axis::Pfa,
            other => {
                return Err(Error::config(format!(
                    "unknown sweep axis `{other}` (expected snr_db|scnr_db|alpha|delta|gamma|rx_antennas|pfa)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    pub values: Vec<f64>,
    /// With `axis = "rx_antennas"`, also set the frame length `T` to `N`.
    #[serde(default)]
    pub couple_slots: bool,
}

impl SweepConfig {
    /// Parses `axis=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (axis, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::config(format!("sweep must look like axis=v1,v2 (got `{spec}`)")))?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config(format!("bad sweep value `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            axis: axis.parse()?,
            values,
            couple_slots: false,
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|source| Error::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Parameter-domain checks that do not need the resolved model.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        match (self.signal.snr_db, self.signal.scnr_db) {
            (Some(v), None) | (None, Some(v)) if v.is_finite() => {}
            (Some(_), Some(_)) => {
                return Err(Error::config("set exactly one of signal.snr_db and signal.scnr_db"))
            }
            (None, None) => return Err(Error::config("signal.snr_db or signal.scnr_db is required")),
            _ => return Err(Error::config("signal level must be finite")),
        }
        if self.detection.methods.is_empty() {
            return Err(Error::config("at least one detector is required"));
        }
        if !(self.clutter_illumination_power >= 0.0) {
            return Err(Error::config("clutter_illumination_power must be >= 0"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep has no values"));
            }
            for &v in &sweep.values {
                check_axis_value(sweep.axis, v)?;
            }
            if sweep.axis == Axis::Pfa && sweep.values.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::config("pfa grid must be sorted ascending"));
            }
        }
        Ok(())
    }

    /// Copy of this config with one sweep-axis parameter replaced.
    pub fn with_axis_value(&self, axis: Axis, value: f64, couple_slots: bool) -> Result<Self> {
        check_axis_value(axis, value)?;
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            Axis::SnrDb => cfg.signal = SignalConfig::snr(value),
            Axis::ScnrDb => cfg.signal = SignalConfig::scnr(value),
            Axis::Alpha => cfg.beamforming.alpha = value,
            Axis::Delta => cfg.beamforming.delta = value,
            Axis::Gamma => cfg.noise.gamma = value,
            Axis::RxAntennas => {
                cfg.array.rx_antennas = value as usize;
                if couple_slots {
                    cfg.beamforming.total_slots = value as usize;
                }
            }
            Axis::Pfa => cfg.detection.target_pfa = value,
        }
        Ok(cfg)
    }
}

fn check_axis_value(axis: Axis, v: f64) -> Result<()> {
    let ok = v.is_finite()
        && match axis {
            Axis::SnrDb | Axis::ScnrDb => true,
            Axis::Alpha | Axis::Delta => (0.0..=1.0).contains(&v),
            Axis::Gamma => v.abs() < 1.0,
            Axis::RxAntennas => v >= 1.0 && v.fract() == 0.0,
            Axis::Pfa => v > 0.0 && v < 1.0,
        };
    if ok {
        Ok(())
    } else {
        Err(Error::config(format!(
            "sweep value {v} is outside the domain of `{}`",
            axis.as_str()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
master_seed = 42
trials = 200

[array]
tx_antennas = 8
rx_antennas = 16

[noise]
gamma = 0.5

[beamforming]
mode = "tdm"
total_slots = 64
alpha = 0.5

[[targets]]
aoa_deg = 100.0
aod_deg = 60.0

[[clutter]]
center_aoa_deg = 40.0
center_aod_deg = 40.0
num_points = 32
spacing_deg = 2.0
power = 0.5

[signal]
snr_db = -6.0

[detection]
methods = ["ratio", "aic"]

[sweep]
axis = "gamma"
values = [0.0, 0.5, 0.9]
"#;

    #[test]
    fn parses_example_with_defaults() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.calibration_trials, 10_000);
        assert_eq!(cfg.noise.variance, 1.0);
        assert_eq!(cfg.beamforming.mode, Mode::Tdm);
        assert_eq!(cfg.beamforming.delta, 1.0);
        assert_eq!(cfg.detection.k_max, 4);
        assert_eq!(cfg.detection.methods, vec![Method::Ratio, Method::Aic]);
        assert_eq!(cfg.sweep.as_ref().unwrap().axis, Axis::Gamma);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_levels() {
        let bad = EXAMPLE.replace("gamma = 0.5", "gamma = 0.5\ncolour = 1");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());

        let both = EXAMPLE.replace("snr_db = -6.0", "snr_db = -6.0\nscnr_db = -5.0");
        let cfg = ExperimentConfig::from_toml_str(&both).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_parsing_and_domains() {
        let s = SweepConfig::parse("alpha=0.25,0.5, 1").unwrap();
        assert_eq!(s.axis, Axis::Alpha);
        assert_eq!(s.values, vec![0.25, 0.5, 1.0]);
        assert!(SweepConfig::parse("alpha").is_err());
        assert!(SweepConfig::parse("beta=1").is_err());
        assert!(SweepConfig::parse("alpha=x").is_err());

        let mut cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        cfg.sweep = Some(SweepConfig::parse("alpha=0.5,1.5").unwrap());
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(SweepConfig::parse("pfa=0.1,0.01").unwrap());
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(SweepConfig::parse("rx_antennas=16.5").unwrap());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn axis_override() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        let c = cfg.with_axis_value(Axis::RxAntennas, 32.0, true).unwrap();
        assert_eq!((c.array.rx_antennas, c.beamforming.total_slots), (32, 32));
        let c = cfg.with_axis_value(Axis::ScnrDb, -5.0, false).unwrap();
        assert_eq!(c.signal, SignalConfig::scnr(-5.0));
        assert!(c.sweep.is_none());
    }
}
