//! Slot scheduling and transmit precoders for the two resource-sharing modes.
//!
//! * Concurrent mode (CM): every slot carries a sensing beam towards one target
//!   direction plus a communication beam towards the UE; `delta` splits power.
//! * Time-division mode (TDM): the first `floor(alpha * T)` slots scan the
//!   target directions, the rest serve the UE; `alpha` splits time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::steering;
use crate::error::{Error, Result};
use crate::random::{complex_normal, CVector, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tdm,
    Cm,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Tdm => "tdm",
            Mode::Cm => "cm",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tdm" => Ok(Mode::Tdm),
            "cm" => Ok(Mode::Cm),
            other => Err(Error::config(format!("unknown mode `{other}` (expected tdm|cm)"))),
        }
    }
}

/// How the sensing part of the precoder is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingBeam {
    /// Steer towards each sensing direction.
    #[default]
    Steered,
    /// No transmit beamforming: all sensing power leaves the first element.
    SingleElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotLabel {
    /// Slot steered towards sensing direction `k` (0-based).
    Sensing(usize),
    Comm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    labels: Vec<SlotLabel>,
}

impl Schedule {
    pub fn labels(&self) -> &[SlotLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Indices of the slots that form the sensing observation window.
    pub fn sensing_slots(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, SlotLabel::Sensing(_)))
            .map(|(t, _)| t)
            .collect()
    }

    pub fn sensing_count(&self, k: usize) -> usize {
        self.labels
            .iter()
            .filter(|l| **l == SlotLabel::Sensing(k))
            .count()
    }

    pub fn comm_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == SlotLabel::Comm).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingPlan {
    pub mode: Mode,
    pub total_slots: usize,
    pub alpha: f64,
    pub delta: f64,
    /// Sensing beam directions, one per target beam (radians).
    pub sensing_aods: Vec<f64>,
    pub ue_aod: f64,
    pub sensing_power: f64,
    pub comm_power: f64,
    pub tx_antennas: usize,
    pub sensing_beam: SensingBeam,
}

impl BeamformingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.total_slots == 0 {
            return Err(Error::config("total_slots must be positive"));
        }
        if self.tx_antennas == 0 {
            return Err(Error::config("tx_antennas must be positive"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::config(format!("delta must lie in [0, 1], got {}", self.delta)));
        }
        if !(self.sensing_power >= 0.0) || !(self.comm_power >= 0.0) {
            return Err(Error::config("transmit powers must be non-negative"));
        }
        if self.sensing_aods.is_empty() {
            return Err(Error::config("at least one sensing direction is required"));
        }
        Ok(())
    }

    pub fn num_beams(&self) -> usize {
        self.sensing_aods.len()
    }

    /// Number of slots in the TDM sensing phase, `floor(alpha * T)`.
    pub fn tdm_sensing_span(&self) -> usize {
        // Nudge before flooring so alpha = 0.3, T = 10 gives 3, not 2.
        ((self.alpha * self.total_slots as f64) + 1e-9).floor() as usize
    }

    /// Slot-by-slot labels; see [`slot_schedule`].
    pub fn schedule(&self) -> Result<Schedule> {
        slot_schedule(self, self.num_beams())
    }

    /// Unit-power sensing steering direction for beam `k`.
    fn sensing_vector(&self, k: usize) -> CVector {
        match self.sensing_beam {
            SensingBeam::Steered => steering(self.tx_antennas, self.sensing_aods[k]),
            SensingBeam::SingleElement => {
                let mut e = CVector::zeros(self.tx_antennas);
                e[0] = Complex64::new(1.0, 0.0);
                e
            }
        }
    }

    /// Precoding vector for a slot with the given label.
    pub fn precoder_for(&self, label: SlotLabel) -> CVector {
        let k_total = self.num_beams() as f64;
        match (self.mode, label) {
            (Mode::Cm, SlotLabel::Sensing(k)) => {
                let sensing = self.sensing_vector(k) * Complex64::from((self.delta / k_total).sqrt());
                let comm = steering(self.tx_antennas, self.ue_aod)
                    * Complex64::from((1.0 - self.delta).sqrt());
                sensing + comm
            }
            (Mode::Tdm, SlotLabel::Sensing(k)) => {
                self.sensing_vector(k) * Complex64::from(1.0 / k_total.sqrt())
            }
            (_, SlotLabel::Comm) => steering(self.tx_antennas, self.ue_aod),
        }
    }

    /// Precoding vector at slot `t`.
    pub fn precoder(&self, schedule: &Schedule, slot: usize) -> Result<CVector> {
        let label = schedule.labels.get(slot).copied().ok_or_else(|| {
            Error::config(format!("slot {slot} outside [0, {})", schedule.len()))
        })?;
        Ok(self.precoder_for(label))
    }
}

/// Assigns each of the `T` slots to a sensing beam or to communication.
///
/// CM: `K` consecutive runs of `floor(T/K)` slots, leftovers join the last run.
/// TDM: the first `floor(alpha T)` slots hold `K` runs of `floor(T_s/K)`;
/// leftovers and the remaining slots are communication.
pub fn slot_schedule(plan: &BeamformingPlan, num_targets: usize) -> Result<Schedule> {
    plan.validate()?;
    if num_targets == 0 {
        return Err(Error::config("schedule needs at least one sensing direction"));
    }
    let t = plan.total_slots;
    let labels = match plan.mode {
        Mode::Cm => {
            if t < num_targets {
                return Err(Error::config(format!(
                    "CM needs T >= K, got T = {t}, K = {num_targets}"
                )));
            }
            let run = t / num_targets;
            (0..t)
                .map(|s| SlotLabel::Sensing((s / run).min(num_targets - 1)))
                .collect()
        }
        Mode::Tdm => {
            let span = plan.tdm_sensing_span();
            if span < num_targets {
                return Err(Error::config(format!(
                    "TDM needs floor(alpha*T) >= K, got floor({} * {t}) = {span} < K = {num_targets}",
                    plan.alpha
                )));
            }
            let run = span / num_targets;
            (0..t)
                .map(|s| {
                    if s < run * num_targets {
                        SlotLabel::Sensing(s / run)
                    } else {
                        SlotLabel::Comm
                    }
                })
                .collect()
        }
    };
    Ok(Schedule { labels })
}

/// UE sample `a_M(ue_aoa)^H (sqrt(P_c) w[t]) s + z`, `z ~ CN(0, ue_noise_variance)`.
pub fn ue_received_sample<R: Rng + ?Sized>(
    plan: &BeamformingPlan,
    schedule: &Schedule,
    slot: usize,
    symbol: Complex64,
    ue_aoa: f64,
    ue_noise_variance: f64,
    rng: &mut R,
) -> Result<Complex64> {
    let w = plan.precoder(schedule, slot)?;
    let a = steering(plan.tx_antennas, ue_aoa);
    let gain = a.dotc(&w) * plan.comm_power.sqrt();
    let noise = if ue_noise_variance > 0.0 {
        complex_normal(rng, ue_noise_variance)
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(gain * symbol + noise)
}
