//! Mapping from SNR / SCNR to target path-gain variance.
//!
//! Reference point: the target echo seen at one receive antenna when the
//! sensing power leaves a single transmit element (no array gain on either
//! side). With unit-norm steering vectors that received power is
//! `gain_variance * P_s / (N * M)`, so
//!
//! ```text
//! SNR  = gain_variance * P_s / (N * M * sigma^2)
//! SCNR = gain_variance * P_s / (N * M * (sigma^2 + P_max_cl))
//! ```
//!
//! Transmit beamforming and coherent reception then add their array gains on
//! top of this reference, which is what the beamforming comparisons measure.

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn array_factor(tx_antennas: usize, rx_antennas: usize) -> f64 {
    (tx_antennas * rx_antennas) as f64
}

fn check_power(sensing_power: f64) -> Result<()> {
    if sensing_power > 0.0 && sensing_power.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "sensing power must be positive to set a target level, got {sensing_power}"
        )))
    }
}

/// Target gain variance for the requested per-element SNR.
pub fn snr_to_gain_variance(
    snr_db: f64,
    noise_variance: f64,
    sensing_power: f64,
    tx_antennas: usize,
    rx_antennas: usize,
) -> Result<f64> {
    check_power(sensing_power)?;
    Ok(db_to_linear(snr_db) * noise_variance * array_factor(tx_antennas, rx_antennas)
        / sensing_power)
}

/// `P_s / (sigma^2 + max_l P_cl,l)`; the strongest cluster sets the clutter term.
pub fn scnr(sensing_power: f64, noise_variance: f64, clutter_powers: &[f64]) -> f64 {
    let max_cl = clutter_powers.iter().copied().fold(0.0, f64::max);
    sensing_power / (noise_variance + max_cl)
}

/// Target gain variance for the requested per-element SCNR.
pub fn scnr_to_gain_variance(
    scnr_db: f64,
    noise_variance: f64,
    clutter_powers: &[f64],
    sensing_power: f64,
    tx_antennas: usize,
    rx_antennas: usize,
) -> Result<f64> {
    check_power(sensing_power)?;
    let max_cl = clutter_powers.iter().copied().fold(0.0, f64::max);
    Ok(db_to_linear(scnr_db)
        * (noise_variance + max_cl)
        * array_factor(tx_antennas, rx_antennas)
        / sensing_power)
}
