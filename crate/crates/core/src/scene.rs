//! Targets, clutter clusters and the channel matrices they induce.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::steering;
use crate::error::{Error, Result};
use crate::random::{complex_normal, CMatrix, CVector};

/// Point reflector seen at `aoa` by the receive array and at `aod` from the
/// transmit array. Angles in radians; `gain_variance` is the linear variance
/// of its complex Gaussian path gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub aoa: f64,
    pub aod: f64,
    pub gain_variance: f64,
}

/// A line of `num_points` scatterers centred on (`center_aoa`, `center_aod`).
///
/// `power` is the expected clutter power this cluster contributes at each
/// receive antenna for a unit-variance clutter illumination. It is split
/// evenly over the points: each point's path gain has variance
/// `power * N / num_points`, where the factor `N` undoes the `1/sqrt(N)`
/// normalization of the receive steering vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterCluster {
    pub center_aoa: f64,
    pub center_aod: f64,
    pub num_points: usize,
    pub angular_spacing: f64,
    pub power: f64,
}

impl ClutterCluster {
    /// `(aoa, aod)` of each point on the symmetric grid around the centre.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = (self.num_points as f64 - 1.0) / 2.0;
        (0..self.num_points).map(move |i| {
            let offset = (i as f64 - mid) * self.angular_spacing;
            (self.center_aoa + offset, self.center_aod + offset)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub targets: Vec<Target>,
    pub clutter: Vec<ClutterCluster>,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
}

impl Scene {
    pub fn new(
        targets: Vec<Target>,
        clutter: Vec<ClutterCluster>,
        tx_antennas: usize,
        rx_antennas: usize,
    ) -> Result<Self> {
        let scene = Self {
            targets,
            clutter,
            tx_antennas,
            rx_antennas,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::config("antenna counts must be positive"));
        }
        for (k, t) in self.targets.iter().enumerate() {
            if !(t.gain_variance >= 0.0) || !t.aoa.is_finite() || !t.aod.is_finite() {
                return Err(Error::config(format!(
                    "target {k}: gain variance must be >= 0 and angles finite"
                )));
            }
        }
        for (l, c) in self.clutter.iter().enumerate() {
            if c.num_points == 0 {
                return Err(Error::config(format!("clutter cluster {l}: no points")));
            }
            if !(c.angular_spacing >= 0.0) || !(c.power >= 0.0) {
                return Err(Error::config(format!(
                    "clutter cluster {l}: spacing and power must be >= 0"
                )));
            }
        }
        Ok(())
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    /// Total number of clutter points over all clusters.
    pub fn num_clutter_points(&self) -> usize {
        self.clutter.iter().map(|c| c.num_points).sum()
    }

    /// Largest per-antenna cluster power, 0 without clutter.
    pub fn max_clutter_power(&self) -> f64 {
        self.clutter.iter().map(|c| c.power).fold(0.0, f64::max)
    }

    /// The same scene with every target removed.
    pub fn without_targets(&self) -> Self {
        Self {
            targets: Vec::new(),
            ..self.clone()
        }
    }

    /// Per-point gain variances in cluster order.
    pub fn clutter_point_variances(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.rx_antennas as f64;
        self.clutter.iter().flat_map(move |c| {
            let v = c.power * n / c.num_points as f64;
            std::iter::repeat_n(v, c.num_points)
        })
    }

    fn clutter_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.clutter.iter().flat_map(|c| c.points())
    }
}

/// One CN(0, gain_variance_k) draw per target.
pub fn draw_target_gains<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> CVector {
    // Draw unit variance then scale, so the same stream yields paired gains
    // across different SNR settings.
    CVector::from_iterator(
        scene.targets.len(),
        scene
            .targets
            .iter()
            .map(|t| complex_normal(rng, 1.0) * t.gain_variance.sqrt()),
    )
}

/// One draw per clutter point with that point's per-cluster variance.
pub fn draw_clutter_gains<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> CVector {
    let variances: Vec<f64> = scene.clutter_point_variances().collect();
    CVector::from_iterator(
        variances.len(),
        variances
            .into_iter()
            .map(|v| complex_normal(rng, 1.0) * v.sqrt()),
    )
}

fn sum_of_outer_products<I>(n: usize, m: usize, terms: I) -> CMatrix
where
    I: Iterator<Item = ((f64, f64), nalgebra::Complex<f64>)>,
{
    let mut h = CMatrix::zeros(n, m);
    for ((aoa, aod), gain) in terms {
        let rx = steering(n, aoa) * gain;
        let tx = steering(m, aod);
        h.ger(nalgebra::Complex::new(1.0, 0.0), &rx, &tx.conjugate(), nalgebra::Complex::new(1.0, 0.0));
    }
    h
}

/// Target channel `sum_k g_k a_N(aoa_k) a_M(aod_k)^H`, an `N x M` matrix.
pub fn target_channel(scene: &Scene, gains: &CVector) -> Result<CMatrix> {
    if gains.len() != scene.targets.len() {
        return Err(Error::dimension(
            "target_channel gains",
            scene.targets.len(),
            gains.len(),
        ));
    }
    Ok(sum_of_outer_products(
        scene.rx_antennas,
        scene.tx_antennas,
        scene
            .targets
            .iter()
            .map(|t| (t.aoa, t.aod))
            .zip(gains.iter().copied()),
    ))
}

/// Clutter channel summed over every point of every cluster, `N x M`.
pub fn clutter_channel(scene: &Scene, gains: &CVector) -> Result<CMatrix> {
    let k_cl = scene.num_clutter_points();
    if gains.len() != k_cl {
        return Err(Error::dimension("clutter_channel gains", k_cl, gains.len()));
    }
    Ok(sum_of_outer_products(
        scene.rx_antennas,
        scene.tx_antennas,
        scene.clutter_points().zip(gains.iter().copied()),
    ))
}
