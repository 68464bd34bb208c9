//! Target-count estimators on ordered sample-covariance eigenvalues.
//!
//! The ratio test looks for the dominant gap between consecutive eigenvalues
//! and accepts it only when the ratio clears `1 + epsilon`; `epsilon` is set
//! empirically from null-hypothesis runs. MDL and AIC are the classical
//! information-theoretic source-enumeration criteria and need no threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ratio,
    Mdl,
    Aic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ratio => "ratio",
            Method::Mdl => "mdl",
            Method::Aic => "aic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ratio" => Ok(Method::Ratio),
            "mdl" => Ok(Method::Mdl),
            "aic" => Ok(Method::Aic),
            other => Err(Error::config(format!(
                "unknown detector `{other}` (expected ratio|mdl|aic)"
            ))),
        }
    }
}

/// How the ratio test turns the ratio vector into a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioRule {
    /// Index of the largest ratio, kept only if it exceeds `1 + epsilon`.
    #[default]
    ArgMax,
    /// Largest index whose ratio exceeds `1 + epsilon`.
    LargestExceeding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: Method,
    pub k_max: usize,
    pub epsilon: f64,
    pub target_pfa: f64,
    #[serde(default)]
    pub rule: RatioRule,
}

impl DetectorConfig {
    pub fn ratio(k_max: usize, epsilon: f64) -> Self {
        Self {
            method: Method::Ratio,
            k_max,
            epsilon,
            target_pfa: 0.01,
            rule: RatioRule::ArgMax,
        }
    }

    pub fn validate(&self, num_eigenvalues: usize) -> Result<()> {
        if self.k_max == 0 || self.k_max >= num_eigenvalues {
            return Err(Error::config(format!(
                "k_max must satisfy 1 <= k_max < N = {num_eigenvalues}, got {}",
                self.k_max
            )));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
            return Err(Error::config(format!(
                "target P_FA must lie in (0, 1), got {}",
                self.target_pfa
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub estimated_count: usize,
    /// `lambda_n / lambda_{n+1}` for `n = 1..=k_max`.
    pub ratios: Vec<f64>,
    pub method: Method,
}

fn check_eigenvalues(eigenvalues: &[f64], k_max: usize) -> Result<()> {
    if k_max == 0 {
        return Err(Error::config("k_max must be at least 1"));
    }
    if eigenvalues.len() < k_max + 1 {
        return Err(Error::config(format!(
            "need at least k_max + 1 = {} eigenvalues, got {}",
            k_max + 1,
            eigenvalues.len()
        )));
    }
    let scale = eigenvalues[0].abs().max(f64::MIN_POSITIVE);
    if eigenvalues.windows(2).any(|w| w[1] > w[0] + 1e-12 * scale) {
        return Err(Error::Numerical("eigenvalues are not sorted non-increasing".into()));
    }
    if !(eigenvalues[k_max] > 0.0) {
        return Err(Error::Numerical(format!(
            "eigenvalue {} is not positive ({})",
            k_max + 1,
            eigenvalues[k_max]
        )));
    }
    Ok(())
}

/// Consecutive ratios `lambda_n / lambda_{n+1}`, `n = 1..=k_max`.
pub fn eigenvalue_ratios(eigenvalues: &[f64], k_max: usize) -> Result<Vec<f64>> {
    check_eigenvalues(eigenvalues, k_max)?;
    Ok(eigenvalues[..=k_max].windows(2).map(|w| w[0] / w[1]).collect())
}

/// Maximum ratio and its 1-based index (ties go to the smaller index).
pub fn max_ratio(ratios: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &r) in ratios.iter().enumerate() {
        if r > best.0 {
            best = (r, i + 1);
        }
    }
    best
}

/// Applies a threshold to precomputed ratios.
pub fn count_from_ratios(ratios: &[f64], epsilon: f64, rule: RatioRule) -> usize {
    let threshold = 1.0 + epsilon;
    match rule {
        RatioRule::ArgMax => {
            let (best, idx) = max_ratio(ratios);
            if best > threshold {
                idx
            } else {
                0
            }
        }
        RatioRule::LargestExceeding => ratios
            .iter()
            .rposition(|&r| r > threshold)
            .map_or(0, |i| i + 1),
    }
}

pub fn ratio_test(eigenvalues: &[f64], cfg: &DetectorConfig) -> Result<DetectionResult> {
    let ratios = eigenvalue_ratios(eigenvalues, cfg.k_max)?;
    Ok(DetectionResult {
        estimated_count: count_from_ratios(&ratios, cfg.epsilon, cfg.rule),
        ratios,
        method: Method::Ratio,
    })
}

/// `ln(g / a)` of the trailing eigenvalues `lambda_{k+1..N}`: geometric over
/// arithmetic mean, always <= 0.
fn log_sphericity(tail: &[f64]) -> f64 {
    let m = tail.len() as f64;
    let mean_log = tail.iter().map(|l| l.ln()).sum::<f64>() / m;
    let mean = tail.iter().sum::<f64>() / m;
    mean_log - mean.ln()
}

fn information_criterion(
    eigenvalues: &[f64],
    samples: usize,
    k_max: usize,
    criterion: impl Fn(usize, usize, f64) -> f64,
) -> Result<usize> {
    check_eigenvalues(eigenvalues, k_max)?;
    if samples == 0 {
        return Err(Error::config("number of snapshots must be positive"));
    }
    if let Some(bad) = eigenvalues.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::Numerical(format!(
            "information criteria need positive eigenvalues; lambda_{} = {}",
            bad + 1,
            eigenvalues[bad]
        )));
    }
    let n = eigenvalues.len();
    let mut best = (f64::INFINITY, 0);
    for k in 0..=k_max {
        let value = criterion(n, k, log_sphericity(&eigenvalues[k..]));
        if value < best.0 {
            best = (value, k);
        }
    }
    Ok(best.1)
}

/// Minimum-description-length estimate:
/// `MDL(k) = -(N-k) T ln(g/a) + k(2N-k) ln(T) / 2`.
pub fn mdl_estimate(eigenvalues: &[f64], samples: usize, k_max: usize) -> Result<usize> {
    let t = samples as f64;
    information_criterion(eigenvalues, samples, k_max, |n, k, ls| {
        -((n - k) as f64) * t * ls + 0.5 * (k * (2 * n - k)) as f64 * t.ln()
    })
}

/// Akaike estimate: `AIC(k) = -2 (N-k) T ln(g/a) + 2 k(2N-k)`.
pub fn aic_estimate(eigenvalues: &[f64], samples: usize, k_max: usize) -> Result<usize> {
    let t = samples as f64;
    information_criterion(eigenvalues, samples, k_max, |n, k, ls| {
        -2.0 * ((n - k) as f64) * t * ls + 2.0 * (k * (2 * n - k)) as f64
    })
}

/// Runs whichever estimator `cfg` names.
pub fn detect(eigenvalues: &[f64], samples: usize, cfg: &DetectorConfig) -> Result<DetectionResult> {
    let ratios = eigenvalue_ratios(eigenvalues, cfg.k_max)?;
    let estimated_count = match cfg.method {
        Method::Ratio => count_from_ratios(&ratios, cfg.epsilon, cfg.rule),
        Method::Mdl => mdl_estimate(eigenvalues, samples, cfg.k_max)?,
        Method::Aic => aic_estimate(eigenvalues, samples, cfg.k_max)?,
    };
    Ok(DetectionResult {
        estimated_count,
        ratios,
        method: cfg.method,
    })
}

/// Empirical quantile with linear interpolation between order statistics
/// (`h = (n - 1) q`). `sorted` must be ascending and non-empty.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const MIN_CALIBRATION_TRIALS: usize = 100;

/// Threshold `epsilon` such that `1 + epsilon` is the `(1 - target_pfa)`
/// quantile of the null max-ratio statistic.
pub fn epsilon_from_null_statistics(max_ratios: &[f64], target_pfa: f64) -> Result<f64> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::config(format!("target P_FA must lie in (0, 1), got {target_pfa}")));
    }
    let n = max_ratios.len();
    if n < MIN_CALIBRATION_TRIALS {
        return Err(Error::config(format!(
            "calibration needs at least {MIN_CALIBRATION_TRIALS} trials, got {n}"
        )));
    }
    if (n as f64) * target_pfa < 5.0 {
        return Err(Error::config(format!(
            "{n} calibration trials leave fewer than 5 exceedances at P_FA = {target_pfa}"
        )));
    }
    let mut sorted = max_ratios.to_vec();
    if sorted.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite null statistic".into()));
    }
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok((empirical_quantile(&sorted, 1.0 - target_pfa) - 1.0).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::complex_normal_matrix;
    use crate::synthesis::{hermitian_eigenvalues, sample_covariance};
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(k_max: usize, epsilon: f64) -> DetectorConfig {
        DetectorConfig::ratio(k_max, epsilon)
    }

    #[test]
    fn single_dominant_gap() {
        let r = ratio_test(&[4.0, 1.0, 1.0, 1.0], &cfg(3, 0.5)).unwrap();
        assert_eq!(r.ratios, vec![4.0, 1.0, 1.0]);
        assert_eq!(r.estimated_count, 1);
    }

    #[test]
    fn flat_spectrum_has_no_target() {
        for eps in [1e-6, 0.1, 2.0] {
            assert_eq!(ratio_test(&[1.0; 4], &cfg(3, eps)).unwrap().estimated_count, 0);
        }
    }

    #[test]
    fn gap_at_second_index() {
        let r = ratio_test(&[9.0, 6.0, 1.0, 0.9], &cfg(3, 0.5)).unwrap();
        assert!((r.ratios[0] - 1.5).abs() < 1e-15);
        assert!((r.ratios[1] - 6.0).abs() < 1e-15);
        assert!((r.ratios[2] - 1.0 / 0.9).abs() < 1e-15);
        assert_eq!(r.estimated_count, 2);
    }

    #[test]
    fn ties_go_to_smaller_index() {
        assert_eq!(max_ratio(&[2.0, 2.0, 1.0]), (2.0, 1));
    }

    #[test]
    fn largest_exceeding_rule() {
        // Ratios [4, 1.6, 1.0]: argmax says 1, largest exceeding 1.5 says 2.
        let l = [8.0, 2.0, 1.25, 1.25];
        let mut c = cfg(3, 0.5);
        assert_eq!(ratio_test(&l, &c).unwrap().estimated_count, 1);
        c.rule = RatioRule::LargestExceeding;
        assert_eq!(ratio_test(&l, &c).unwrap().estimated_count, 2);
    }

    #[test]
    fn precondition_errors() {
        assert!(matches!(ratio_test(&[2.0, 1.0], &cfg(2, 0.1)), Err(Error::Config(_))));
        assert!(matches!(ratio_test(&[2.0, 1.0, 0.0], &cfg(2, 0.1)), Err(Error::Numerical(_))));
        assert!(matches!(ratio_test(&[1.0, 2.0, 3.0], &cfg(2, 0.1)), Err(Error::Numerical(_))));
        assert!(mdl_estimate(&[2.0, 1.0], 10, 2).is_err());
        assert!(aic_estimate(&[3.0, 2.0, 1.0, 0.0], 10, 2).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(3, 0.1).validate(4).is_ok());
        assert!(cfg(4, 0.1).validate(4).is_err());
        assert!(cfg(0, 0.1).validate(4).is_err());
        assert!(cfg(2, -0.1).validate(4).is_err());
    }

    #[test]
    fn information_criteria_on_flat_spectrum() {
        let l = [2.5; 8];
        assert_eq!(mdl_estimate(&l, 100, 7).unwrap(), 0);
        assert_eq!(aic_estimate(&l, 100, 7).unwrap(), 0);
    }

    /// Direct evaluation with products instead of log-means.
    fn criteria_oracle(l: &[f64], t: usize) -> (Vec<f64>, Vec<f64>) {
        let n = l.len();
        let (mut mdl, mut aic) = (Vec::new(), Vec::new());
        for k in 0..n {
            let tail = &l[k..];
            let m = tail.len() as f64;
            let g = tail.iter().product::<f64>().powf(1.0 / m);
            let a = tail.iter().sum::<f64>() / m;
            let ll = -(m * t as f64) * (g / a).ln();
            let p = (k * (2 * n - k)) as f64;
            mdl.push(ll + 0.5 * p * (t as f64).ln());
            aic.push(2.0 * ll + 2.0 * p);
        }
        (mdl, aic)
    }

    fn argmin(v: &[f64]) -> usize {
        v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
    }

    #[test]
    fn information_criteria_find_single_spike() {
        // Eight-antenna sample covariance of diag(100, 1, ..., 1) with T = 512.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let scale = DMatrix::from_diagonal(&DVector::from_iterator(
            8,
            (0..8).map(|i| nalgebra::Complex::new(if i == 0 { 10.0 } else { 1.0 }, 0.0)),
        ));
        let y = scale * complex_normal_matrix(&mut rng, 8, 512, 1.0);
        let l = hermitian_eigenvalues(&sample_covariance(&y).unwrap()).unwrap();
        let (mdl, aic) = criteria_oracle(&l, 512);
        assert_eq!(argmin(&mdl), 1);
        assert_eq!(argmin(&aic), 1);
        assert_eq!(mdl_estimate(&l, 512, 7).unwrap(), 1);
        assert_eq!(aic_estimate(&l, 512, 7).unwrap(), 1);
        for k_max in 1..8 {
            assert!(mdl_estimate(&l, 512, k_max).unwrap() <= k_max);
        }
    }

    #[test]
    fn quantile_definition() {
        let xs: Vec<f64> = (1..=5).map(f64::from).collect();
        assert_eq!(empirical_quantile(&xs, 0.5), 3.0);
        assert_eq!(empirical_quantile(&xs, 0.0), 1.0);
        assert_eq!(empirical_quantile(&xs, 1.0), 5.0);
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
    }

    #[test]
    fn half_pfa_threshold_is_median_minus_one() {
        let stats: Vec<f64> = (0..200).map(|i| 1.0 + i as f64 / 100.0).collect();
        let eps = epsilon_from_null_statistics(&stats, 0.5).unwrap();
        assert!((eps - 0.995).abs() < 1e-12, "{eps}");
    }

    #[test]
    fn calibration_guards() {
        let stats = vec![1.5; 300];
        assert!(epsilon_from_null_statistics(&stats[..99], 0.5).is_err());
        assert!(epsilon_from_null_statistics(&stats, 0.01).is_err());
        assert!(epsilon_from_null_statistics(&stats, 0.0).is_err());
        assert!(epsilon_from_null_statistics(&stats, 0.02).is_ok());
    }

    #[test]
    fn epsilon_decreases_with_pfa() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let stats: Vec<f64> = (0..2000).map(|_| 1.0 + rand::Rng::random::<f64>(&mut rng)).collect();
        let e1 = epsilon_from_null_statistics(&stats, 0.01).unwrap();
        let e5 = epsilon_from_null_statistics(&stats, 0.05).unwrap();
        let e20 = epsilon_from_null_statistics(&stats, 0.2).unwrap();
        assert!(e1 > e5 && e5 > e20);
    }

    proptest! {
        #[test]
        fn estimators_are_scale_invariant(
            mut l in proptest::collection::vec(0.05f64..50.0, 6..16),
            c in 1e-3f64..1e3,
            eps in 0.0f64..1.0,
            t in 8usize..256,
        ) {
            l.sort_by(|a, b| b.total_cmp(a));
            let k_max = l.len() - 1;
            let scaled: Vec<f64> = l.iter().map(|x| x * c).collect();
            let a = ratio_test(&l, &cfg(k_max, eps)).unwrap();
            let b = ratio_test(&scaled, &cfg(k_max, eps)).unwrap();
            prop_assert_eq!(a.estimated_count, b.estimated_count);
            prop_assert_eq!(mdl_estimate(&l, t, k_max).unwrap(), mdl_estimate(&scaled, t, k_max).unwrap());
            prop_assert_eq!(aic_estimate(&l, t, k_max).unwrap(), aic_estimate(&scaled, t, k_max).unwrap());
        }

        #[test]
        fn counts_and_ratios_stay_in_range(
            mut l in proptest::collection::vec(0.01f64..10.0, 3..20),
            eps in 0.0f64..2.0,
        ) {
            l.sort_by(|a, b| b.total_cmp(a));
            let k_max = l.len() - 1;
            for rule in [RatioRule::ArgMax, RatioRule::LargestExceeding] {
                let mut c = cfg(k_max, eps);
                c.rule = rule;
                let r = ratio_test(&l, &c).unwrap();
                prop_assert!(r.estimated_count <= k_max);
                prop_assert!(r.ratios.iter().all(|&x| x >= 1.0 - 1e-9));
            }
            prop_assert!(aic_estimate(&l, 50, k_max).unwrap() <= k_max);
        }
    }
}
