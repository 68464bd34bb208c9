//! Seeded random streams and complex Gaussian sampling.
//!
//! Every trial owns a set of independent streams derived from
//! `(master_seed, domain, component)` for the key and the trial index for the
//! ChaCha stream id. Components (target gains, symbols, noise, ...) draw from
//! separate streams, so two runs that differ only in, say, the number of
//! sensing slots still see identical target gains for the same trial index.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Complex64 = Complex<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Which population a trial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Null-hypothesis trials used to calibrate the ratio threshold.
    Calibration,
    /// Fresh null-hypothesis trials used to measure the false-alarm rate.
    Null,
    /// Trials with targets present.
    Alternative,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Calibration => 0x43414c49,
            Domain::Null => 0x4e554c4c,
            Domain::Alternative => 0x414c5431,
        }
    }
}

/// Independent per-trial random quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    TargetGains,
    ClutterGains,
    Symbols,
    ClutterSymbols,
    Noise,
}

impl Component {
    fn tag(self) -> u64 {
        match self {
            Component::TargetGains => 1,
            Component::ClutterGains => 2,
            Component::Symbols => 3,
            Component::ClutterSymbols => 4,
            Component::Noise => 5,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed source for one trial.
#[derive(Debug, Clone, Copy)]
pub struct TrialSeed {
    master: u64,
    domain: Domain,
    trial: u64,
}

impl TrialSeed {
    pub fn new(master: u64, domain: Domain, trial: u64) -> Self {
        Self {
            master,
            domain,
            trial,
        }
    }

    pub fn trial(&self) -> u64 {
        self.trial
    }

    /// Stream for one component: key = splitmix(master ^ domain ^ component),
    /// ChaCha stream id = trial index.
    pub fn rng(&self, component: Component) -> ChaCha8Rng {
        let key = splitmix64(
            splitmix64(self.master ^ self.domain.tag().rotate_left(17)) ^ component.tag(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(self.trial);
        rng
    }
}

/// One draw of CN(0, variance).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(scale * re, scale * im)
}

/// Matrix with i.i.d. CN(0, variance) entries, filled column by column.
pub fn complex_normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_normal(rng, variance);
        }
    }
    m
}
