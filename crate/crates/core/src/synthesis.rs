//! Received-signal assembly, sample covariance and Hermitian eigenvalues.

use std::io::Write;

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::error::{Error, Result};
use crate::precoding::{BeamformingPlan, Schedule};
use crate::random::{complex_normal, complex_normal_matrix, CMatrix, Complex64};

/// One trial's observation: `Y`, `R = Y Y^H / T_s` and its eigenvalues in
/// non-increasing order.
#[derive(Debug, Clone)]
pub struct ObservationBatch {
    pub received: CMatrix,
    pub sample_covariance: CMatrix,
    pub eigenvalues: Vec<f64>,
}

impl ObservationBatch {
    pub fn from_received(received: CMatrix) -> Result<Self> {
        let sample_covariance = sample_covariance(&received)?;
        let eigenvalues = hermitian_eigenvalues(&sample_covariance)?;
        Ok(Self {
            received,
            sample_covariance,
            eigenvalues,
        })
    }

    /// Writes `Y` and the eigenvalues as tidy rows
    /// `trial,kind,row,col,re,im` (`kind` is `y` or `eig`).
    pub fn write_debug_rows<W: Write>(&self, trial: u64, out: &mut csv::Writer<W>) -> Result<()> {
        for c in 0..self.received.ncols() {
            for r in 0..self.received.nrows() {
                let z = self.received[(r, c)];
                out.write_record([
                    trial.to_string(),
                    "y".into(),
                    r.to_string(),
                    c.to_string(),
                    z.re.to_string(),
                    z.im.to_string(),
                ])?;
            }
        }
        for (i, l) in self.eigenvalues.iter().enumerate() {
            out.write_record([
                trial.to_string(),
                "eig".into(),
                i.to_string(),
                "0".into(),
                l.to_string(),
                "0".into(),
            ])?;
        }
        Ok(())
    }
}

/// Header matching [`ObservationBatch::write_debug_rows`].
pub const DEBUG_DUMP_HEADER: [&str; 6] = ["trial", "kind", "row", "col", "re", "im"];

/// One CN(0, 1) symbol per slot of the frame.
pub fn draw_symbols<R: Rng + ?Sized>(total_slots: usize, rng: &mut R) -> Vec<Complex64> {
    (0..total_slots).map(|_| complex_normal(rng, 1.0)).collect()
}

/// Beamformed sensing signal `X`, one column per slot of the sensing window:
/// column `t` is `sqrt(P_s) w[t] s[t]`.
///
/// `symbols` holds one symbol per frame slot so that the symbol of slot `t`
/// does not depend on the mode.
pub fn synthesize_tx_with_symbols(
    plan: &BeamformingPlan,
    schedule: &Schedule,
    symbols: &[Complex64],
) -> Result<CMatrix> {
    if symbols.len() != schedule.len() {
        return Err(Error::dimension("synthesize_tx symbols", schedule.len(), symbols.len()));
    }
    let window = schedule.sensing_slots();
    let amp = plan.sensing_power.sqrt();
    let mut x = CMatrix::zeros(plan.tx_antennas, window.len());
    for (col, &t) in window.iter().enumerate() {
        let w = plan.precoder_for(schedule.labels()[t]);
        x.set_column(col, &(w * (symbols[t] * amp)));
    }
    Ok(x)
}

pub fn synthesize_tx<R: Rng + ?Sized>(
    plan: &BeamformingPlan,
    schedule: &Schedule,
    rng: &mut R,
) -> Result<CMatrix> {
    let symbols = draw_symbols(schedule.len(), rng);
    synthesize_tx_with_symbols(plan, schedule, &symbols)
}

/// Clutter illumination `X~` with i.i.d. CN(0, `power`) entries.
pub fn synthesize_clutter_tx<R: Rng + ?Sized>(
    power: f64,
    tx_antennas: usize,
    len: usize,
    rng: &mut R,
) -> CMatrix {
    complex_normal_matrix(rng, tx_antennas, len, power)
}

/// `Y = H X + H_cl X~ + V`.
pub fn received_matrix(
    h: &CMatrix,
    x: &CMatrix,
    h_cl: &CMatrix,
    x_cl: &CMatrix,
    v: &CMatrix,
) -> Result<CMatrix> {
    let (n, t) = v.shape();
    if h.nrows() != n || h_cl.nrows() != n {
        return Err(Error::dimension(
            "received_matrix rows",
            n,
            format!("H: {}, H_cl: {}", h.nrows(), h_cl.nrows()),
        ));
    }
    if h.ncols() != x.nrows() || h_cl.ncols() != x_cl.nrows() {
        return Err(Error::dimension(
            "received_matrix inner",
            format!("{} / {}", h.ncols(), h_cl.ncols()),
            format!("{} / {}", x.nrows(), x_cl.nrows()),
        ));
    }
    if x.ncols() != t || x_cl.ncols() != t {
        return Err(Error::dimension(
            "received_matrix columns",
            t,
            format!("X: {}, X_cl: {}", x.ncols(), x_cl.ncols()),
        ));
    }
    let mut y = v.clone();
    y.gemm(Complex64::new(1.0, 0.0), h, x, Complex64::new(1.0, 0.0));
    y.gemm(Complex64::new(1.0, 0.0), h_cl, x_cl, Complex64::new(1.0, 0.0));
    Ok(y)
}

/// `R = Y Y^H / T_s`.
pub fn sample_covariance(y: &CMatrix) -> Result<CMatrix> {
    let t = y.ncols();
    if t == 0 {
        return Err(Error::Numerical("sample covariance needs at least one column".into()));
    }
    Ok(y * y.adjoint() * Complex64::new(1.0 / t as f64, 0.0))
}

const HERMITIAN_TOL: f64 = 1e-10;

fn symmetrized(r: &CMatrix) -> Result<CMatrix> {
    if !r.is_square() {
        return Err(Error::dimension("hermitian_eigenvalues", "square", format!("{:?}", r.shape())));
    }
    let scale = r.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let n = r.nrows();
    for i in 0..n {
        for j in i..n {
            let d = (r[(i, j)] - r[(j, i)].conj()).norm();
            if d > HERMITIAN_TOL * scale {
                return Err(Error::Numerical(format!(
                    "matrix is not Hermitian: |R[{i},{j}] - conj(R[{j},{i}])| = {d:e}"
                )));
            }
        }
    }
    Ok((r + r.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Real eigenvalues of a Hermitian matrix, sorted non-increasing.
pub fn hermitian_eigenvalues(r: &CMatrix) -> Result<Vec<f64>> {
    let sym = symmetrized(r)?;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigenvalues (non-increasing) and matching unit eigenvectors as columns.
pub fn hermitian_eigen(r: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let sym = symmetrized(r)?;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>(),
    );
    Ok((values, vectors))
}
