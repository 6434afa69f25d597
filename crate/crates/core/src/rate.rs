//! Gaussian-codebook communication rates: log-det rate of a fixed transmit
//! covariance, the heuristic rate of a covariance mixture, and a
//! water-filling baseline.
//!
//! These are deliberate stand-ins for the exact capacity of a randomized
//! input law, which needs a mutual-information maximization that is out of
//! scope here. They suffice to exhibit the tradeoff: the sensing-optimal
//! mixture's rate falls short of the water-filled rate at the same mean
//! power whenever the communication channel is not aligned with the sensing
//! eigenvector.

use std::fmt;

use crate::linalg::{CMatrix, LinalgError};
use crate::radar::CovarianceMixture;

#[derive(Debug, Clone, PartialEq)]
pub enum RateError {
    BadChannel(String),
    NotPsd { min_eigenvalue: f64 },
    Linalg(LinalgError),
}

impl fmt::Display for RateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateError::BadChannel(msg) => write!(f, "bad communication channel: {msg}"),
            RateError::NotPsd { min_eigenvalue } => write!(
                f,
                "covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})"
            ),
            RateError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RateError {}

impl From<LinalgError> for RateError {
    fn from(e: LinalgError) -> Self {
        RateError::Linalg(e)
    }
}

/// Downlink communication channel: receive matrix and noise level.
#[derive(Debug, Clone)]
pub struct CommChannel {
    pub h_c: CMatrix,
    pub noise_psd_c: f64,
}

impl CommChannel {
    pub fn validate(&self) -> Result<(), RateError> {
        if !(self.noise_psd_c > 0.0) {
            return Err(RateError::BadChannel(format!(
                "noise power spectral density must be positive, got {}",
                self.noise_psd_c
            )));
        }
        Ok(())
    }

    pub fn transmit_antennas(&self) -> usize {
        self.h_c.cols()
    }
}

fn check_psd(m: &CMatrix) -> Result<(), RateError> {
    let eig = m.hermitian_eigen()?;
    let trace: f64 = eig.values.iter().sum();
    if eig.min_value() < -1e-12 * trace.abs().max(1.0) {
        return Err(RateError::NotPsd {
            min_eigenvalue: eig.min_value(),
        });
    }
    Ok(())
}

/// Gaussian-codebook rate log2 det(I + H R H^H / noise) in bits per channel
/// use, via the Hermitian eigenvalues of the receive-side matrix.
pub fn gaussian_rate(channel: &CommChannel, r: &CMatrix) -> Result<f64, RateError> {
    channel.validate()?;
    check_psd(r)?;
    let hrh = channel
        .h_c
        .mul(r)
        .mul(&channel.h_c.dagger())
        .scale(1.0 / channel.noise_psd_c);
    let eig = hrh.hermitian_eigen()?;
    Ok(eig
        .values
        .iter()
        .map(|&l| (1.0 + l.max(0.0)).log2())
        .sum())
}

/// Heuristic rate of a covariance mixture: the weighted per-atom Gaussian
/// rates, plus (when flagged) the atom-index entropy amortized over the
/// block length as an optimistic bound on what signalling the atom choice
/// itself could add.
pub fn mixture_rate(
    channel: &CommChannel,
    mixture: &CovarianceMixture,
    include_atom_entropy: bool,
    snapshots: usize,
) -> Result<f64, RateError> {
    let mut rate = 0.0;
    for atom in &mixture.atoms {
        if atom.weight <= 0.0 {
            continue;
        }
        rate += atom.weight * gaussian_rate(channel, &atom.covariance)?;
    }
    if include_atom_entropy && snapshots > 0 {
        let entropy: f64 = mixture
            .atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| -a.weight * a.weight.log2())
            .sum();
        rate += entropy / snapshots as f64;
    }
    Ok(rate)
}

/// Water-filling over the channel's eigenmodes: the rate-optimal covariance
/// at total power `p` for this channel under Gaussian signalling. Returned
/// trace equals `p`; a identically-zero channel splits power evenly since
/// every allocation is equally useless.
pub fn water_filling(channel: &CommChannel, p: f64) -> Result<CMatrix, RateError> {
    channel.validate()?;
    let m = channel.h_c.cols();
    if p <= 0.0 {
        return Ok(CMatrix::zeros(m, m));
    }
    let gram = channel.h_c.dagger().mul(&channel.h_c);
    let eig = gram.hermitian_eigen()?;
    let gain_floor = 1e-14 * eig.values[0].abs().max(1.0);
    // Inverse gains of the usable modes, ascending (eigenvalues descend).
    let inv_gains: Vec<f64> = eig
        .values
        .iter()
        .filter(|&&g| g > gain_floor)
        .map(|&g| channel.noise_psd_c / g)
        .collect();
    if inv_gains.is_empty() {
        return Ok(CMatrix::identity(m).scale(p / m as f64));
    }

    // Raise the water level mode by mode until the budget is spent.
    let mut level = 0.0;
    let mut active = inv_gains.len();
    for k in 1..=inv_gains.len() {
        let candidate = (p + inv_gains[..k].iter().sum::<f64>()) / k as f64;
        if k == inv_gains.len() || candidate <= inv_gains[k] {
            level = candidate;
            active = k;
            break;
        }
    }

    let mut r = CMatrix::zeros(m, m);
    for (k, &a) in inv_gains.iter().enumerate().take(active) {
        let power = (level - a).max(0.0);
        if power == 0.0 {
            continue;
        }
        let u = eig.vectors.column(k);
        for i in 0..m {
            for j in 0..m {
                r[(i, j)] += u[i] * u[j].conj() * power;
            }
        }
    }
    Ok(r)
}
