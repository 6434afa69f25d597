//! MIMO radar target-detection case study: closed-form detection curve,
//! eigenvector-optimal covariance, inflection and tangent powers, and the
//! sensing-optimal power time-sharing distribution.
//!
//! For a Rayleigh-fading point target the detection probability at transmit
//! covariance R depends on R only through the SNR
//! rho = (A^2 T / N0) * Tr(gram R), and equals pfa^(1/(1+rho)). Concentrating
//! power on the principal eigenvector of the gram matrix maximizes rho per
//! watt, collapsing the problem to a scalar power curve
//! f(P) = pfa^(1/(1+alpha*P)). Below the tangent power P_t that curve is
//! beaten by time-sharing between silence and P_t; at and above P_t the
//! deterministic full-power design is optimal.

use std::fmt;

use crate::grid::{DesignEntry, DesignGrid};
use crate::linalg::{CMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq)]
pub enum RadarError {
    BadGram(String),
    NotPsd { min_eigenvalue: f64 },
    BadAmplitude { value: f64 },
    BadSnapshots,
    BadNoise { value: f64 },
    BadPfa { value: f64 },
    BadPower { value: f64 },
    BadAlpha { value: f64 },
    TargetUnobservable,
    TangentBracketFailure { reached: f64 },
}

impl fmt::Display for RadarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadarError::BadGram(msg) => write!(f, "bad gram matrix: {msg}"),
            RadarError::NotPsd { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")
            }
            RadarError::BadAmplitude { value } => {
                write!(f, "mean square amplitude must be positive, got {value}")
            }
            RadarError::BadSnapshots => write!(f, "snapshot count must be positive"),
            RadarError::BadNoise { value } => {
                write!(f, "noise power spectral density must be positive, got {value}")
            }
            RadarError::BadPfa { value } => {
                write!(f, "false alarm probability must lie strictly in (0, 1), got {value}")
            }
            RadarError::BadPower { value } => {
                write!(f, "power budget must be nonnegative, got {value}")
            }
            RadarError::BadAlpha { value } => {
                write!(f, "curve slope parameter must be positive, got {value}")
            }
            RadarError::TargetUnobservable => {
                write!(f, "target unobservable: covariance puts no power into the target channel")
            }
            RadarError::TangentBracketFailure { reached } => {
                write!(f, "tangent bracket failure: no sign change up to power {reached}")
            }
        }
    }
}

impl std::error::Error for RadarError {}

impl From<LinalgError> for RadarError {
    fn from(e: LinalgError) -> Self {
        RadarError::BadGram(e.to_string())
    }
}

/// Detection scenario: sensing-channel gram matrix H_s^H H_s plus the scalar
/// model parameters.
#[derive(Debug, Clone)]
pub struct RadarScenario {
    pub gram: CMatrix,
    pub mean_square_amp: f64,
    pub snapshots: usize,
    pub noise_psd: f64,
    pub pfa: f64,
    pub power_budget: f64,
}

impl RadarScenario {
    pub fn validate(&self) -> Result<(), RadarError> {
        if !self.gram.is_square() {
            return Err(RadarError::BadGram(format!(
                "{}x{} is not square",
                self.gram.rows(),
                self.gram.cols()
            )));
        }
        let eig = self.gram.hermitian_eigen()?;
        let trace: f64 = eig.values.iter().sum();
        if eig.min_value() < -1e-12 * trace.abs().max(1.0) {
            return Err(RadarError::NotPsd {
                min_eigenvalue: eig.min_value(),
            });
        }
        if !(self.mean_square_amp > 0.0) {
            return Err(RadarError::BadAmplitude {
                value: self.mean_square_amp,
            });
        }
        if self.snapshots == 0 {
            return Err(RadarError::BadSnapshots);
        }
        if !(self.noise_psd > 0.0) {
            return Err(RadarError::BadNoise {
                value: self.noise_psd,
            });
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(RadarError::BadPfa { value: self.pfa });
        }
        if !(self.power_budget >= 0.0) || !self.power_budget.is_finite() {
            return Err(RadarError::BadPower {
                value: self.power_budget,
            });
        }
        Ok(())
    }

    /// The SNR per unit of Tr(gram R): A^2 T / N0.
    pub fn snr_scale(&self) -> f64 {
        self.mean_square_amp * self.snapshots as f64 / self.noise_psd
    }

    pub fn antennas(&self) -> usize {
        self.gram.rows()
    }
}

fn check_psd(m: &CMatrix) -> Result<(), RadarError> {
    let eig = m.hermitian_eigen()?;
    let trace: f64 = eig.values.iter().sum();
    if eig.min_value() < -1e-12 * trace.abs().max(1.0) {
        return Err(RadarError::NotPsd {
            min_eigenvalue: eig.min_value(),
        });
    }
    Ok(())
}

/// Largest eigenvalue of the gram matrix with its eigenspace. Multiplicity
/// counts eigenvalues within relative tolerance 1e-8 of the maximum; the
/// basis columns span that eigenspace.
pub fn principal_eigen(gram: &CMatrix) -> Result<OptimalCovariance, RadarError> {
    check_psd(gram)?;
    let eig = gram.hermitian_eigen()?;
    let lambda_max = eig.values[0];
    let mult = eig
        .values
        .iter()
        .take_while(|&&l| lambda_max - l <= 1e-8 * lambda_max.abs().max(1e-300))
        .count()
        .max(1);
    let n = gram.rows();
    let mut basis = CMatrix::zeros(n, mult);
    for k in 0..mult {
        for i in 0..n {
            basis[(i, k)] = eig.vectors[(i, k)];
        }
    }
    Ok(OptimalCovariance {
        lambda_max,
        basis,
        multiplicity: mult,
        power: 0.0,
    })
}

/// Principal eigenspace of a gram matrix with a power level attached; the
/// sensing-optimal covariance is `power` times a rank-one projector inside
/// this eigenspace.
#[derive(Debug, Clone)]
pub struct OptimalCovariance {
    pub lambda_max: f64,
    pub basis: CMatrix,
    pub multiplicity: usize,
    pub power: f64,
}

impl OptimalCovariance {
    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    /// Covariance with the given diagonal power split over the basis columns.
    /// `allocation` entries must be nonnegative and sum to 1; every split
    /// yields the same SNR, so the default takes the first column only.
    pub fn covariance_with_allocation(&self, allocation: &[f64]) -> CMatrix {
        let n = self.basis.rows();
        let mut r = CMatrix::zeros(n, n);
        for (k, &a) in allocation.iter().enumerate().take(self.multiplicity) {
            if a == 0.0 {
                continue;
            }
            let u = self.basis.column(k);
            for i in 0..n {
                for j in 0..n {
                    r[(i, j)] += u[i] * u[j].conj() * (a * self.power);
                }
            }
        }
        r
    }

    pub fn covariance(&self) -> CMatrix {
        let mut alloc = vec![0.0; self.multiplicity];
        alloc[0] = 1.0;
        self.covariance_with_allocation(&alloc)
    }
}

/// SNR of a transmit covariance: (A^2 T / N0) * Tr(gram R).
pub fn snr_of(scenario: &RadarScenario, r: &CMatrix) -> Result<f64, RadarError> {
    check_psd(r)?;
    Ok((scenario.snr_scale() * scenario.gram.trace_of_product(r)).max(0.0))
}

/// Detection probability at a given SNR under the constant false-alarm-rate
/// test: pfa^(1/(1+rho)).
pub fn pd_closed_form(rho: f64, pfa: f64) -> f64 {
    pfa.powf(1.0 / (1.0 + rho))
}

/// Detector threshold holding the false alarm rate at the scenario's pfa:
/// -T N0 Tr(gram R) ln(pfa).
pub fn threshold_for_pfa(scenario: &RadarScenario, r: &CMatrix) -> Result<f64, RadarError> {
    let tr = scenario.gram.trace_of_product(r);
    let scale = scenario.gram.frobenius_norm() * r.frobenius_norm();
    if tr <= 1e-14 * scale.max(1e-300) {
        return Err(RadarError::TargetUnobservable);
    }
    Ok(-(scenario.snapshots as f64) * scenario.noise_psd * tr * scenario.pfa.ln())
}

/// Scalar detection curve f(P) = pfa^(1/(1+alpha P)) with its cached
/// inflection and tangent powers.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionCurve {
    pub alpha: f64,
    pub pfa: f64,
    p_star: f64,
    p_tangent: f64,
    globally_concave: bool,
}

impl DetectionCurve {
    pub fn new(alpha: f64, pfa: f64) -> Result<Self, RadarError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(RadarError::BadAlpha { value: alpha });
        }
        if !(pfa > 0.0 && pfa < 1.0) {
            return Err(RadarError::BadPfa { value: pfa });
        }
        let mut curve = DetectionCurve {
            alpha,
            pfa,
            p_star: 0.0,
            p_tangent: 0.0,
            globally_concave: false,
        };
        let (p_star, concave) = solve_inflection(&curve);
        curve.p_star = p_star;
        curve.globally_concave = concave;
        curve.p_tangent = if concave { 0.0 } else { solve_tangent(&curve)? };
        Ok(curve)
    }

    pub fn pd(&self, p: f64) -> f64 {
        pd_closed_form(self.alpha * p, self.pfa)
    }

    pub fn slope(&self, p: f64) -> f64 {
        let l = -self.pfa.ln();
        let s = 1.0 + self.alpha * p;
        self.pd(p) * l * self.alpha / (s * s)
    }

    pub fn curvature(&self, p: f64) -> f64 {
        let l = -self.pfa.ln();
        let s = 1.0 + self.alpha * p;
        self.pd(p) * l * self.alpha * self.alpha / s.powi(4) * (l - 2.0 * s)
    }

    /// Power where the curve switches from convex to concave; 0 when the
    /// curve is concave everywhere (pfa >= e^-2).
    pub fn inflection_power(&self) -> f64 {
        self.p_star
    }

    /// Power where the chord from (0, f(0)) touches the curve tangentially;
    /// 0 when the curve is globally concave.
    pub fn tangent_power(&self) -> f64 {
        self.p_tangent
    }

    pub fn globally_concave(&self) -> bool {
        self.globally_concave
    }

    /// Tangency residual f(P) - P f'(P) - f(0); its root beyond the
    /// inflection is the tangent power.
    fn tangent_residual(&self, p: f64) -> f64 {
        self.pd(p) - p * self.slope(p) - self.pfa
    }
}

/// Bisection for the curvature sign change. The curvature at P = 0 has the
/// sign of -ln(pfa) - 2; when that is nonpositive the curve is concave on
/// the whole half-line and the flag is set instead.
fn solve_inflection(curve: &DetectionCurve) -> (f64, bool) {
    if curve.curvature(0.0) <= 0.0 {
        return (0.0, true);
    }
    let mut hi = 1.0 / curve.alpha;
    while curve.curvature(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if curve.curvature(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Bisection for the tangency residual root on [P_*, hi], expanding hi
/// geometrically until the residual turns positive. The residual is negative
/// at the inflection and tends to 1 - pfa, so a root exists; expansion past
/// 1000x the inflection power signals a malformed curve.
fn solve_tangent(curve: &DetectionCurve) -> Result<f64, RadarError> {
    let p_star = curve.p_star;
    let mut lo = p_star;
    let mut hi = 2.0 * p_star.max(1e-6 / curve.alpha);
    let cap = 1e3 * p_star.max(1e-6 / curve.alpha);
    while curve.tangent_residual(hi) < 0.0 {
        hi *= 2.0;
        if hi > cap {
            return Err(RadarError::TangentBracketFailure { reached: hi });
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if curve.tangent_residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_t = 0.5 * (lo + hi);
    debug_assert!(curve.tangent_residual(p_t).abs() <= 1e-10);
    Ok(p_t)
}

/// One covariance atom of the sensing-optimal strategy.
#[derive(Debug, Clone)]
pub struct CovarianceAtom {
    pub weight: f64,
    pub covariance: CMatrix,
    pub power: f64,
    pub rho: f64,
    pub pd: f64,
}

/// Sensing-optimal randomized transmit strategy for a scenario.
#[derive(Debug, Clone)]
pub struct CovarianceMixture {
    pub atoms: Vec<CovarianceAtom>,
    pub power_budget: f64,
    pub inflection_power: f64,
    pub tangent_power: f64,
    pub expected_pd: f64,
    pub deterministic_pd: f64,
}

impl CovarianceMixture {
    pub fn mean_power(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.power).sum()
    }
}

/// The sensing-optimal distribution over transmit covariances. With budget P
/// at or above the tangent power the strategy is deterministic: the full
/// budget on the principal eigenvector every block. Below it, the optimum
/// time-shares silence with bursts at exactly the tangent power, with the
/// burst probability P/P_t fixed by the mean-power constraint.
pub fn sensing_optimal_distribution(
    scenario: &RadarScenario,
) -> Result<CovarianceMixture, RadarError> {
    sensing_optimal_distribution_with_allocation(scenario, None)
}

/// Same, with an explicit diagonal power split over the principal eigenspace
/// basis (only meaningful when the top eigenvalue is degenerate; every split
/// gives the same SNR). `None` puts everything on the first basis vector.
pub fn sensing_optimal_distribution_with_allocation(
    scenario: &RadarScenario,
    allocation: Option<&[f64]>,
) -> Result<CovarianceMixture, RadarError> {
    scenario.validate()?;
    let eigen = principal_eigen(&scenario.gram)?;
    let alpha = scenario.snr_scale() * eigen.lambda_max;
    if alpha <= 0.0 {
        return Err(RadarError::TargetUnobservable);
    }
    let curve = DetectionCurve::new(alpha, scenario.pfa)?;
    let p = scenario.power_budget;
    let p_t = curve.tangent_power();

    let default_alloc = {
        let mut a = vec![0.0; eigen.multiplicity];
        a[0] = 1.0;
        a
    };
    let alloc = allocation.unwrap_or(&default_alloc);

    let atom = |power: f64| -> CovarianceAtom {
        let cov = eigen.clone().with_power(power).covariance_with_allocation(alloc);
        let rho = alpha * power;
        CovarianceAtom {
            weight: 0.0,
            covariance: cov,
            power,
            rho,
            pd: pd_closed_form(rho, scenario.pfa),
        }
    };

    let atoms = if p >= p_t || curve.globally_concave() {
        let mut a = atom(p);
        a.weight = 1.0;
        vec![a]
    } else {
        let w_burst = p / p_t;
        let mut silence = atom(0.0);
        silence.weight = 1.0 - w_burst;
        let mut burst = atom(p_t);
        burst.weight = w_burst;
        vec![silence, burst]
    };

    let expected_pd = atoms.iter().map(|a| a.weight * a.pd).sum();
    Ok(CovarianceMixture {
        atoms,
        power_budget: p,
        inflection_power: curve.inflection_power(),
        tangent_power: p_t,
        expected_pd,
        deterministic_pd: curve.pd(p),
    })
}

/// Design grid over transmit powers for the envelope machinery: cost is the
/// power, performance is -f(P) (detection is maximized, the front machinery
/// minimizes).
pub fn power_design_grid(curve: &DetectionCurve, powers: &[f64]) -> DesignGrid {
    let entries = powers
        .iter()
        .enumerate()
        .map(|(k, &p)| DesignEntry {
            id: format!("P{k:04}"),
            cost: p,
            perf: -curve.pd(p),
        })
        .collect();
    DesignGrid::new(entries)
}

/// Evenly spaced powers 0..=p_max, endpoints included.
pub fn sample_powers(p_max: f64, resolution: usize) -> Vec<f64> {
    if resolution <= 1 {
        return vec![0.0];
    }
    let n = resolution - 1;
    (0..=n).map(|k| p_max * k as f64 / n as f64).collect()
}
