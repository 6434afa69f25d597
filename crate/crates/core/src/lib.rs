//! Sensing-optimal randomized transmit strategies.
//!
//! A deterministic transmitter pointing one covariance at a sensing target
//! leaves performance on the table whenever the detection curve is not
//! concave in the spent resource. This crate builds the machinery to do
//! better: sample a Pareto front of achievable (resource, performance)
//! pairs, take its lower convex envelope, and read the optimal randomized
//! strategy off the tangent at the resource budget. The strategy mixes at
//! most two designs, meets the budget in expectation exactly, and comes with
//! a KKT certificate that can be checked independently.
//!
//! The flagship application is MIMO radar detection under a mean power
//! constraint: below a closed-form tangent power the optimum time-shares
//! silence with bursts at that power, and a Monte Carlo harness validates
//! the resulting detector against its closed-form operating points.

// Validation sites use `!(x > 0.0)` so NaN fails the check too; the
// suggested `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod envelope;
pub mod grid;
pub mod linalg;
pub mod lp;
pub mod mixture;
pub mod montecarlo;
pub mod radar;
pub mod rate;
pub mod rng;
pub mod table;
pub mod verify;

pub use config::{ConfigError, ScenarioConfig};
pub use envelope::{
    lower_convex_envelope, tangent_set, Contact, EnvelopeError, EnvelopeResult, EnvelopeSegment,
    TangentSet,
};
pub use grid::{build_front, DesignEntry, DesignGrid, FrontPoint, FrontSample, GridError};
pub use linalg::{CMatrix, HermitianEigen, LinalgError};
pub use lp::{random_front_fuzz, solve_lp, FuzzReport, FuzzRow, LpError, LpSolution};
pub use mixture::{
    build_mixture, expected_performance, verify_kkt, KktCertificate, KktIssue, KktViolation,
    MixedStrategy, MixtureAtom, MixtureError,
};
pub use montecarlo::{
    estimate_pd, estimate_pd_mixture, estimate_pfa, ks_distance_exp1, statistic_samples,
    Hypothesis, McError, McReport, SimConfig, WaveformShaper, ZMoment,
};
pub use radar::{
    pd_closed_form, power_design_grid, principal_eigen, sample_powers,
    sensing_optimal_distribution, sensing_optimal_distribution_with_allocation, snr_of,
    threshold_for_pfa, CovarianceAtom, CovarianceMixture, DetectionCurve, OptimalCovariance,
    RadarError, RadarScenario,
};
pub use rate::{gaussian_rate, mixture_rate, water_filling, CommChannel, RateError};
pub use rng::trial_rng;
pub use table::{CheckRecord, FrontRecord, McRecord, PlanRecord, TableError};
pub use verify::{all_passed, run_verify, VerifyConfig};
