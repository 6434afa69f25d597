//! Verification suites behind the `verify` command: LP-oracle fuzz, KKT
//! certification of the power plans, rejection of a corrupted mixture,
//! eigen-optimality spot checks, detection-curve landmark consistency, and
//! Monte Carlo moment checks. Each suite reports one pass/fail row.

use num_complex::Complex64;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::envelope::lower_convex_envelope;
use crate::grid::build_front;
use crate::linalg::CMatrix;
use crate::lp::random_front_fuzz;
use crate::mixture::{
    build_mixture, expected_performance, verify_kkt, KktViolation, MixedStrategy, MixtureAtom,
};
use crate::montecarlo::{estimate_pd, estimate_pd_mixture, estimate_pfa, SimConfig};
use crate::radar::{
    power_design_grid, principal_eigen, sample_powers, sensing_optimal_distribution,
    DetectionCurve, RadarScenario,
};
use crate::rng::trial_rng;
use crate::table::CheckRecord;

const EIGEN_STREAM: u64 = 91;
const CURVE_STREAM: u64 = 92;

/// Knobs for the verification run. The defaults finish in well under a
/// minute and are deterministic for a fixed seed.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub fuzz_cases: usize,
    pub fuzz_grid_size: usize,
    pub eigen_scenarios: usize,
    pub eigen_covariances: usize,
    pub curve_cases: usize,
    pub mc_trials: usize,
    /// Corrupt a certified plan on purpose and certify the corrupted copy,
    /// demonstrating the failure path end to end.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            fuzz_cases: 300,
            fuzz_grid_size: 60,
            eigen_scenarios: 50,
            eigen_covariances: 100,
            curve_cases: 20,
            mc_trials: 20_000,
            inject_fault: false,
        }
    }
}

pub fn all_passed(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

/// Run every suite against the scenario and collect one row per check.
pub fn run_verify(scenario: &RadarScenario, cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    out.push(check_lp_fuzz(cfg));
    match scenario_curve(scenario) {
        Ok(curve) => {
            out.push(check_plan_structure(scenario, &curve));
            out.extend(check_plan_kkt(scenario, &curve, cfg.inject_fault));
        }
        Err(e) => out.push(CheckRecord {
            name: "plan-structure".into(),
            pass: false,
            detail: format!("scenario rejected: {e}"),
        }),
    }
    out.push(check_eigen_optimality(cfg));
    out.push(check_curve_landmarks(cfg));
    out.extend(check_monte_carlo(scenario, cfg));
    out
}

fn scenario_curve(scenario: &RadarScenario) -> Result<DetectionCurve, String> {
    scenario.validate().map_err(|e| e.to_string())?;
    let eigen = principal_eigen(&scenario.gram).map_err(|e| e.to_string())?;
    let alpha = scenario.snr_scale() * eigen.lambda_max;
    if alpha <= 0.0 {
        return Err("target channel carries no power".into());
    }
    DetectionCurve::new(alpha, scenario.pfa).map_err(|e| e.to_string())
}

fn check_lp_fuzz(cfg: &VerifyConfig) -> CheckRecord {
    let report = random_front_fuzz(cfg.seed, cfg.fuzz_cases, cfg.fuzz_grid_size);
    let detail = match &report.first_failure {
        None => format!("{} random fronts matched the exhaustive oracle", report.cases),
        Some((case, why)) => format!("case {case}: {why}"),
    };
    CheckRecord {
        name: "lp-oracle-fuzz".into(),
        pass: report.all_passed(),
        detail,
    }
}

/// Budgets that exercise both sides of the tangent power plus the scenario's
/// own budget. A globally concave curve has no tangent landmark; the sweep
/// then brackets the scenario budget instead.
fn sweep_budgets(scenario: &RadarScenario, curve: &DetectionCurve) -> Vec<f64> {
    let p_ref = if curve.globally_concave() {
        scenario.power_budget.max(1.0 / curve.alpha)
    } else {
        curve.tangent_power()
    };
    let mut budgets = vec![0.11 * p_ref, 0.74 * p_ref, 1.6 * p_ref, scenario.power_budget];
    budgets.retain(|b| b.is_finite());
    budgets.sort_by(f64::total_cmp);
    budgets.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    budgets
}

fn with_budget(scenario: &RadarScenario, budget: f64) -> RadarScenario {
    let mut s = scenario.clone();
    s.power_budget = budget;
    s
}

fn check_plan_structure(scenario: &RadarScenario, curve: &DetectionCurve) -> CheckRecord {
    let p_t = curve.tangent_power();
    let mut failures = Vec::new();
    for budget in sweep_budgets(scenario, curve) {
        let mixture = match sensing_optimal_distribution(&with_budget(scenario, budget)) {
            Ok(m) => m,
            Err(e) => {
                failures.push(format!("budget {budget:.4}: {e}"));
                continue;
            }
        };
        let weight_sum: f64 = mixture.atoms.iter().map(|a| a.weight).sum();
        if (weight_sum - 1.0).abs() > 1e-12 {
            failures.push(format!("budget {budget:.4}: weights sum to {weight_sum}"));
        }
        let mean = mixture.mean_power();
        if (mean - budget).abs() > 1e-12 * budget.abs().max(1.0) {
            failures.push(format!(
                "budget {budget:.4}: mean power {mean} misses the budget"
            ));
        }
        let time_shares = !curve.globally_concave() && budget < p_t;
        if time_shares {
            let powers: Vec<f64> = mixture.atoms.iter().map(|a| a.power).collect();
            if powers != [0.0, p_t] {
                failures.push(format!(
                    "budget {budget:.4}: atoms at {powers:?}, expected silence and the tangent power"
                ));
            }
            if mixture.expected_pd <= mixture.deterministic_pd {
                failures.push(format!(
                    "budget {budget:.4}: no randomization gain ({} vs {})",
                    mixture.expected_pd, mixture.deterministic_pd
                ));
            }
        } else if mixture.atoms.len() != 1 || mixture.atoms[0].power != budget {
            failures.push(format!(
                "budget {budget:.4}: expected the single full-power atom"
            ));
        }
    }
    CheckRecord {
        name: "plan-structure".into(),
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("tangent power {:.6}, every plan matched the two-regime shape", p_t)
        } else {
            failures.join("; ")
        },
    }
}

/// Power grid for certifying a plan: an even sweep plus the exact landmark
/// powers so the hull contacts land where the plan puts its atoms.
fn certification_grid(curve: &DetectionCurve, budget: f64) -> crate::grid::DesignGrid {
    let p_t = curve.tangent_power();
    let p_max = (2.0 * p_t).max(1.5 * budget).max(1.0);
    let mut powers = sample_powers(p_max, 201);
    if p_t > 0.0 {
        powers.push(p_t);
    }
    powers.push(budget);
    power_design_grid(curve, &powers)
}

/// Move a tenth of the probability onto the costliest design, breaking the
/// mean-power constraint while keeping the weights normalized.
fn corrupt_mixture(mix: &MixedStrategy, grid: &crate::grid::DesignGrid) -> MixedStrategy {
    let costliest = grid
        .entries
        .iter()
        .max_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("grid has entries");
    let mut out = mix.clone();
    for atom in &mut out.atoms {
        atom.weight *= 0.9;
    }
    out.atoms.push(MixtureAtom {
        weight: 0.1,
        xi: costliest.cost,
        designs: vec![(costliest.id.clone(), 1.0)],
    });
    out
}

fn check_plan_kkt(
    scenario: &RadarScenario,
    curve: &DetectionCurve,
    inject_fault: bool,
) -> Vec<CheckRecord> {
    let mut failures = Vec::new();
    let mut rejection: Option<CheckRecord> = None;
    let mut injected: Option<CheckRecord> = None;

    for budget in sweep_budgets(scenario, curve) {
        let grid = certification_grid(curve, budget);
        let front = match build_front(&grid, grid.default_bin_tol()) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("budget {budget:.4}: front failed: {e}"));
                continue;
            }
        };
        let env = match lower_convex_envelope(&front) {
            Ok(e) => e,
            Err(e) => {
                failures.push(format!("budget {budget:.4}: envelope failed: {e}"));
                continue;
            }
        };
        let mix = match build_mixture(&env, &front, budget) {
            Ok(m) => m,
            Err(e) => {
                failures.push(format!("budget {budget:.4}: mixture failed: {e}"));
                continue;
            }
        };
        if let Err(v) = verify_kkt(&grid, &mix, budget) {
            failures.push(format!("budget {budget:.4}: {v}"));
            continue;
        }
        // The grid plan and the closed-form plan price detection identically.
        if let (Ok(value), Ok(exact)) = (
            expected_performance(&mix, &front),
            sensing_optimal_distribution(&with_budget(scenario, budget)),
        ) {
            let gap = (-value - exact.expected_pd).abs();
            if gap > 1e-9 * exact.expected_pd.abs().max(1.0) {
                failures.push(format!(
                    "budget {budget:.4}: grid value {} vs closed form {}",
                    -value, exact.expected_pd
                ));
            }
        }

        if rejection.is_none() {
            let bad = corrupt_mixture(&mix, &grid);
            rejection = Some(match verify_kkt(&grid, &bad, budget) {
                Err(v) => CheckRecord {
                    name: "kkt-rejection".into(),
                    pass: true,
                    detail: format!("corrupted plan rejected: {}", brief_violation(&v)),
                },
                Ok(_) => CheckRecord {
                    name: "kkt-rejection".into(),
                    pass: false,
                    detail: format!("corrupted plan at budget {budget:.4} was certified"),
                },
            });
            if inject_fault {
                let verdict = verify_kkt(&grid, &bad, budget);
                injected = Some(CheckRecord {
                    name: "injected-fault".into(),
                    pass: verdict.is_ok(),
                    detail: match verdict {
                        Err(v) => brief_violation(&v),
                        Ok(_) => "injected fault was not caught".into(),
                    },
                });
            }
        }
    }

    let mut out = vec![CheckRecord {
        name: "plan-kkt".into(),
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "every plan certified against its power grid".into()
        } else {
            failures.join("; ")
        },
    }];
    out.extend(rejection);
    out.extend(injected);
    out
}

/// First violated condition plus a count; a corrupted dense grid trips
/// hundreds of dominance checks and the full list drowns the table.
fn brief_violation(v: &KktViolation) -> String {
    match v.issues.as_slice() {
        [] => "mixture fails KKT certification".into(),
        [only] => format!("mixture fails KKT certification: {only}"),
        [first, rest @ ..] => format!(
            "mixture fails KKT certification: {first} (and {} more issues)",
            rest.len()
        ),
    }
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(Complex64::new(re, im));
    }
    let a = CMatrix::from_rows(n, n, &entries);
    a.mul(&a.dagger())
}

fn check_eigen_optimality(cfg: &VerifyConfig) -> CheckRecord {
    let mut worst_excess = f64::NEG_INFINITY;
    for case in 0..cfg.eigen_scenarios as u64 {
        let mut rng = trial_rng(cfg.seed, EIGEN_STREAM, case);
        let n = 2 + (case % 4) as usize;
        let gram = random_psd(&mut rng, n);
        let power = 0.5 + 4.0 * rng.random::<f64>();
        let opt = match principal_eigen(&gram) {
            Ok(e) => e.with_power(power).covariance(),
            Err(e) => {
                return CheckRecord {
                    name: "eigen-optimality".into(),
                    pass: false,
                    detail: format!("case {case}: {e}"),
                }
            }
        };
        let tr_opt = gram.trace_of_product(&opt);
        for _ in 0..cfg.eigen_covariances {
            let mut r = random_psd(&mut rng, n);
            let tr = r.trace().re;
            r = r.scale(power / tr);
            let excess = gram.trace_of_product(&r) - tr_opt;
            worst_excess = worst_excess.max(excess / tr_opt.abs().max(1.0));
        }
    }
    CheckRecord {
        name: "eigen-optimality".into(),
        pass: worst_excess <= 1e-9,
        detail: format!(
            "{} grams x {} covariances, worst relative excess {worst_excess:.3e}",
            cfg.eigen_scenarios, cfg.eigen_covariances
        ),
    }
}

fn check_curve_landmarks(cfg: &VerifyConfig) -> CheckRecord {
    let mut failures = Vec::new();
    for case in 0..cfg.curve_cases as u64 {
        let mut rng = trial_rng(cfg.seed, CURVE_STREAM, case);
        let alpha = (rng.random_range(-3.0..3.0f64)).exp();
        // ln pfa below -2 keeps the curve in the convex-then-concave regime.
        let ln_pfa = -rng.random_range(2.05..18.0f64);
        let pfa = ln_pfa.exp();
        let curve = match DetectionCurve::new(alpha, pfa) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let analytic = (-pfa.ln() - 2.0) / (2.0 * alpha);
        let numeric = curve.inflection_power();
        if (numeric - analytic).abs() > 1e-6 * analytic.abs().max(1e-12) {
            failures.push(format!(
                "case {case}: inflection {numeric} vs analytic {analytic}"
            ));
        }
        if curve.globally_concave() {
            failures.push(format!("case {case}: flagged concave despite pfa < e^-2"));
            continue;
        }
        let p_t = curve.tangent_power();
        if p_t <= numeric {
            failures.push(format!("case {case}: tangent {p_t} not beyond inflection"));
        }
        let residual = curve.pd(p_t) - p_t * curve.slope(p_t) - pfa;
        if residual.abs() > 1e-9 {
            failures.push(format!("case {case}: tangency residual {residual:.3e}"));
        }
    }
    CheckRecord {
        name: "curve-landmarks".into(),
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "{} random curves: numeric inflection matches the closed form, tangency holds",
                cfg.curve_cases
            )
        } else {
            failures.join("; ")
        },
    }
}

/// Monte Carlo suites. The detector statistic is exponential under both
/// hypotheses, so the sample means are checked against their closed forms;
/// the empirical rates are checked at desk scale (the false alarm target is
/// raised to 1e-2 when the scenario asks for rarer alarms, since rarer
/// events need far more trials than a verification pass budgets for).
fn check_monte_carlo(scenario: &RadarScenario, cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let mut out = Vec::new();

    let power = if scenario.power_budget > 0.0 {
        scenario.power_budget
    } else {
        1.0
    };
    let desk_pfa = scenario.pfa.max(1e-2);
    let mut desk = with_budget(scenario, power);
    desk.pfa = desk_pfa;

    let mixture = match sensing_optimal_distribution(&desk) {
        Ok(m) => m,
        Err(e) => {
            return vec![CheckRecord {
                name: "mc-moments".into(),
                pass: false,
                detail: format!("scenario rejected: {e}"),
            }]
        }
    };
    let eigen = match principal_eigen(&desk.gram) {
        Ok(e) => e,
        Err(e) => {
            return vec![CheckRecord {
                name: "mc-moments".into(),
                pass: false,
                detail: format!("gram rejected: {e}"),
            }]
        }
    };
    let cov = eigen.with_power(power).covariance();
    let sim = SimConfig {
        scenario: desk.clone(),
        covariance: cov,
        trials: cfg.mc_trials,
        master_seed: cfg.seed,
    };

    match estimate_pfa(&sim) {
        Ok(report) => {
            let sigma =
                (report.target_prob * (1.0 - report.target_prob) / report.trials as f64).sqrt();
            let dev = (report.empirical_prob - report.target_prob).abs();
            let moment = report.z_mean_h0.expect("null run carries the H0 moment");
            let pass = dev <= 4.0 * sigma && moment.within_standard_errors(4.0);
            out.push(CheckRecord {
                name: "mc-false-alarm".into(),
                pass,
                detail: format!(
                    "empirical {:.5} vs {:.5} (4-sigma {:.5}), Z mean off by {:.2} SE",
                    report.empirical_prob,
                    report.target_prob,
                    4.0 * sigma,
                    (moment.sample_mean - moment.expected).abs() / moment.standard_error
                ),
            });
        }
        Err(e) => out.push(CheckRecord {
            name: "mc-false-alarm".into(),
            pass: false,
            detail: e.to_string(),
        }),
    }

    match estimate_pd(&sim) {
        Ok(report) => {
            let sigma =
                (report.target_prob * (1.0 - report.target_prob) / report.trials as f64).sqrt();
            let dev = (report.empirical_prob - report.target_prob).abs();
            let moment = report.z_mean_h1.expect("target run carries the H1 moment");
            let pass = dev <= 4.0 * sigma.max(1e-12) && moment.within_standard_errors(4.0);
            out.push(CheckRecord {
                name: "mc-detection".into(),
                pass,
                detail: format!(
                    "empirical {:.5} vs {:.5} (4-sigma {:.5}), Z mean off by {:.2} SE",
                    report.empirical_prob,
                    report.target_prob,
                    4.0 * sigma,
                    (moment.sample_mean - moment.expected).abs() / moment.standard_error
                ),
            });
        }
        Err(e) => out.push(CheckRecord {
            name: "mc-detection".into(),
            pass: false,
            detail: e.to_string(),
        }),
    }

    match estimate_pd_mixture(&desk, &mixture, cfg.mc_trials, cfg.seed) {
        Ok(report) => {
            let sigma =
                (report.target_prob * (1.0 - report.target_prob) / report.trials as f64).sqrt();
            let dev = (report.empirical_prob - report.target_prob).abs();
            let pass = dev <= 4.0 * sigma.max(1e-12);
            out.push(CheckRecord {
                name: "mc-mixture".into(),
                pass,
                detail: format!(
                    "empirical {:.5} vs expected {:.5} (4-sigma {:.5})",
                    report.empirical_prob,
                    report.target_prob,
                    4.0 * sigma
                ),
            });
        }
        Err(e) => out.push(CheckRecord {
            name: "mc-mixture".into(),
            pass: false,
            detail: e.to_string(),
        }),
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_scenario() -> RadarScenario {
        RadarScenario {
            gram: CMatrix::identity(2),
            mean_square_amp: 1.0,
            snapshots: 10,
            noise_psd: 10.0,
            pfa: 1e-5,
            power_budget: 7.0,
        }
    }

    fn quick_config() -> VerifyConfig {
        VerifyConfig {
            fuzz_cases: 40,
            fuzz_grid_size: 25,
            eigen_scenarios: 8,
            eigen_covariances: 20,
            curve_cases: 6,
            mc_trials: 4000,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn default_run_passes_every_check() {
        let records = run_verify(&default_scenario(), &quick_config());
        for r in &records {
            assert!(r.pass, "{}: {}", r.name, r.detail);
        }
        assert!(all_passed(&records));
        let names: Vec<&str> = records.iter().map(|r| r.name.as_str()).collect();
        for expected in [
            "lp-oracle-fuzz",
            "plan-structure",
            "plan-kkt",
            "kkt-rejection",
            "eigen-optimality",
            "curve-landmarks",
            "mc-false-alarm",
            "mc-detection",
            "mc-mixture",
        ] {
            assert!(names.contains(&expected), "missing {expected}");
        }
    }

    #[test]
    fn injected_fault_fails_and_names_the_mean_constraint() {
        let cfg = VerifyConfig {
            inject_fault: true,
            ..quick_config()
        };
        let records = run_verify(&default_scenario(), &cfg);
        assert!(!all_passed(&records));
        let row = records
            .iter()
            .find(|r| r.name == "injected-fault")
            .expect("fault row present");
        assert!(!row.pass);
        assert!(
            row.detail.contains("mean cost"),
            "detail should name the mean constraint: {}",
            row.detail
        );
    }

    #[test]
    fn concave_scenario_still_verifies() {
        let mut s = default_scenario();
        s.pfa = 0.2;
        s.power_budget = 2.0;
        let records = run_verify(&s, &quick_config());
        for r in &records {
            assert!(r.pass, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn unobservable_scenario_reports_instead_of_panicking() {
        let mut s = default_scenario();
        s.gram = CMatrix::zeros(2, 2);
        let records = run_verify(&s, &quick_config());
        assert!(records.iter().any(|r| !r.pass));
    }
}
