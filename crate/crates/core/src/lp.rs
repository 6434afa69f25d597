//! Brute-force oracle for the discretized mixing problem, and a fuzz harness
//! pitting it against the envelope pipeline.
//!
//! The problem is linear in the design probabilities with one normalization
//! equality and one budget inequality, so some optimum is supported on at
//! most two designs. The oracle therefore enumerates every feasible single
//! design and every cost-straddling pair, which is exact on the grid and
//! independent of the envelope code it is used to check.

use std::fmt;

use rand::RngExt;

use crate::envelope::lower_convex_envelope;
use crate::grid::{build_front, DesignEntry, DesignGrid};
use crate::mixture::{build_mixture, expected_performance, verify_kkt};
use crate::rng::trial_rng;

/// Hard cap on oracle grid size; pair enumeration is quadratic.
pub const MAX_ORACLE_GRID: usize = 10_000;

const FUZZ_STREAM: u64 = 90;

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    InfeasibleBudget { budget: f64, min_cost: f64 },
    GridTooLarge { entries: usize },
    BadGrid(String),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::InfeasibleBudget { budget, min_cost } => write!(
                f,
                "infeasible budget {budget}: cheapest design costs {min_cost}"
            ),
            LpError::GridTooLarge { entries } => write!(
                f,
                "grid has {entries} entries, oracle cap is {MAX_ORACLE_GRID}"
            ),
            LpError::BadGrid(msg) => write!(f, "bad grid: {msg}"),
        }
    }
}

impl std::error::Error for LpError {}

/// Oracle optimum: expected performance, supporting atoms (grid index and
/// weight), and whether the budget constraint binds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub atoms: Vec<(usize, f64)>,
    pub active: bool,
}

/// Exhaustive minimum of expected performance subject to mean cost <= c:
/// best single design with cost within budget, then every pair with costs
/// straddling the budget at the unique mean-matching weights.
pub fn solve_lp(grid: &DesignGrid, c: f64) -> Result<LpSolution, LpError> {
    grid.validate().map_err(|e| LpError::BadGrid(e.to_string()))?;
    if grid.entries.len() > MAX_ORACLE_GRID {
        return Err(LpError::GridTooLarge {
            entries: grid.entries.len(),
        });
    }

    let feas_tol = 1e-12 * c.abs().max(1.0);
    let mut best: Option<LpSolution> = None;

    for (i, e) in grid.entries.iter().enumerate() {
        if e.cost <= c + feas_tol && best.as_ref().is_none_or(|b| e.perf < b.value) {
            best = Some(LpSolution {
                value: e.perf,
                atoms: vec![(i, 1.0)],
                active: (e.cost - c).abs() <= feas_tol,
            });
        }
    }
    let mut best = best.ok_or_else(|| {
        let min_cost = grid
            .entries
            .iter()
            .map(|e| e.cost)
            .fold(f64::INFINITY, f64::min);
        LpError::InfeasibleBudget { budget: c, min_cost }
    })?;

    for (i, lo) in grid.entries.iter().enumerate() {
        if lo.cost >= c {
            continue;
        }
        for (j, hi) in grid.entries.iter().enumerate() {
            if hi.cost <= c {
                continue;
            }
            let w_lo = (hi.cost - c) / (hi.cost - lo.cost);
            let value = w_lo * lo.perf + (1.0 - w_lo) * hi.perf;
            if value < best.value {
                best = LpSolution {
                    value,
                    atoms: vec![(i, w_lo), (j, 1.0 - w_lo)],
                    active: true,
                };
            }
        }
    }
    Ok(best)
}

/// One fuzz case, in the shape the CLI prints.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FuzzRow {
    pub case_id: u64,
    pub budget: f64,
    pub oracle_value: f64,
    pub mixture_value: f64,
    pub delta: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzReport {
    pub cases: usize,
    pub passes: usize,
    pub failures: usize,
    pub first_failure: Option<(u64, String)>,
    pub rows: Vec<FuzzRow>,
}

impl FuzzReport {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }
}

/// Random grid with `n` designs: costs on a lattice in [0, 10] so repeated
/// costs collide exactly (exercising the binning path) and distinct costs
/// stay far apart; performances continuous in [-1, 1). Design 0 is free, so
/// every budget is feasible.
fn random_grid(n: usize, rng: &mut impl RngExt) -> DesignGrid {
    let mut entries = Vec::with_capacity(n);
    for k in 0..n {
        let cost = if k == 0 {
            0.0
        } else {
            0.005 * rng.random_range(0..=2000u32) as f64
        };
        let perf = rng.random::<f64>() * 2.0 - 1.0;
        entries.push(DesignEntry {
            id: format!("d{k:04}"),
            cost,
            perf,
        });
    }
    DesignGrid::new(entries)
}

/// Pit the envelope pipeline against the oracle on `n_cases` random grids of
/// up to `grid_size` designs. Each case checks value agreement to 1e-9
/// relative, oracle support on the envelope contacts, and the KKT
/// certificate of the built mixture. Failures are collected, never raised.
pub fn random_front_fuzz(seed: u64, n_cases: usize, grid_size: usize) -> FuzzReport {
    let mut rows = Vec::with_capacity(n_cases);
    let mut passes = 0;
    let mut failures = 0;
    let mut first_failure = None;

    for case in 0..n_cases as u64 {
        let mut rng = trial_rng(seed, FUZZ_STREAM, case);
        let n = rng.random_range(1..=grid_size.max(1));
        let grid = random_grid(n, &mut rng);
        // Budgets sweep the sampled range and overshoot it one time in five.
        let budget = rng.random::<f64>() * grid.max_cost().max(1.0) * 1.25;

        let mut failure: Option<String> = None;
        let mut oracle_value = f64::NAN;
        let mut mixture_value = f64::NAN;

        match run_case(&grid, budget) {
            Ok((ov, mv)) => {
                oracle_value = ov;
                mixture_value = mv;
                let scale = ov.abs().max(1.0);
                if (ov - mv).abs() > 1e-9 * scale {
                    failure = Some(format!(
                        "value mismatch: oracle {ov:.12e} vs mixture {mv:.12e}"
                    ));
                }
            }
            Err(msg) => failure = Some(msg),
        }

        let pass = failure.is_none();
        if pass {
            passes += 1;
        } else {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some((case, failure.clone().unwrap()));
            }
        }
        rows.push(FuzzRow {
            case_id: case,
            budget,
            oracle_value,
            mixture_value,
            delta: oracle_value - mixture_value,
            pass,
        });
    }

    FuzzReport {
        cases: n_cases,
        passes,
        failures,
        first_failure,
        rows,
    }
}

fn run_case(grid: &DesignGrid, budget: f64) -> Result<(f64, f64), String> {
    let front = build_front(grid, grid.default_bin_tol()).map_err(|e| e.to_string())?;
    let env = lower_convex_envelope(&front).map_err(|e| e.to_string())?;
    let mix = build_mixture(&env, &front, budget).map_err(|e| e.to_string())?;
    let mv = expected_performance(&mix, &front).map_err(|e| e.to_string())?;
    let sol = solve_lp(grid, budget).map_err(|e| e.to_string())?;

    if mix.atoms.len() > 2 {
        return Err(format!("mixture has {} atoms", mix.atoms.len()));
    }
    if mix.atoms.len() == 2 {
        let mean = mix.mean_resource();
        if (mean - budget).abs() > 1e-12 * budget.abs().max(1.0) {
            return Err(format!("mean resource {mean} differs from budget {budget}"));
        }
    }

    let g_tol = 1e-9 * front.max_abs_g().max(1.0);
    for &(i, w) in &sol.atoms {
        if w <= 0.0 {
            continue;
        }
        let e = &grid.entries[i];
        let on_contact = env.contacts.iter().any(|ct| {
            (ct.xi - e.cost).abs() <= 1e-9 * ct.xi.abs().max(e.cost.abs()).max(1.0)
                && (ct.g - e.perf).abs() <= g_tol
        });
        if !on_contact {
            return Err(format!(
                "oracle atom {} at (cost {}, perf {}) is not an envelope contact",
                e.id, e.cost, e.perf
            ));
        }
    }

    if let Err(v) = verify_kkt(grid, &mix, budget) {
        return Err(format!("kkt rejection: {v}"));
    }

    Ok((sol.value, mv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(entries: &[(&str, f64, f64)]) -> DesignGrid {
        DesignGrid::new(
            entries
                .iter()
                .map(|&(id, cost, perf)| DesignEntry {
                    id: id.to_string(),
                    cost,
                    perf,
                })
                .collect(),
        )
    }

    #[test]
    fn pair_beats_pure_strategy() {
        let g = grid(&[("a", 0.0, 1.0), ("m", 1.0, 0.9), ("b", 2.0, 0.4)]);
        let sol = solve_lp(&g, 1.0).unwrap();
        assert!((sol.value - 0.7).abs() < 1e-12);
        assert_eq!(sol.atoms.len(), 2);
        assert!(sol.active);
        let w: f64 = sol.atoms.iter().map(|&(_, w)| w).sum();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convex_front_keeps_single_atom_on_budget() {
        let g = grid(&[("a", 0.0, 1.0), ("b", 1.0, 0.5), ("c", 2.0, 0.4)]);
        let sol = solve_lp(&g, 1.0).unwrap();
        assert_eq!(sol.value, 0.5);
        assert_eq!(sol.atoms, vec![(1, 1.0)]);
    }

    #[test]
    fn large_budget_takes_global_min() {
        let g = grid(&[("a", 0.0, 1.0), ("b", 2.0, 0.4)]);
        let sol = solve_lp(&g, 50.0).unwrap();
        assert_eq!(sol.value, 0.4);
        assert!(!sol.active);
    }

    #[test]
    fn infeasible_budget_rejected() {
        let g = grid(&[("a", 1.0, 1.0)]);
        assert!(matches!(
            solve_lp(&g, 0.5),
            Err(LpError::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn oracle_cap_enforced() {
        let entries: Vec<DesignEntry> = (0..MAX_ORACLE_GRID + 1)
            .map(|k| DesignEntry {
                id: format!("d{k}"),
                cost: k as f64,
                perf: 0.0,
            })
            .collect();
        assert!(matches!(
            solve_lp(&DesignGrid::new(entries), 1.0),
            Err(LpError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_value_monotone_in_budget() {
        let g = grid(&[
            ("a", 0.0, 1.0),
            ("b", 1.0, 0.7),
            ("c", 3.0, 0.2),
            ("d", 5.0, 0.15),
        ]);
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let c = 0.3 * k as f64;
            let v = solve_lp(&g, c).unwrap().value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn fuzz_short_run_all_pass() {
        let report = random_front_fuzz(1, 50, 40);
        assert_eq!(report.failures, 0, "{:?}", report.first_failure);
        assert_eq!(report.passes, 50);
    }

    #[test]
    fn fuzz_deterministic() {
        let a = random_front_fuzz(7, 10, 30);
        let b = random_front_fuzz(7, 10, 30);
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_single_design_grid() {
        let report = random_front_fuzz(3, 5, 1);
        assert_eq!(report.failures, 0);
    }
}
