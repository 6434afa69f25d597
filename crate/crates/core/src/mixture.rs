//! Mixed strategies over design grids and their optimality certificates.
//!
//! `build_mixture` turns an envelope tangent set into the optimal randomized
//! strategy for a budget: a single design at the budget when scalarization
//! reaches it, or time-sharing between the two tangent contacts with weights
//! fixed by the mean-resource constraint. `verify_kkt` independently checks
//! any mixture against the grid by reconstructing the dual multipliers and
//! testing stationarity, dominance, and complementary slackness.

use std::collections::HashMap;
use std::fmt;

use crate::envelope::{tangent_set, EnvelopeError, EnvelopeResult};
use crate::grid::{DesignGrid, FrontSample};

#[derive(Debug, Clone, PartialEq)]
pub enum MixtureError {
    Envelope(EnvelopeError),
    AtomOffFront { xi: f64 },
    NoDesignsAt { xi: f64 },
}

impl fmt::Display for MixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixtureError::Envelope(e) => write!(f, "{e}"),
            MixtureError::AtomOffFront { xi } => {
                write!(f, "atom resource {xi} does not match any front point")
            }
            MixtureError::NoDesignsAt { xi } => {
                write!(f, "no representative designs available at resource {xi}")
            }
        }
    }
}

impl std::error::Error for MixtureError {}

impl From<EnvelopeError> for MixtureError {
    fn from(e: EnvelopeError) -> Self {
        MixtureError::Envelope(e)
    }
}

/// One atom of a mixed strategy: probability `weight` of spending resource
/// `xi`, split over concrete designs by conditional weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureAtom {
    pub weight: f64,
    pub xi: f64,
    pub designs: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    pub atoms: Vec<MixtureAtom>,
    pub budget: f64,
}

impl MixedStrategy {
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn mean_resource(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.xi).sum()
    }

    /// All design ids carrying positive probability.
    pub fn support_ids(&self) -> Vec<&str> {
        let mut ids = Vec::new();
        for atom in &self.atoms {
            if atom.weight <= 0.0 {
                continue;
            }
            for (id, w) in &atom.designs {
                if *w > 0.0 && !ids.contains(&id.as_str()) {
                    ids.push(id.as_str());
                }
            }
        }
        ids
    }
}

fn uniform_designs(front: &FrontSample, xi: f64) -> Result<Vec<(String, f64)>, MixtureError> {
    let idx = front
        .lookup_xi(xi)
        .ok_or(MixtureError::AtomOffFront { xi })?;
    let reps = &front.points[idx].representative_designs;
    if reps.is_empty() {
        return Err(MixtureError::NoDesignsAt { xi });
    }
    let w = 1.0 / reps.len() as f64;
    Ok(reps.iter().map(|id| (id.clone(), w)).collect())
}

/// Optimal mixed strategy at budget `c`. Single atom when the budget sits on
/// a contact or beyond the last one; otherwise two atoms at the tangent
/// contacts with weights p1 = (xi2-c)/(xi2-xi1), p2 = (c-xi1)/(xi2-xi1) so
/// the mean resource equals the budget exactly. Conditional design weights
/// are uniform over the attaining designs; callers may reweight them freely.
pub fn build_mixture(
    env: &EnvelopeResult,
    front: &FrontSample,
    c: f64,
) -> Result<MixedStrategy, MixtureError> {
    let ts = tangent_set(env, c)?;
    let atoms = match ts.xis.as_slice() {
        [xi] => vec![MixtureAtom {
            weight: 1.0,
            xi: *xi,
            designs: uniform_designs(front, *xi)?,
        }],
        [xi1, xi2] => {
            let p1 = (xi2 - c) / (xi2 - xi1);
            let p2 = 1.0 - p1;
            vec![
                MixtureAtom {
                    weight: p1,
                    xi: *xi1,
                    designs: uniform_designs(front, *xi1)?,
                },
                MixtureAtom {
                    weight: p2,
                    xi: *xi2,
                    designs: uniform_designs(front, *xi2)?,
                },
            ]
        }
        _ => unreachable!("tangent sets have one or two resources"),
    };
    Ok(MixedStrategy { atoms, budget: c })
}

/// Expected performance of a mixture read off the front: sum of
/// weight * g(xi) over atoms.
pub fn expected_performance(mix: &MixedStrategy, front: &FrontSample) -> Result<f64, MixtureError> {
    let mut total = 0.0;
    for atom in &mix.atoms {
        let idx = front
            .lookup_xi(atom.xi)
            .ok_or(MixtureError::AtomOffFront { xi: atom.xi })?;
        total += atom.weight * front.points[idx].g;
    }
    Ok(total)
}

/// Dual certificate for a mixture: multipliers and per-design slacks
/// nu = perf + lambda1 + lambda2*cost, nonnegative everywhere and zero on
/// the support.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    pub lambda1: f64,
    pub lambda2: f64,
    /// (design_id, nu) for every grid entry, in grid order.
    pub slacks: Vec<(String, f64)>,
    pub support_ids: Vec<String>,
    pub budget_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KktIssue {
    UnknownDesign { design_id: String },
    MalformedWeights { total: f64 },
    BudgetExceeded { mean_cost: f64, budget: f64 },
    NegativeLambda2 { lambda2: f64 },
    Dominance { design_id: String, nu: f64 },
    SupportMismatch { design_id: String, nu: f64 },
    Slackness { lambda2: f64, budget_slack: f64 },
}

impl fmt::Display for KktIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KktIssue::UnknownDesign { design_id } => {
                write!(f, "support design {design_id} is not in the grid")
            }
            KktIssue::MalformedWeights { total } => {
                write!(f, "mixture weights sum to {total}, not 1")
            }
            KktIssue::BudgetExceeded { mean_cost, budget } => {
                write!(f, "mean cost {mean_cost} exceeds budget {budget}")
            }
            KktIssue::NegativeLambda2 { lambda2 } => {
                write!(f, "recovered cost multiplier {lambda2} is negative")
            }
            KktIssue::Dominance { design_id, nu } => {
                write!(f, "design {design_id} beats the support line (nu = {nu:.3e})")
            }
            KktIssue::SupportMismatch { design_id, nu } => {
                write!(f, "support design {design_id} is off the line (nu = {nu:.3e})")
            }
            KktIssue::Slackness { lambda2, budget_slack } => {
                write!(
                    f,
                    "lambda2 = {lambda2:.3e} with slack budget (slack = {budget_slack:.3e})"
                )
            }
        }
    }
}

/// Violation report: everything that failed, in detection order.
#[derive(Debug, Clone, PartialEq)]
pub struct KktViolation {
    pub issues: Vec<KktIssue>,
}

impl fmt::Display for KktViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mixture fails KKT certification: ")?;
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for KktViolation {}

/// Certify a mixture against a grid. The multipliers are recovered from the
/// support: two distinct support costs fix the line through them; a single
/// support cost takes lambda2 = 0 when the budget is slack (complementary
/// slackness) and otherwise the smallest slope dominating the costlier
/// designs. All grid entries are then checked for dominance, the support for
/// stationarity, and the pair (lambda2, budget slack) for slackness.
pub fn verify_kkt(
    grid: &DesignGrid,
    mix: &MixedStrategy,
    budget: f64,
) -> Result<KktCertificate, KktViolation> {
    let mut issues = Vec::new();

    let by_id: HashMap<&str, usize> = grid
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();

    let total = mix.total_weight();
    if (total - 1.0).abs() > 1e-12 || mix.atoms.iter().any(|a| a.weight < 0.0) {
        issues.push(KktIssue::MalformedWeights { total });
    }

    // Support points in (cost, perf), with the mixture's true mean cost.
    let mut support: Vec<(usize, f64, f64)> = Vec::new();
    let mut mean_cost = 0.0;
    for atom in &mix.atoms {
        if atom.weight <= 0.0 {
            continue;
        }
        for (id, cw) in &atom.designs {
            if *cw <= 0.0 {
                continue;
            }
            match by_id.get(id.as_str()) {
                Some(&i) => {
                    mean_cost += atom.weight * cw * grid.entries[i].cost;
                    if !support.iter().any(|&(j, _, _)| j == i) {
                        support.push((i, grid.entries[i].cost, grid.entries[i].perf));
                    }
                }
                None => issues.push(KktIssue::UnknownDesign {
                    design_id: id.clone(),
                }),
            }
        }
    }
    if support.is_empty() {
        issues.push(KktIssue::MalformedWeights { total: 0.0 });
    }
    if !issues.is_empty() {
        return Err(KktViolation { issues });
    }

    let budget_tol = 1e-9 * budget.abs().max(1.0);
    let budget_slack = budget - mean_cost;
    if budget_slack < -budget_tol {
        issues.push(KktIssue::BudgetExceeded {
            mean_cost,
            budget,
        });
    }

    let perf_scale = grid.max_abs_perf().max(1.0);
    support.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (c_lo, e_lo) = (support[0].1, support[0].2);
    let (c_hi, e_hi) = {
        let last = support.last().expect("mixture has support");
        (last.1, last.2)
    };

    let cost_spread_tol = 1e-12 * c_hi.abs().max(1.0);
    let (lambda1, lambda2) = if c_hi - c_lo > cost_spread_tol {
        let l2 = (e_lo - e_hi) / (c_hi - c_lo);
        (-e_lo - l2 * c_lo, l2)
    } else if budget_slack > budget_tol {
        (-e_lo, 0.0)
    } else {
        // Active budget, single support cost: the flattest line through the
        // support that still dominates every costlier design.
        let mut l2 = 0.0f64;
        for e in &grid.entries {
            if e.cost > c_lo + cost_spread_tol {
                l2 = l2.max((e_lo - e.perf) / (e.cost - c_lo));
            }
        }
        (-e_lo - l2 * c_lo, l2)
    };

    let scale = perf_scale
        .max(lambda1.abs())
        .max(lambda2.abs() * grid.max_cost())
        .max(1.0);
    let nu_tol = 1e-9 * scale;

    if lambda2 < -nu_tol {
        issues.push(KktIssue::NegativeLambda2 { lambda2 });
    }

    let mut slacks = Vec::with_capacity(grid.entries.len());
    for e in &grid.entries {
        let nu = e.perf + lambda1 + lambda2 * e.cost;
        if nu < -nu_tol {
            issues.push(KktIssue::Dominance {
                design_id: e.id.clone(),
                nu,
            });
        }
        slacks.push((e.id.clone(), nu));
    }

    let mut support_ids = Vec::with_capacity(support.len());
    for &(i, cost, perf) in &support {
        let nu = perf + lambda1 + lambda2 * cost;
        if nu.abs() > nu_tol {
            issues.push(KktIssue::SupportMismatch {
                design_id: grid.entries[i].id.clone(),
                nu,
            });
        }
        support_ids.push(grid.entries[i].id.clone());
    }

    if lambda2 > nu_tol && budget_slack > budget_tol {
        issues.push(KktIssue::Slackness {
            lambda2,
            budget_slack,
        });
    }

    if issues.is_empty() {
        Ok(KktCertificate {
            lambda1,
            lambda2,
            slacks,
            support_ids,
            budget_slack,
        })
    } else {
        Err(KktViolation { issues })
    }
}
