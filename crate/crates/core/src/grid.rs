//! Design grids and sampled tradeoff fronts.
//!
//! A design grid discretizes the space of pure strategies: each entry is an
//! opaque design with a resource cost and a performance value (lower is
//! better). `build_front` turns a grid into the sampled front g(xi), the best
//! performance attainable with cost at most xi, together with the designs
//! that attain it at each sampled level.

use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    EmptyGrid,
    NonFiniteField { design_id: String },
    NegativeCost { design_id: String, cost: f64 },
    DuplicateId { design_id: String },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::EmptyGrid => write!(f, "empty design grid"),
            GridError::NonFiniteField { design_id } => {
                write!(f, "design {design_id} has a non-finite cost or performance")
            }
            GridError::NegativeCost { design_id, cost } => {
                write!(f, "design {design_id} has negative cost {cost}")
            }
            GridError::DuplicateId { design_id } => {
                write!(f, "design id {design_id} appears more than once")
            }
        }
    }
}

impl std::error::Error for GridError {}

/// One pure-strategy design point.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignEntry {
    pub id: String,
    pub cost: f64,
    pub perf: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignGrid {
    pub entries: Vec<DesignEntry>,
}

impl DesignGrid {
    pub fn new(entries: Vec<DesignEntry>) -> Self {
        DesignGrid { entries }
    }

    pub fn push(&mut self, id: impl Into<String>, cost: f64, perf: f64) {
        self.entries.push(DesignEntry {
            id: id.into(),
            cost,
            perf,
        });
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.entries.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !e.cost.is_finite() || !e.perf.is_finite() {
                return Err(GridError::NonFiniteField {
                    design_id: e.id.clone(),
                });
            }
            if e.cost < 0.0 {
                return Err(GridError::NegativeCost {
                    design_id: e.id.clone(),
                    cost: e.cost,
                });
            }
            if !seen.insert(e.id.as_str()) {
                return Err(GridError::DuplicateId {
                    design_id: e.id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn max_cost(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.cost))
    }

    pub fn max_abs_perf(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.perf.abs()))
    }

    /// Default cost-binning tolerance: merges float-equal costs only.
    pub fn default_bin_tol(&self) -> f64 {
        1e-9 * self.max_cost()
    }

    pub fn find(&self, id: &str) -> Option<&DesignEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// One sampled front point: best performance `g` at resource level `xi`,
/// with the designs attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub xi: f64,
    pub g: f64,
    pub representative_designs: Vec<String>,
}

/// Sampled front g(xi): xi strictly increasing, g non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontSample {
    pub points: Vec<FrontPoint>,
}

impl FrontSample {
    pub fn validate(&self) -> Result<(), String> {
        if self.points.is_empty() {
            return Err("front has no points".into());
        }
        for w in self.points.windows(2) {
            if w[1].xi <= w[0].xi {
                return Err(format!("xi not strictly increasing at {}", w[1].xi));
            }
            if w[1].g > w[0].g {
                return Err(format!("g increases at xi {}", w[1].xi));
            }
        }
        for p in &self.points {
            if p.representative_designs.is_empty() {
                return Err(format!("no representative designs at xi {}", p.xi));
            }
        }
        Ok(())
    }

    pub fn min_xi(&self) -> f64 {
        self.points[0].xi
    }

    pub fn max_xi(&self) -> f64 {
        self.points.last().expect("non-empty front").xi
    }

    pub fn max_abs_g(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.g.abs()))
    }

    /// Index of the point whose xi matches within a relative tolerance.
    pub fn lookup_xi(&self, xi: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p.xi - xi).abs();
            if d <= 1e-9 * p.xi.abs().max(xi.abs()).max(1.0)
                && best.is_none_or(|(_, bd)| d < bd)
            {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Build the sampled front: bin costs to within `bin_tol`, take the minimum
/// performance per bin, then apply a running minimum over increasing xi so g
/// is non-increasing. Representative designs carry forward with the running
/// minimum, so every point lists designs that actually attain its g value.
pub fn build_front(grid: &DesignGrid, bin_tol: f64) -> Result<FrontSample, GridError> {
    grid.validate()?;
    let value_tol = 1e-9 * grid.max_abs_perf().max(1.0);

    let mut order: Vec<usize> = (0..grid.entries.len()).collect();
    order.sort_by(|&a, &b| {
        grid.entries[a]
            .cost
            .total_cmp(&grid.entries[b].cost)
            .then_with(|| grid.entries[a].id.cmp(&grid.entries[b].id))
    });

    // Greedy left-to-right binning: a bin spans costs within bin_tol of its
    // first (smallest) member, which becomes the bin's xi.
    let mut bins: Vec<(f64, Vec<usize>)> = Vec::new();
    for &idx in &order {
        let cost = grid.entries[idx].cost;
        match bins.last_mut() {
            Some((start, members)) if cost - *start <= bin_tol => members.push(idx),
            _ => bins.push((cost, vec![idx])),
        }
    }

    let mut points: Vec<FrontPoint> = Vec::with_capacity(bins.len());
    for (xi, members) in bins {
        let bin_min = members
            .iter()
            .map(|&i| grid.entries[i].perf)
            .fold(f64::INFINITY, f64::min);
        let bin_reps: Vec<String> = members
            .iter()
            .filter(|&&i| grid.entries[i].perf - bin_min <= value_tol)
            .map(|&i| grid.entries[i].id.clone())
            .collect();

        match points.last() {
            Some(prev) if bin_min > prev.g + value_tol => {
                // This level adds nothing; the running minimum carries the
                // earlier designs forward.
                let carried = FrontPoint {
                    xi,
                    g: prev.g,
                    representative_designs: prev.representative_designs.clone(),
                };
                points.push(carried);
            }
            Some(prev) if (bin_min - prev.g).abs() <= value_tol => {
                let g = prev.g.min(bin_min);
                let mut reps = prev.representative_designs.clone();
                for r in bin_reps {
                    if !reps.contains(&r) {
                        reps.push(r);
                    }
                }
                points.push(FrontPoint {
                    xi,
                    g,
                    representative_designs: reps,
                });
            }
            _ => {
                points.push(FrontPoint {
                    xi,
                    g: bin_min,
                    representative_designs: bin_reps,
                });
            }
        }
    }

    Ok(FrontSample { points })
}
