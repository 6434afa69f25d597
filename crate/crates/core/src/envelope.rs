//! Lower convex envelopes of sampled fronts and the tangent sets that govern
//! optimal mixing at a given resource budget.
//!
//! The envelope is the lower convex hull of the front points in (xi, g)
//! space, computed by a monotone-chain sweep. Contacts are the front points
//! lying on the hull; every hull segment carries the supporting-line
//! multipliers (lambda, mu) satisfying -g = lambda + mu*xi along it. Points
//! collinear with a hull edge (within a relative tolerance) are kept as
//! contacts; tangent sets canonicalize such runs to their bracketing
//! extremes.

use std::fmt;

use crate::grid::FrontSample;

#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeError {
    EmptyFront,
    InfeasibleBudget { budget: f64, min_cost: f64 },
}

impl fmt::Display for EnvelopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeError::EmptyFront => write!(f, "front has no points"),
            EnvelopeError::InfeasibleBudget { budget, min_cost } => write!(
                f,
                "infeasible budget {budget}: below the minimum sampled cost {min_cost}"
            ),
        }
    }
}

impl std::error::Error for EnvelopeError {}

/// A front point on the envelope, addressed by its index in the front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub index: usize,
    pub xi: f64,
    pub g: f64,
}

/// Supporting line over one hull edge: -g(xi) = lambda + mu*xi for
/// xi in [xi_lo, xi_hi], with mu >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSegment {
    pub xi_lo: f64,
    pub xi_hi: f64,
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult {
    pub contacts: Vec<Contact>,
    pub segments: Vec<EnvelopeSegment>,
}

impl EnvelopeResult {
    /// Resource levels achievable by scalarization: the contact xi values.
    pub fn domain_g(&self) -> Vec<f64> {
        self.contacts.iter().map(|c| c.xi).collect()
    }

    pub fn max_contact(&self) -> &Contact {
        self.contacts.last().expect("envelope has contacts")
    }

    pub fn min_contact(&self) -> &Contact {
        self.contacts.first().expect("envelope has contacts")
    }

    /// Envelope value at xi by linear interpolation between contacts;
    /// constant extension outside the contact range.
    pub fn value_at(&self, xi: f64) -> f64 {
        let first = self.min_contact();
        if xi <= first.xi {
            return first.g;
        }
        for w in self.contacts.windows(2) {
            if xi <= w[1].xi {
                let t = (xi - w[0].xi) / (w[1].xi - w[0].xi);
                return w[0].g + t * (w[1].g - w[0].g);
            }
        }
        self.max_contact().g
    }
}

/// The one or two contacts whose supporting line governs mixing at `budget`,
/// with the line's multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSet {
    pub xis: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub budget: f64,
}

fn xi_tol(a: f64, b: f64) -> f64 {
    1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Lower convex hull of the front points by a monotone chain. A point is
/// discarded only when it lies strictly above the chord of its neighbours by
/// more than a relative tolerance, so collinear points survive as contacts.
pub fn lower_convex_envelope(front: &FrontSample) -> Result<EnvelopeResult, EnvelopeError> {
    if front.points.is_empty() {
        return Err(EnvelopeError::EmptyFront);
    }
    let tol = 1e-9 * front.max_abs_g().max(1.0);

    let mut hull: Vec<usize> = Vec::new();
    for (i, p) in front.points.iter().enumerate() {
        while hull.len() >= 2 {
            let a = &front.points[hull[hull.len() - 2]];
            let b = &front.points[hull[hull.len() - 1]];
            let t = (b.xi - a.xi) / (p.xi - a.xi);
            let chord = a.g + t * (p.g - a.g);
            if b.g > chord + tol {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    let contacts: Vec<Contact> = hull
        .iter()
        .map(|&i| Contact {
            index: i,
            xi: front.points[i].xi,
            g: front.points[i].g,
        })
        .collect();

    let segments: Vec<EnvelopeSegment> = contacts
        .windows(2)
        .map(|w| {
            let mu = -(w[1].g - w[0].g) / (w[1].xi - w[0].xi);
            EnvelopeSegment {
                xi_lo: w[0].xi,
                xi_hi: w[1].xi,
                lambda: -w[0].g - mu * w[0].xi,
                mu,
            }
        })
        .collect();

    Ok(EnvelopeResult { contacts, segments })
}

/// Locate the tangent set for budget `c`. Three cases: the budget coincides
/// with a contact (single xi, equal to the budget); the budget exceeds every
/// contact (single xi at the last contact, flat supporting line); or the
/// budget falls inside a hull edge (the edge's two endpoints, widened to the
/// extremes of any collinear run containing it).
pub fn tangent_set(env: &EnvelopeResult, c: f64) -> Result<TangentSet, EnvelopeError> {
    if env.contacts.is_empty() {
        return Err(EnvelopeError::EmptyFront);
    }
    let first = env.min_contact();
    if c < first.xi - xi_tol(c, first.xi) {
        return Err(EnvelopeError::InfeasibleBudget {
            budget: c,
            min_cost: first.xi,
        });
    }

    if let Some(k) = env
        .contacts
        .iter()
        .position(|ct| (ct.xi - c).abs() <= xi_tol(c, ct.xi))
    {
        // Supporting line from an adjoining hull edge; a lone contact gets
        // the flat line through its own value.
        let (lambda, mu) = if k > 0 {
            let s = &env.segments[k - 1];
            (s.lambda, s.mu)
        } else if !env.segments.is_empty() {
            (env.segments[0].lambda, env.segments[0].mu)
        } else {
            (-env.contacts[k].g, 0.0)
        };
        return Ok(TangentSet {
            xis: vec![c],
            lambda,
            mu,
            budget: c,
        });
    }

    let last = env.max_contact();
    if c > last.xi {
        // Beyond the sampled range the global minimum is the only support;
        // complementary slackness forces a flat line.
        return Ok(TangentSet {
            xis: vec![last.xi],
            lambda: -last.g,
            mu: 0.0,
            budget: c,
        });
    }

    let k = env
        .segments
        .iter()
        .position(|s| s.xi_lo < c && c < s.xi_hi)
        .expect("budget strictly inside some hull edge");
    let seg = env.segments[k];
    let mu_tol = 1e-9 * seg.mu.abs().max(1.0);
    let mut lo = k;
    while lo > 0 && (env.segments[lo - 1].mu - seg.mu).abs() <= mu_tol {
        lo -= 1;
    }
    let mut hi = k;
    while hi + 1 < env.segments.len() && (env.segments[hi + 1].mu - seg.mu).abs() <= mu_tol {
        hi += 1;
    }
    Ok(TangentSet {
        xis: vec![env.segments[lo].xi_lo, env.segments[hi].xi_hi],
        lambda: seg.lambda,
        mu: seg.mu,
        budget: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrontPoint;

    fn front(pts: &[(f64, f64)]) -> FrontSample {
        FrontSample {
            points: pts
                .iter()
                .enumerate()
                .map(|(i, &(xi, g))| FrontPoint {
                    xi,
                    g,
                    representative_designs: vec![format!("d{i}")],
                })
                .collect(),
        }
    }

    #[test]
    fn convex_front_keeps_all_points() {
        let env = lower_convex_envelope(&front(&[(0.0, 1.0), (1.0, 0.5), (2.0, 0.4)])).unwrap();
        assert_eq!(env.contacts.len(), 3);
        assert_eq!(env.segments.len(), 2);
        assert!(env.segments[0].mu > env.segments[1].mu);
    }

    #[test]
    fn concave_bump_removed() {
        let env = lower_convex_envelope(&front(&[(0.0, 1.0), (1.0, 0.9), (2.0, 0.4)])).unwrap();
        let xis: Vec<f64> = env.contacts.iter().map(|c| c.xi).collect();
        assert_eq!(xis, vec![0.0, 2.0]);
        // Chord value at xi=1 is 0.7, below the removed point's 0.9.
        assert!((env.value_at(1.0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn single_point_front() {
        let env = lower_convex_envelope(&front(&[(1.0, 0.3)])).unwrap();
        assert_eq!(env.contacts.len(), 1);
        assert!(env.segments.is_empty());
    }

    #[test]
    fn collinear_points_kept() {
        let env =
            lower_convex_envelope(&front(&[(0.0, 1.0), (1.0, 0.8), (2.0, 0.6), (3.0, 0.6)]))
                .unwrap();
        assert_eq!(env.contacts.len(), 4);
    }

    #[test]
    fn supporting_line_matches_contacts() {
        let env = lower_convex_envelope(&front(&[(0.0, 1.0), (2.0, 0.4)])).unwrap();
        let s = &env.segments[0];
        assert!((s.mu - 0.3).abs() < 1e-12);
        assert!((s.lambda - (-1.0)).abs() < 1e-12);
        // -g = lambda + mu*xi at both ends.
        assert!((s.lambda + s.mu * 0.0 - (-1.0)).abs() < 1e-12);
        assert!((s.lambda + s.mu * 2.0 - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn tangent_interior_budget() {
        let env = lower_convex_envelope(&front(&[(0.0, 1.0), (2.0, 0.4)])).unwrap();
        let ts = tangent_set(&env, 1.0).unwrap();
        assert_eq!(ts.xis, vec![0.0, 2.0]);
        assert!((ts.mu - 0.3).abs() < 1e-12);
        assert!((ts.lambda - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn tangent_contact_coincidence() {
        let env = lower_convex_envelope(&front(&[(0.0, 1.0), (2.0, 0.4)])).unwrap();
        let ts = tangent_set(&env, 2.0).unwrap();
        assert_eq!(ts.xis, vec![2.0]);
    }

    #[test]
    fn tangent_beyond_range_is_flat() {
        let env = lower_convex_envelope(&front(&[(0.0, 1.0), (2.0, 0.4)])).unwrap();
        let ts = tangent_set(&env, 5.0).unwrap();
        assert_eq!(ts.xis, vec![2.0]);
        assert_eq!(ts.mu, 0.0);
        // Flat line -g = lambda through the cheapest best point.
        assert!((ts.lambda - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn tangent_below_range_rejected() {
        let env = lower_convex_envelope(&front(&[(1.0, 1.0), (2.0, 0.4)])).unwrap();
        assert!(matches!(
            tangent_set(&env, 0.5),
            Err(EnvelopeError::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn collinear_run_widens_bracket() {
        // Slopes -0.2, -0.2, -0.1: the first three points are one collinear
        // run, and a budget inside it brackets the run's extremes.
        let env =
            lower_convex_envelope(&front(&[(0.0, 1.0), (1.0, 0.8), (2.0, 0.6), (4.0, 0.4)]))
                .unwrap();
        let ts = tangent_set(&env, 1.5).unwrap();
        assert_eq!(ts.xis, vec![0.0, 2.0]);
    }

    #[test]
    fn every_point_on_or_above_every_segment() {
        let f = front(&[(0.0, 1.0), (0.5, 0.95), (1.0, 0.6), (2.0, 0.5), (3.0, 0.49)]);
        let env = lower_convex_envelope(&f).unwrap();
        let tol = 1e-9 * f.max_abs_g().max(1.0);
        for p in &f.points {
            for s in &env.segments {
                assert!(-p.g <= s.lambda + s.mu * p.xi + tol);
            }
        }
    }

    #[test]
    fn envelope_of_contacts_is_idempotent() {
        let f = front(&[(0.0, 1.0), (0.5, 0.95), (1.0, 0.6), (2.0, 0.5)]);
        let env = lower_convex_envelope(&f).unwrap();
        let contact_front = FrontSample {
            points: env
                .contacts
                .iter()
                .map(|c| f.points[c.index].clone())
                .collect(),
        };
        let env2 = lower_convex_envelope(&contact_front).unwrap();
        let a: Vec<f64> = env.contacts.iter().map(|c| c.xi).collect();
        let b: Vec<f64> = env2.contacts.iter().map(|c| c.xi).collect();
        assert_eq!(a, b);
    }
}
