//! Randomized invariant checks for the front, envelope, mixture, and plan
//! machinery.

use proptest::prelude::*;

use sensemix::{
    build_front, build_mixture, expected_performance, lower_convex_envelope,
    sensing_optimal_distribution, solve_lp, verify_kkt, CMatrix, DesignGrid, RadarScenario,
};

/// Costs live on a 0.005 lattice so equal costs collide exactly and distinct
/// costs stay far beyond any binning tolerance. A free design keeps every
/// nonnegative budget feasible.
fn lattice_grid(entries: &[(u32, f64)]) -> DesignGrid {
    let mut grid = DesignGrid::new(Vec::new());
    grid.push("free", 0.0, 0.0);
    for (k, &(tick, perf)) in entries.iter().enumerate() {
        grid.push(format!("d{k:03}"), 0.005 * tick as f64, perf);
    }
    grid
}

fn entries() -> impl Strategy<Value = Vec<(u32, f64)>> {
    prop::collection::vec((0u32..=2000, -1.0f64..1.0), 1..60)
}

proptest! {
    #[test]
    fn front_is_monotone_and_dominates_every_design(raw in entries()) {
        let grid = lattice_grid(&raw);
        let front = build_front(&grid, grid.default_bin_tol()).expect("front builds");
        front.validate().expect("front invariants");

        let tol = 1e-9 * grid.max_abs_perf().max(1.0);
        for entry in &grid.entries {
            let best_at_or_below = front
                .points
                .iter()
                .take_while(|p| p.xi <= entry.cost + grid.default_bin_tol())
                .map(|p| p.g)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(
                best_at_or_below <= entry.perf + tol,
                "design at cost {} with perf {} beats the front value {}",
                entry.cost,
                entry.perf,
                best_at_or_below
            );
        }
    }

    #[test]
    fn envelope_stays_on_or_below_the_front(raw in entries()) {
        let grid = lattice_grid(&raw);
        let front = build_front(&grid, grid.default_bin_tol()).expect("front builds");
        let env = lower_convex_envelope(&front).expect("envelope builds");

        let tol = 1e-9 * front.max_abs_g().max(1.0);
        for p in &front.points {
            prop_assert!(
                env.value_at(p.xi) <= p.g + tol,
                "envelope {} exceeds front {} at xi {}",
                env.value_at(p.xi),
                p.g,
                p.xi
            );
        }
        for c in &env.contacts {
            let point = &front.points[c.index];
            prop_assert_eq!(c.xi, point.xi);
            prop_assert_eq!(c.g, point.g);
        }
        prop_assert_eq!(env.min_contact().xi, front.min_xi());
        prop_assert_eq!(env.max_contact().xi, front.max_xi());
        for seg in &env.segments {
            prop_assert!(seg.mu >= -tol, "support slope multiplier {} negative", seg.mu);
        }
    }

    #[test]
    fn mixtures_have_at_most_two_atoms_and_meet_the_budget(
        raw in entries(),
        budget in 0.0f64..11.0,
    ) {
        let grid = lattice_grid(&raw);
        let front = build_front(&grid, grid.default_bin_tol()).expect("front builds");
        let env = lower_convex_envelope(&front).expect("envelope builds");
        let mix = build_mixture(&env, &front, budget).expect("mixture builds");

        prop_assert!(mix.atoms.len() <= 2);
        prop_assert!((mix.total_weight() - 1.0).abs() <= 1e-12);
        for atom in &mix.atoms {
            prop_assert!(atom.weight >= 0.0);
        }
        let mean = mix.mean_resource();
        if mix.atoms.len() == 2 {
            prop_assert!(
                (mean - budget).abs() <= 1e-12 * budget.max(1.0),
                "two-atom mean {mean} must hit the budget {budget} exactly"
            );
        } else {
            prop_assert!(mean <= budget + 1e-12 * budget.max(1.0));
        }
    }

    #[test]
    fn built_mixtures_match_the_oracle_and_certify(
        raw in prop::collection::vec((0u32..=2000, -1.0f64..1.0), 1..16),
        budget in 0.0f64..11.0,
    ) {
        let grid = lattice_grid(&raw);
        let front = build_front(&grid, grid.default_bin_tol()).expect("front builds");
        let env = lower_convex_envelope(&front).expect("envelope builds");
        let mix = build_mixture(&env, &front, budget).expect("mixture builds");

        let value = expected_performance(&mix, &front).expect("mixture value");
        let oracle = solve_lp(&grid, budget).expect("oracle solves");
        prop_assert!(
            (value - oracle.value).abs() <= 1e-9 * oracle.value.abs().max(1.0),
            "mixture value {value} vs oracle {}",
            oracle.value
        );

        if let Err(violation) = verify_kkt(&grid, &mix, budget) {
            prop_assert!(false, "built mixture rejected: {violation}");
        }
    }

    #[test]
    fn randomized_plans_meet_the_budget_and_never_lose_to_deterministic(
        d0 in 0.1f64..5.0,
        d1 in 0.1f64..5.0,
        amp in 0.1f64..5.0,
        snapshots in 1usize..40,
        noise in 0.1f64..5.0,
        neg_ln_pfa in 0.9f64..18.0,
        budget in 0.01f64..20.0,
    ) {
        let scenario = RadarScenario {
            gram: CMatrix::from_real_diag(&[d0, d1]),
            mean_square_amp: amp,
            snapshots,
            noise_psd: noise,
            pfa: (-neg_ln_pfa).exp(),
            power_budget: budget,
        };
        let mix = sensing_optimal_distribution(&scenario).expect("plan builds");

        prop_assert!(mix.atoms.len() <= 2);
        prop_assert!((mix.atoms.iter().map(|a| a.weight).sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(
            (mix.mean_power() - budget).abs() <= 1e-12 * budget.max(1.0),
            "mean power {} vs budget {budget}",
            mix.mean_power()
        );
        prop_assert!(
            mix.expected_pd >= mix.deterministic_pd - 1e-12,
            "randomization must never detect worse: {} vs {}",
            mix.expected_pd,
            mix.deterministic_pd
        );
        match mix.atoms.as_slice() {
            [single] => {
                prop_assert!(single.weight == 1.0);
                prop_assert!(
                    mix.tangent_power == 0.0
                        || budget >= mix.tangent_power * (1.0 - 1e-12),
                    "single atom below the tangent power {}",
                    mix.tangent_power
                );
            }
            [silence, burst] => {
                prop_assert_eq!(silence.power, 0.0);
                prop_assert_eq!(burst.power, mix.tangent_power);
                prop_assert!(budget < mix.tangent_power);
            }
            _ => unreachable!("at most two atoms"),
        }
    }
}
