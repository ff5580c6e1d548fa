mod common;

use common::{random_instance, Instance};
use proptest::prelude::*;
use uavsec::channel::{compute_link_gains, objective_p1, objective_p2};
use uavsec::oracle::{grid_search_position, GridSpec, PositionObjective};
use uavsec::position_opt::{build_surrogate, optimize_trajectory, solve_position_subproblem, DiskConstraint};
use uavsec::power_opt::{optimize_powers, power_given_rho};
use uavsec::{PowerPolicy, UavTrajectory};

fn random_policy(inst: &Instance, fractions: &[f64]) -> PowerPolicy {
    let m = inst.scenario.num_users();
    let n = inst.scenario.num_slots();
    let c = inst.constraints;
    // scale so every user meets the average budget exactly
    let powers = (0..m)
        .map(|i| {
            let raw: Vec<f64> = (0..n).map(|k| fractions[(i * n + k) % fractions.len()] * c.p_max()).collect();
            let avg = raw.iter().sum::<f64>() / n as f64;
            let scale = if avg > c.p_avg() { c.p_avg() / avg } else { 1.0 };
            raw.into_iter().map(|p| p * scale).collect()
        })
        .collect();
    PowerPolicy::new(powers, c)
}

fn random_trajectory(inst: &Instance, offsets: &[(f64, f64)]) -> UavTrajectory {
    let s = &inst.scenario;
    UavTrajectory::new(
        s.cluster_center
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let (r, t) = offsets[n % offsets.len()];
                let rr = s.disk_radius * r.sqrt();
                let th = std::f64::consts::TAU * t;
                uavsec::Point2::new(c.x + rr * th.cos(), c.y + rr * th.sin())
            })
            .collect(),
    )
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_non_increasing_in_rho(mu in 1e-3f64..1e6, eta in 1e-3f64..1e6, r1 in 0f64..1e6, r2 in 0f64..1e6, pmax in 1e-3f64..10.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = power_given_rho(mu, eta, lo, pmax);
        let b = power_given_rho(mu, eta, hi, pmax);
        prop_assert!((0.0..=pmax).contains(&a));
        prop_assert!((0.0..=pmax).contains(&b));
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn objectives_invariant_to_relabeling(seed in 0u64..10_000, fr in prop::collection::vec(0f64..1.0, 40), rot_u in 0usize..4, rot_e in 0usize..3) {
        let inst = random_instance(seed);
        let traj = UavTrajectory::at_cluster_centers(&inst.scenario);
        let policy = random_policy(&inst, &fr);
        let p2 = objective_p2(&traj, &policy, &inst.scenario, &inst.params);
        let p1 = objective_p1(&traj, &policy, &inst.scenario, &inst.params);

        let mut s = inst.scenario.clone();
        let mut powers = policy.powers.clone();
        let m = s.num_users();
        s.users.rotate_left(rot_u % m);
        powers.rotate_left(rot_u % m);
        let k = s.eavesdroppers.len();
        s.eavesdroppers.rotate_left(rot_e % k);
        s.eavesdroppers.reverse();
        let permuted = PowerPolicy::new(powers, inst.constraints);
        prop_assert!(close(p2, objective_p2(&traj, &permuted, &s, &inst.params), 1e-12));
        prop_assert!(close(p1, objective_p1(&traj, &permuted, &s, &inst.params), 1e-12));
    }

    #[test]
    fn p1_dominates_clamped_p2(seed in 0u64..10_000, fr in prop::collection::vec(0f64..1.0, 40)) {
        let inst = random_instance(seed);
        let traj = UavTrajectory::at_cluster_centers(&inst.scenario);
        let policy = random_policy(&inst, &fr);
        let gains = compute_link_gains(&inst.scenario, &traj, &inst.params);
        let p1 = gains.objective_p1(&policy.powers);
        let p2 = gains.objective_p2(&policy.powers);
        prop_assert!(p1 >= p2.max(0.0));
        for t in gains.taus(&policy.powers) {
            prop_assert!(t.is_finite());
        }
    }

    #[test]
    fn tau_monotone_in_distances(seed in 0u64..10_000, fr in prop::collection::vec(0f64..1.0, 40), push in 1.0f64..5.0) {
        let inst = random_instance(seed);
        let s = &inst.scenario;
        let traj = UavTrajectory::at_cluster_centers(s);
        let policy = random_policy(&inst, &fr);
        let base = compute_link_gains(s, &traj, &inst.params).taus(&policy.powers);

        // lifting every eavesdropper lengthens each wiretap link
        let mut far = s.clone();
        for e in &mut far.eavesdroppers {
            e.z += 10.0 * push;
        }
        // raising the UAV lengthens every legitimate link
        let mut high = s.clone();
        high.altitude *= push;
        let t_far = compute_link_gains(&far, &traj, &inst.params).taus(&policy.powers);
        let t_high = compute_link_gains(&high, &traj, &inst.params).taus(&policy.powers);
        for n in 0..base.len() {
            prop_assert!(t_far[n] >= base[n] - 1e-12 * base[n].abs().max(1.0));
            prop_assert!(t_high[n] <= base[n] + 1e-12 * base[n].abs().max(1.0));
        }
    }

    #[test]
    fn power_update_feasible_and_monotone(seed in 0u64..10_000, fr in prop::collection::vec(0f64..1.0, 40), offs in prop::collection::vec((0f64..1.0, 0f64..1.0), 10)) {
        let inst = random_instance(seed);
        let traj = random_trajectory(&inst, &offs);
        let prev = random_policy(&inst, &fr);
        prop_assume!(prev.is_feasible());
        let next = optimize_powers(&inst.scenario, &traj, &prev, &inst.params, &inst.constraints).unwrap();
        prop_assert!(next.is_feasible());
        let before = objective_p2(&traj, &prev, &inst.scenario, &inst.params);
        let after = objective_p2(&traj, &next, &inst.scenario, &inst.params);
        prop_assert!(after >= before, "{} < {}", after, before);
    }

    #[test]
    fn position_update_ascends_and_stays_feasible(seed in 0u64..10_000, fr in prop::collection::vec(0f64..1.0, 40), offs in prop::collection::vec((0f64..1.0, 0f64..1.0), 10)) {
        let inst = random_instance(seed);
        let traj = random_trajectory(&inst, &offs);
        let policy = random_policy(&inst, &fr);
        let next = optimize_trajectory(&inst.scenario, &traj, &policy, &inst.params);
        prop_assert!(next.max_disk_violation(&inst.scenario) <= 1e-9 * inst.scenario.disk_radius);
        let before = objective_p2(&traj, &policy, &inst.scenario, &inst.params);
        let after = objective_p2(&next, &policy, &inst.scenario, &inst.params);
        prop_assert!(after >= before, "{} < {}", after, before);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn grid_agrees_with_closed_form_for_interior_centroid(seed in 0u64..10_000, fr in prop::collection::vec(0.05f64..1.0, 40)) {
        let inst = random_instance(seed);
        let s = &inst.scenario;
        let traj = UavTrajectory::at_cluster_centers(s);
        let policy = random_policy(&inst, &fr);
        let n = 0;
        let coeffs = build_surrogate(s, &traj, &policy, &inst.params, n);
        let disk = DiskConstraint::for_slot(s, n);
        let centroid = coeffs.weighted_centroid();
        prop_assume!(centroid.is_some_and(|c| c.dist(&s.cluster_center[n]) < 0.9 * s.disk_radius));
        let exact = solve_position_subproblem(&coeffs, &disk);
        let grid = GridSpec { position_resolution: 201, power_levels: 2 };
        let f = |q| coeffs.evaluate(q);
        let best = grid_search_position(s, &policy, &inst.params, n, &grid, PositionObjective::Custom(&f)).unwrap();
        let diag = grid.cell_size(s.disk_radius) * std::f64::consts::SQRT_2;
        prop_assert!(best.position.dist(&exact) <= diag);
        prop_assert!(coeffs.evaluate(exact) >= best.objective - 1e-12 * best.objective.abs().max(1.0));
    }
}
