#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavsec::scenario::generate_scenario;
use uavsec::{ChannelParams, Point2, PowerConstraints, Scenario, ScenarioConfig};

/// One randomized instance of the acceptance family.
pub struct Instance {
    pub seed: u64,
    pub scenario: Scenario,
    pub params: ChannelParams,
    pub constraints: PowerConstraints,
}

/// M in 1..=4, K in 1..=3, N in 1..=10, geometry and link budget drawn from `seed`.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ec0_0000 + seed);
    let field_size = 200.0;
    let cfg = ScenarioConfig {
        num_users: rng.gen_range(1..=4),
        num_eavesdroppers: rng.gen_range(1..=3),
        num_slots: rng.gen_range(1..=10),
        cluster_radius: rng.gen_range(10.0..60.0),
        uav_disk_radius: rng.gen_range(10.0..50.0),
        uav_altitude: rng.gen_range(30.0..120.0),
        field_size,
        cluster_start: Point2::new(rng.gen_range(70.0..130.0), rng.gen_range(70.0..130.0)),
        cluster_velocity: Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
        user_height: 1.5,
        eaves_height: 1.5,
        rng_seed: rng.gen(),
    };
    let lambda0 = 10f64.powf(rng.gen_range(3.0..6.0));
    let p_avg = rng.gen_range(0.05..0.5);
    let p_max = p_avg * rng.gen_range(1.0..3.0);
    Instance {
        seed,
        scenario: generate_scenario(&cfg).expect("valid config"),
        params: ChannelParams::from_lambda0(lambda0).expect("positive lambda0"),
        constraints: PowerConstraints::new(p_avg, p_max).expect("p_avg <= p_max"),
    }
}

/// Some eavesdropper lies in the axis-aligned box spanned by all user positions.
pub fn eavesdropper_inside_cluster_box(s: &Scenario) -> bool {
    let pts = s.users.iter().flatten();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    s.eavesdroppers
        .iter()
        .any(|e| (x0..=x1).contains(&e.x) && (y0..=y1).contains(&e.y))
}
