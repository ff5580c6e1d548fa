//! Line-of-sight path loss, link capacities and the secrecy objectives.
//!
//! The user-to-UAV (air-to-ground) link decays with exponent 2 and the
//! user-to-eavesdropper (ground-to-ground) link with exponent 4. Every
//! capacity is in bits/s/Hz. All objective evaluation in the crate goes
//! through [`LinkGains`] so that the solver, its guards and the reported
//! trace agree bit for bit.

use std::f64::consts::LN_2;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::power_opt::PowerPolicy;
use crate::scenario::{Scenario, UavTrajectory, Vec3};

pub const A2G_EXPONENT: i32 = 2;
pub const G2G_EXPONENT: i32 = 4;

/// Distances below the 1 m reference point are clamped to it.
pub const D_MIN: f64 = 1.0;

static CLAMPED_DISTANCES: AtomicU64 = AtomicU64::new(0);

/// Number of distance evaluations clamped to [`D_MIN`] since process start.
pub fn clamped_distance_count() -> u64 {
    CLAMPED_DISTANCES.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    beta0: f64,
    sigma2: f64,
    lambda0: f64,
}

impl ChannelParams {
    pub fn new(beta0: f64, sigma2: f64) -> Result<Self> {
        if !(beta0.is_finite() && beta0 > 0.0) {
            return Err(Error::InvalidConfig {
                field: "beta0",
                reason: "must be finite and positive".into(),
            });
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidConfig {
                field: "sigma2",
                reason: "must be finite and positive".into(),
            });
        }
        Ok(Self {
            beta0,
            sigma2,
            lambda0: beta0 / sigma2,
        })
    }

    /// Unit noise power, so `beta0 == lambda0`.
    pub fn from_lambda0(lambda0: f64) -> Result<Self> {
        Self::new(lambda0, 1.0).map_err(|_| Error::InvalidConfig {
            field: "lambda0",
            reason: "must be finite and positive".into(),
        })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Reference SNR at 1 m.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
}

/// Squared distance with the [`D_MIN`] guard applied.
pub fn clamped_dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d2 = a.dist2(b);
    if d2 < D_MIN * D_MIN {
        CLAMPED_DISTANCES.fetch_add(1, Ordering::Relaxed);
        D_MIN * D_MIN
    } else {
        d2
    }
}

pub fn a2g_gain(user: &Vec3, uav: &Vec3, params: &ChannelParams) -> f64 {
    params.beta0 / clamped_dist2(user, uav)
}

pub fn g2g_gain(user: &Vec3, eaves: &Vec3, params: &ChannelParams) -> f64 {
    let d2 = clamped_dist2(user, eaves);
    params.beta0 / (d2 * d2)
}

/// `log2(1 + snr)`.
#[inline]
pub fn rate(snr: f64) -> f64 {
    snr.ln_1p() / LN_2
}

pub fn legit_capacity(power: f64, d2: f64, params: &ChannelParams) -> f64 {
    rate(params.lambda0 * power / d2)
}

pub fn eaves_capacity(power: f64, d4: f64, params: &ChannelParams) -> f64 {
    rate(params.lambda0 * power / d4)
}

/// Per-watt SNRs of every link at a given trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    /// `mu[i][n] = lambda0 / d_iu^2`.
    pub mu: Vec<Vec<f64>>,
    /// `eta[i][j][n] = lambda0 / d_ij^4`.
    pub eta: Vec<Vec<Vec<f64>>>,
}

impl LinkGains {
    pub fn num_users(&self) -> usize {
        self.mu.len()
    }

    pub fn num_slots(&self) -> usize {
        self.mu.first().map_or(0, Vec::len)
    }

    pub fn num_eavesdroppers(&self) -> usize {
        self.eta.first().map_or(0, Vec::len)
    }

    /// Sum of legitimate rates in slot `n`.
    pub fn legit_sum(&self, powers: &[Vec<f64>], n: usize) -> f64 {
        self.mu
            .iter()
            .zip(powers)
            .map(|(mu, p)| rate(mu[n] * p[n]))
            .sum()
    }

    /// Sum of wiretap rates at eavesdropper `j` in slot `n`.
    pub fn wiretap_sum(&self, powers: &[Vec<f64>], j: usize, n: usize) -> f64 {
        self.eta
            .iter()
            .zip(powers)
            .map(|(eta, p)| rate(eta[j][n] * p[n]))
            .sum()
    }

    /// Index and rate of the strongest eavesdropper in slot `n`; lowest index wins ties.
    pub fn worst_wiretap(&self, powers: &[Vec<f64>], n: usize) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..self.num_eavesdroppers() {
            let c = self.wiretap_sum(powers, j, n);
            if c > best.1 {
                best = (j, c);
            }
        }
        best
    }

    pub fn tau(&self, powers: &[Vec<f64>], n: usize) -> f64 {
        self.legit_sum(powers, n) - self.worst_wiretap(powers, n).1
    }

    pub fn taus(&self, powers: &[Vec<f64>]) -> Vec<f64> {
        (0..self.num_slots()).map(|n| self.tau(powers, n)).collect()
    }

    /// Unclamped average secrecy rate.
    pub fn objective_p2(&self, powers: &[Vec<f64>]) -> f64 {
        mean(self.taus(powers).into_iter())
    }

    /// Average secrecy rate with each slot clamped at zero.
    pub fn objective_p1(&self, powers: &[Vec<f64>]) -> f64 {
        mean(self.taus(powers).into_iter().map(|t| t.max(0.0)))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

pub fn compute_link_gains(
    scenario: &Scenario,
    trajectory: &UavTrajectory,
    params: &ChannelParams,
) -> LinkGains {
    let lambda0 = params.lambda0;
    let h = scenario.altitude;
    let mu = scenario
        .users
        .iter()
        .map(|track| {
            track
                .iter()
                .zip(&trajectory.positions)
                .map(|(u, p)| lambda0 / clamped_dist2(u, &p.at_height(h)))
                .collect()
        })
        .collect();
    let eta = scenario
        .users
        .iter()
        .map(|track| {
            scenario
                .eavesdroppers
                .iter()
                .map(|e| {
                    track
                        .iter()
                        .map(|u| {
                            let d2 = clamped_dist2(u, e);
                            lambda0 / (d2 * d2)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    LinkGains { mu, eta }
}

/// Strongest eavesdropper in slot `n` given that slot's per-user powers.
pub fn worst_eavesdropper(slot_powers: &[f64], gains: &LinkGains, n: usize) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for j in 0..gains.num_eavesdroppers() {
        let c: f64 = gains
            .eta
            .iter()
            .zip(slot_powers)
            .map(|(eta, p)| rate(eta[j][n] * p))
            .sum();
        if c > best.1 {
            best = (j, c);
        }
    }
    best.0
}

/// Secrecy rate of slot `n` before clamping; negative when an eavesdropper
/// out-hears the UAV.
pub fn tau(
    n: usize,
    trajectory: &UavTrajectory,
    powers: &PowerPolicy,
    scenario: &Scenario,
    params: &ChannelParams,
) -> f64 {
    compute_link_gains(scenario, trajectory, params).tau(&powers.powers, n)
}

pub fn objective_p2(
    trajectory: &UavTrajectory,
    powers: &PowerPolicy,
    scenario: &Scenario,
    params: &ChannelParams,
) -> f64 {
    compute_link_gains(scenario, trajectory, params).objective_p2(&powers.powers)
}

pub fn objective_p1(
    trajectory: &UavTrajectory,
    powers: &PowerPolicy,
    scenario: &Scenario,
    params: &ChannelParams,
) -> f64 {
    compute_link_gains(scenario, trajectory, params).objective_p1(&powers.powers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_opt::PowerConstraints;
    use crate::scenario::Point2;

    fn unit() -> ChannelParams {
        ChannelParams::from_lambda0(1.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn policy(powers: Vec<Vec<f64>>) -> PowerPolicy {
        PowerPolicy::new(powers, PowerConstraints::new(100.0, 100.0).unwrap())
    }

    /// One user at the origin, UAV straight above at `h`, eavesdropper on
    /// the ground at distance `e`.
    fn one_by_one(h: f64, e: f64) -> (Scenario, UavTrajectory) {
        let s = Scenario {
            users: vec![vec![Vec3::new(0.0, 0.0, 0.0)]],
            eavesdroppers: vec![Vec3::new(e, 0.0, 0.0)],
            cluster_center: vec![Point2::new(0.0, 0.0)],
            disk_radius: 1.0,
            altitude: h,
        };
        let t = UavTrajectory::at_cluster_centers(&s);
        (s, t)
    }

    #[test]
    fn a2g_examples() {
        let p = unit();
        let o = Vec3::new(0.0, 0.0, 0.0);
        assert_eq!(a2g_gain(&o, &Vec3::new(0.0, 0.0, 1.0), &p), 1.0);
        assert_eq!(a2g_gain(&o, &Vec3::new(0.0, 0.0, 2.0), &p), 0.25);
        let p = ChannelParams::new(1e-4, 1.0).unwrap();
        let g = a2g_gain(&o, &Vec3::new(30.0, 40.0, 0.0), &p);
        assert!(close(g, 4e-8, 1e-20));
    }

    #[test]
    fn g2g_examples() {
        let p = unit();
        let o = Vec3::new(0.0, 0.0, 0.0);
        assert_eq!(g2g_gain(&o, &Vec3::new(1.0, 0.0, 0.0), &p), 1.0);
        assert_eq!(g2g_gain(&o, &Vec3::new(2.0, 0.0, 0.0), &p), 1.0 / 16.0);
        assert!(close(g2g_gain(&o, &Vec3::new(10.0, 0.0, 0.0), &p), 1e-4, 1e-18));
    }

    #[test]
    fn clamp_below_reference_distance() {
        let p = unit();
        let o = Vec3::new(0.0, 0.0, 0.0);
        let before = clamped_distance_count();
        assert_eq!(g2g_gain(&o, &o, &p), 1.0);
        assert_eq!(a2g_gain(&o, &Vec3::new(0.0, 0.5, 0.0), &p), 1.0);
        assert!(clamped_distance_count() >= before + 2);
    }

    #[test]
    fn capacities() {
        let p = unit();
        assert_eq!(legit_capacity(0.0, 3.0, &p), 0.0);
        assert!(close(legit_capacity(7.0, 1.0, &p), 3.0, 1e-14));
        assert!(close(legit_capacity(1.0, 1.0, &p), 1.0, 1e-15));
        assert_eq!(eaves_capacity(0.0, 3.0, &p), 0.0);
        let d = 7f64.powf(0.25);
        assert!(close(eaves_capacity(7.0, d.powi(4), &p), 1.0, 1e-14));
        assert!(close(eaves_capacity(15.0, 1.0, &p), 4.0, 1e-14));
    }

    #[test]
    fn params_lambda0() {
        let p = ChannelParams::new(2e-3, 4e-7).unwrap();
        assert_eq!(p.lambda0(), 2e-3 / 4e-7);
        assert!(ChannelParams::new(0.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, -1.0).is_err());
        assert!(ChannelParams::from_lambda0(f64::NAN).is_err());
    }

    #[test]
    fn link_gains_examples() {
        let (s, t) = one_by_one(1.0, 0.0);
        let g = compute_link_gains(&s, &t, &unit());
        assert_eq!(g.mu[0][0], 1.0);
        // eavesdropper sits on the user: clamped to d_min
        assert_eq!(g.eta[0][0][0], 1.0);
    }

    #[test]
    fn worst_eavesdropper_examples() {
        let (s, t) = one_by_one(10.0, 5.0);
        let g = compute_link_gains(&s, &t, &unit());
        assert_eq!(worst_eavesdropper(&[1.0], &g, 0), 0);

        let mut s2 = s.clone();
        s2.eavesdroppers = vec![Vec3::new(50.0, 0.0, 0.0), Vec3::new(5.0, 0.0, 0.0)];
        let g = compute_link_gains(&s2, &t, &unit());
        assert_eq!(worst_eavesdropper(&[1.0], &g, 0), 1);

        // equal distances tie: lowest index
        s2.eavesdroppers = vec![Vec3::new(0.0, 5.0, 0.0), Vec3::new(5.0, 0.0, 0.0)];
        let g = compute_link_gains(&s2, &t, &unit());
        assert_eq!(worst_eavesdropper(&[1.0], &g, 0), 0);
    }

    #[test]
    fn worst_eavesdropper_matches_brute_force() {
        let s = Scenario {
            users: vec![vec![Vec3::new(0.0, 0.0, 0.0)], vec![Vec3::new(4.0, 1.0, 0.0)]],
            eavesdroppers: vec![Vec3::new(-3.0, 0.0, 0.0), Vec3::new(6.0, 3.0, 0.0)],
            cluster_center: vec![Point2::new(0.0, 0.0)],
            disk_radius: 1.0,
            altitude: 10.0,
        };
        let t = UavTrajectory::at_cluster_centers(&s);
        let p = ChannelParams::from_lambda0(100.0).unwrap();
        let g = compute_link_gains(&s, &t, &p);
        for powers in [[1.0, 1.0], [5.0, 0.1], [0.1, 5.0], [0.0, 2.0]] {
            let sums: Vec<f64> = s
                .eavesdroppers
                .iter()
                .map(|e| {
                    s.users
                        .iter()
                        .zip(powers)
                        .map(|(u, pw)| eaves_capacity(pw, u[0].dist2(e).powi(2), &p))
                        .sum()
                })
                .collect();
            let expected = if sums[1] > sums[0] { 1 } else { 0 };
            assert_eq!(worst_eavesdropper(&powers, &g, 0), expected, "{powers:?}");
        }
    }

    #[test]
    fn tau_examples() {
        let p = unit();
        let (s, t) = one_by_one(1.0, 7f64.powf(0.25));
        assert_eq!(tau(0, &t, &policy(vec![vec![0.0]]), &s, &p), 0.0);
        assert!(close(tau(0, &t, &policy(vec![vec![7.0]]), &s, &p), 2.0, 1e-12));

        // user 10 m from the UAV and 1 m from the eavesdropper
        let (s, t) = one_by_one(10.0, 1.0);
        assert!(tau(0, &t, &policy(vec![vec![10.0]]), &s, &p) < 0.0);
    }

    #[test]
    fn objective_examples() {
        let p = unit();
        let (s, t) = one_by_one(1.0, 7f64.powf(0.25));
        let pol = policy(vec![vec![7.0]]);
        let t0 = tau(0, &t, &pol, &s, &p);
        assert_eq!(objective_p2(&t, &pol, &s, &p), t0);
        assert_eq!(objective_p1(&t, &pol, &s, &p), t0);
        let zero = policy(vec![vec![0.0]]);
        assert_eq!(objective_p2(&t, &zero, &s, &p), 0.0);

        let (s, t) = one_by_one(10.0, 1.0);
        let pol = policy(vec![vec![10.0]]);
        assert!(objective_p2(&t, &pol, &s, &p) < 0.0);
        assert_eq!(objective_p1(&t, &pol, &s, &p), 0.0);
    }

    #[test]
    fn mixed_sign_slots_clamp() {
        // slot 0: tau = 3 - 1 = 2; slot 1: tau = 0 - 1 = -1
        let s = Scenario {
            users: vec![vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0)]],
            eavesdroppers: vec![Vec3::new(7f64.powf(0.25), 0.0, 0.0)],
            cluster_center: vec![Point2::new(0.0, 0.0); 2],
            disk_radius: 1e6,
            altitude: 1.0,
        };
        let mut t = UavTrajectory::at_cluster_centers(&s);
        // far enough that the slot-1 legitimate rate is ~1e-9
        t.positions[1] = Point2::new(1e5, 0.0);
        let g = compute_link_gains(&s, &t, &unit());
        let taus = g.taus(&[vec![7.0, 7.0]]);
        assert!(close(taus[0], 2.0, 1e-12));
        assert!(close(taus[1], -1.0, 1e-8));
        let p1 = g.objective_p1(&[vec![7.0, 7.0]]);
        assert!(close(p1, 1.0, 1e-12));
        assert!(p1 >= g.objective_p2(&[vec![7.0, 7.0]]));
    }

    #[test]
    fn link_gains_match_elementwise_gains() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut v = || Vec3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), 0.0);
        let s = Scenario {
            users: (0..3).map(|_| (0..4).map(|_| v()).collect()).collect(),
            eavesdroppers: (0..2).map(|_| v()).collect(),
            cluster_center: (0..4).map(|_| v().xy()).collect(),
            disk_radius: 10.0,
            altitude: 30.0,
        };
        let t = UavTrajectory::at_cluster_centers(&s);
        let p = ChannelParams::from_lambda0(1234.5).unwrap();
        let g = compute_link_gains(&s, &t, &p);
        for i in 0..3 {
            for n in 0..4 {
                let uav = t.uav_position(n, s.altitude);
                assert_eq!(g.mu[i][n], a2g_gain(&s.users[i][n], &uav, &p));
                for j in 0..2 {
                    assert_eq!(g.eta[i][j][n], g2g_gain(&s.users[i][n], &s.eavesdroppers[j], &p));
                }
            }
        }
    }
}
