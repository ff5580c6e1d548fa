//! Successive convex approximation for the trajectory block.
//!
//! For user `i` the legitimate rate `log2(1 + Pi / psi)` is convex in the
//! squared distance `psi = d_iu^2`, so its tangent at the current distance
//! is a global under-estimator. Substituting `psi = |q - u_i|^2 + (H - z_i)^2`
//! turns the tangent into a concave quadratic in the horizontal UAV
//! position `q` with isotropic Hessian. Maximizing the sum of these over the
//! disk around the cluster center is a projection of the weighted user
//! centroid onto the disk.

use std::f64::consts::LN_2;

use crate::channel::{clamped_dist2, compute_link_gains, rate, ChannelParams};
use crate::power_opt::PowerPolicy;
use crate::scenario::{Point2, Scenario, UavTrajectory, Vec3};

/// Tangent surrogate of one slot's legitimate rate sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoefficients {
    pub slot: usize,
    /// Curvature weight per user, `Pi / (ln2 (psi0^2 + Pi psi0))`.
    pub alpha: Vec<f64>,
    /// Offset per user, `log2(1 + Pi/psi0) + alpha psi0`.
    pub constant: Vec<f64>,
    pub expansion_point: Point2,
    pub users: Vec<Vec3>,
    pub altitude: f64,
}

impl SurrogateCoefficients {
    pub fn evaluate(&self, q: Point2) -> f64 {
        let uav = q.at_height(self.altitude);
        self.users
            .iter()
            .zip(self.alpha.iter().zip(&self.constant))
            .map(|(u, (a, c))| c - a * u.dist2(&uav))
            .sum()
    }

    /// Unconstrained maximizer, `None` when every weight is zero.
    pub fn weighted_centroid(&self) -> Option<Point2> {
        let total: f64 = self.alpha.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let (sx, sy) = self
            .users
            .iter()
            .zip(&self.alpha)
            .fold((0.0, 0.0), |(sx, sy), (u, a)| (sx + a * u.x, sy + a * u.y));
        Some(Point2::new(sx / total, sy / total))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskConstraint {
    pub center: Point2,
    pub radius: f64,
}

impl DiskConstraint {
    pub fn new(center: Point2, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Self { center, radius }
    }

    pub fn for_slot(scenario: &Scenario, n: usize) -> Self {
        Self::new(scenario.cluster_center[n], scenario.disk_radius)
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        p.dist(&self.center) <= self.radius + tol
    }

    /// Nearest point of the disk.
    pub fn project(&self, p: Point2) -> Point2 {
        let d = p.dist(&self.center);
        if d <= self.radius {
            return p;
        }
        let s = self.radius / d;
        let q = Point2::new(
            self.center.x + s * (p.x - self.center.x),
            self.center.y + s * (p.y - self.center.y),
        );
        // rounding can leave q a hair outside
        if q.dist(&self.center) > self.radius {
            let s = s * (1.0 - f64::EPSILON);
            Point2::new(
                self.center.x + s * (p.x - self.center.x),
                self.center.y + s * (p.y - self.center.y),
            )
        } else {
            q
        }
    }
}

pub fn build_surrogate(
    scenario: &Scenario,
    trajectory_fea: &UavTrajectory,
    powers: &PowerPolicy,
    params: &ChannelParams,
    n: usize,
) -> SurrogateCoefficients {
    let expansion_point = trajectory_fea.positions[n];
    let uav = expansion_point.at_height(scenario.altitude);
    let lambda0 = params.lambda0();
    let users: Vec<Vec3> = scenario.users.iter().map(|track| track[n]).collect();
    let (alpha, constant) = users
        .iter()
        .zip(&powers.powers)
        .map(|(u, row)| {
            let snr_num = lambda0 * row[n];
            let psi0 = clamped_dist2(u, &uav);
            let alpha = snr_num / (LN_2 * (psi0 * psi0 + snr_num * psi0));
            // mu * P with mu = lambda0 / psi0, matching LinkGains
            let value = rate(lambda0 / psi0 * row[n]);
            (alpha, value + alpha * psi0)
        })
        .unzip();
    SurrogateCoefficients {
        slot: n,
        alpha,
        constant,
        expansion_point,
        users,
        altitude: scenario.altitude,
    }
}

/// Exact maximizer of the surrogate over the disk.
pub fn solve_position_subproblem(coeffs: &SurrogateCoefficients, disk: &DiskConstraint) -> Point2 {
    match coeffs.weighted_centroid() {
        Some(c) => disk.project(c),
        None => coeffs.expansion_point,
    }
}

/// One SCA step for every slot.
///
/// A slot keeps its old position if the true legitimate rate would drop,
/// which only rounding can cause.
pub fn optimize_trajectory(
    scenario: &Scenario,
    trajectory_fea: &UavTrajectory,
    powers: &PowerPolicy,
    params: &ChannelParams,
) -> UavTrajectory {
    let candidate = UavTrajectory::new(
        (0..scenario.num_slots())
            .map(|n| {
                let coeffs = build_surrogate(scenario, trajectory_fea, powers, params, n);
                solve_position_subproblem(&coeffs, &DiskConstraint::for_slot(scenario, n))
            })
            .collect(),
    );
    let old_gains = compute_link_gains(scenario, trajectory_fea, params);
    let new_gains = compute_link_gains(scenario, &candidate, params);
    let positions = (0..scenario.num_slots())
        .map(|n| {
            let new_rate = new_gains.legit_sum(&powers.powers, n);
            let old_rate = old_gains.legit_sum(&powers.powers, n);
            if new_rate < old_rate {
                trajectory_fea.positions[n]
            } else {
                candidate.positions[n]
            }
        })
        .collect();
    UavTrajectory::new(positions)
}
