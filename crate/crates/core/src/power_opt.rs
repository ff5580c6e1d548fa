//! Secure water-filling for the power block.
//!
//! With the UAV trajectory fixed and the strongest eavesdropper of each slot
//! frozen, the average secrecy rate separates across users. Each user then
//! maximizes `sum_n ln(1 + mu_n P_n) - ln(1 + eta_n P_n)` subject to
//! `0 <= P_n <= P_max` and `mean(P) <= P_avg`. The stationarity condition
//! `mu/(1 + mu P) - eta/(1 + eta P) = rho` has a closed-form root for every
//! dual price `rho`, and the price itself is found by bisection on the
//! average-power constraint.

use crate::channel::{compute_link_gains, worst_eavesdropper, ChannelParams, LinkGains};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, UavTrajectory};

/// Relative slack allowed on the average-power constraint.
pub const AVG_POWER_RTOL: f64 = 1e-9;

const MAX_BISECTION_STEPS: usize = 200;
const RHO_WIDTH_RTOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConstraints {
    p_avg: f64,
    p_max: f64,
}

impl PowerConstraints {
    /// Requires `0 <= p_avg <= p_max`, both finite.
    pub fn new(p_avg: f64, p_max: f64) -> Result<Self> {
        if !(p_avg.is_finite() && p_max.is_finite()) {
            return Err(Error::InvalidConstraints("powers must be finite".into()));
        }
        if p_avg < 0.0 || p_max < 0.0 {
            return Err(Error::InvalidConstraints("powers must be non-negative".into()));
        }
        if p_avg > p_max {
            return Err(Error::InvalidConstraints(format!(
                "average power {p_avg} exceeds peak power {p_max}"
            )));
        }
        Ok(Self { p_avg, p_max })
    }

    pub fn p_avg(&self) -> f64 {
        self.p_avg
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Constant power that meets both constraints with equality where possible.
    pub fn uniform_level(&self) -> f64 {
        self.p_avg.min(self.p_max)
    }
}

/// Uplink powers `powers[i][n]` in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPolicy {
    pub powers: Vec<Vec<f64>>,
    pub constraints: PowerConstraints,
}

impl PowerPolicy {
    pub fn new(powers: Vec<Vec<f64>>, constraints: PowerConstraints) -> Self {
        Self {
            powers,
            constraints,
        }
    }

    pub fn uniform(num_users: usize, num_slots: usize, constraints: PowerConstraints) -> Self {
        let level = constraints.uniform_level();
        Self::new(vec![vec![level; num_slots]; num_users], constraints)
    }

    pub fn zeros(num_users: usize, num_slots: usize, constraints: PowerConstraints) -> Self {
        Self::new(vec![vec![0.0; num_slots]; num_users], constraints)
    }

    pub fn num_users(&self) -> usize {
        self.powers.len()
    }

    pub fn num_slots(&self) -> usize {
        self.powers.first().map_or(0, Vec::len)
    }

    /// Powers of all users in slot `n`.
    pub fn slot(&self, n: usize) -> Vec<f64> {
        self.powers.iter().map(|row| row[n]).collect()
    }

    pub fn average_power(&self, user: usize) -> f64 {
        let row = &self.powers[user];
        row.iter().sum::<f64>() / row.len() as f64
    }

    /// Peak and average constraints hold for every user, the latter up to
    /// [`AVG_POWER_RTOL`].
    pub fn is_feasible(&self) -> bool {
        let c = &self.constraints;
        let peak_ok = self
            .powers
            .iter()
            .flatten()
            .all(|&p| p.is_finite() && (0.0..=c.p_max).contains(&p));
        let avg_ok = (0..self.num_users())
            .all(|i| self.average_power(i) <= c.p_avg * (1.0 + AVG_POWER_RTOL) + f64::MIN_POSITIVE);
        peak_ok && avg_ok
    }
}

/// Closed-form secure water-filling power for one slot at dual price `rho`.
///
/// Zero whenever the eavesdropper's per-watt SNR is at least the UAV's. At
/// `rho == 0` the unconstrained root is unbounded and the peak power is used.
pub fn power_given_rho(mu: f64, eta: f64, rho: f64, p_max: f64) -> f64 {
    if !(mu > eta) {
        return 0.0;
    }
    if rho <= 0.0 {
        return p_max;
    }
    let gap = mu - eta - rho;
    if gap <= 0.0 {
        return 0.0;
    }
    let half_diff = 0.5 / eta - 0.5 / mu;
    let half_sum = 0.5 / eta + 0.5 / mu;
    let b = (1.0 / eta - 1.0 / mu) / rho;
    // sqrt(a^2 + b) - c rewritten as (a^2 + b - c^2) / (sqrt(a^2 + b) + c);
    // a^2 - c^2 = -1/(eta mu) so the numerator is exact up to one rounding
    let root = half_diff.hypot(b.sqrt());
    let p = gap / (rho * eta * mu * (root + half_sum));
    p.min(p_max)
}

/// Outcome of the per-user dual bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolve {
    pub rho: f64,
    pub powers: Vec<f64>,
    pub avg_power_achieved: f64,
    pub iterations: usize,
    /// `p_avg - avg_power_achieved`, non-negative.
    pub residual: f64,
}

fn powers_at(mu_row: &[f64], eta_row: &[f64], rho: f64, p_max: f64) -> Vec<f64> {
    mu_row
        .iter()
        .zip(eta_row)
        .map(|(&mu, &eta)| power_given_rho(mu, eta, rho, p_max))
        .collect()
}

fn average(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Finds the smallest dual price whose water-filling powers meet the
/// average-power budget.
pub fn solve_rho(
    mu_row: &[f64],
    eta_row: &[f64],
    constraints: &PowerConstraints,
) -> Result<DualSolve> {
    if mu_row.is_empty() || mu_row.len() != eta_row.len() {
        return Err(Error::Dimension(format!(
            "gain rows must be non-empty and equal length, got {} and {}",
            mu_row.len(),
            eta_row.len()
        )));
    }
    let p_avg = constraints.p_avg;
    let p_max = constraints.p_max;
    let done = |rho: f64, powers: Vec<f64>, iterations: usize| {
        let avg = average(&powers);
        DualSolve {
            rho,
            avg_power_achieved: avg,
            residual: p_avg - avg,
            powers,
            iterations,
        }
    };

    let unconstrained = powers_at(mu_row, eta_row, 0.0, p_max);
    if average(&unconstrained) <= p_avg {
        return Ok(done(0.0, unconstrained, 0));
    }

    // at rho >= mu every slot is shut off
    let mut hi = mu_row.iter().copied().fold(0.0, f64::max);
    let mut hi_powers = powers_at(mu_row, eta_row, hi, p_max);
    while average(&hi_powers) > p_avg {
        hi *= 2.0;
        hi_powers = powers_at(mu_row, eta_row, hi, p_max);
    }
    let mut lo = 0.0;
    let tol = AVG_POWER_RTOL * p_avg;
    let mut iterations = 0;
    while iterations < MAX_BISECTION_STEPS {
        if p_avg - average(&hi_powers) <= tol || hi - lo <= RHO_WIDTH_RTOL * hi {
            break;
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let mid_powers = powers_at(mu_row, eta_row, mid, p_max);
        if average(&mid_powers) > p_avg {
            lo = mid;
        } else {
            hi = mid;
            hi_powers = mid_powers;
        }
    }
    Ok(done(hi, hi_powers, iterations))
}

/// Result of one power-block update.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerUpdate {
    pub policy: PowerPolicy,
    /// Strongest eavesdropper per slot at the previous powers.
    pub frozen_eavesdroppers: Vec<usize>,
    pub duals: Vec<DualSolve>,
    /// The candidate lowered the objective and was discarded.
    pub rejected: bool,
}

/// Power update on precomputed gains.
pub fn update_powers(gains: &LinkGains, prev: &PowerPolicy) -> Result<PowerUpdate> {
    let constraints = prev.constraints;
    let num_slots = gains.num_slots();
    let frozen: Vec<usize> = (0..num_slots)
        .map(|n| worst_eavesdropper(&prev.slot(n), gains, n))
        .collect();

    let mut duals = Vec::with_capacity(gains.num_users());
    for (mu_row, eta_user) in gains.mu.iter().zip(&gains.eta) {
        let eta_row: Vec<f64> = frozen.iter().enumerate().map(|(n, &j)| eta_user[j][n]).collect();
        duals.push(solve_rho(mu_row, &eta_row, &constraints)?);
    }
    let candidate = PowerPolicy::new(duals.iter().map(|d| d.powers.clone()).collect(), constraints);

    let rejected = gains.objective_p2(&candidate.powers) < gains.objective_p2(&prev.powers);
    Ok(PowerUpdate {
        policy: if rejected { prev.clone() } else { candidate },
        frozen_eavesdroppers: frozen,
        duals,
        rejected,
    })
}

/// Water-filling update of every user's powers at a fixed trajectory.
///
/// Never lowers the unclamped objective: when the strongest eavesdropper
/// changes under the new powers and the objective drops, `prev` is returned.
pub fn optimize_powers(
    scenario: &Scenario,
    trajectory: &UavTrajectory,
    prev: &PowerPolicy,
    params: &ChannelParams,
    constraints: &PowerConstraints,
) -> Result<PowerPolicy> {
    let gains = compute_link_gains(scenario, trajectory, params);
    let prev = PowerPolicy::new(prev.powers.clone(), *constraints);
    Ok(update_powers(&gains, &prev)?.policy)
}
