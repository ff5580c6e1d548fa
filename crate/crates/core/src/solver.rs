//! Block coordinate descent over the trajectory and power blocks, the
//! zero-power post-processing for negative-secrecy slots, and the
//! restricted baseline strategies.

use std::fmt;
use std::str::FromStr;

use crate::channel::{compute_link_gains, ChannelParams};
use crate::error::{Error, Result};
use crate::position_opt::optimize_trajectory;
use crate::power_opt::{update_powers, PowerConstraints, PowerPolicy};
use crate::scenario::{validate_scenario, Scenario, UavTrajectory};

/// Floor for the denominator of the relative-improvement test.
pub const REL_IMPROVEMENT_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialTrajectory {
    ClusterCenter,
    Custom(UavTrajectory),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPowers {
    /// `min(P_avg, P_max)` in every slot.
    UniformFeasible,
    Custom(PowerPolicy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop once the relative improvement of an iteration falls below this.
    pub chi: f64,
    pub max_iterations: usize,
    pub initial_trajectory: InitialTrajectory,
    pub initial_powers: InitialPowers,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            chi: 1e-4,
            max_iterations: 100,
            initial_trajectory: InitialTrajectory::ClusterCenter,
            initial_powers: InitialPowers::UniformFeasible,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi.is_finite() && self.chi > 0.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "chi must be finite and positive, got {}",
                self.chi
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSolverConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub trajectory: UavTrajectory,
    pub powers: PowerPolicy,
    /// Unclamped objective at the initial point followed by one entry per iteration.
    pub objective_trace: Vec<f64>,
    /// Clamped objective after post-processing.
    pub p1_objective: f64,
    /// Unclamped objective after post-processing.
    pub p2_objective: f64,
    /// Clamped objective before the negative slots were silenced.
    pub p1_before_zeroing: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(user, slot)` pairs whose nonzero power was set to zero.
    pub zeroed_slots: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    /// UAV over the cluster center, uniform power.
    FixedFull,
    /// Trajectory optimized, uniform power.
    PositionOnly,
    /// Powers optimized, UAV over the cluster center.
    PowerOnly,
    Joint,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::FixedFull,
        Strategy::PositionOnly,
        Strategy::PowerOnly,
        Strategy::Joint,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::FixedFull => "fixed_full",
            Strategy::PositionOnly => "position_only",
            Strategy::PowerOnly => "power_only",
            Strategy::Joint => "joint",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Debug, Clone, Copy)]
struct Blocks {
    position: bool,
    power: bool,
}

fn check_inputs(scenario: &Scenario, config: &SolverConfig) -> Result<()> {
    validate_scenario(scenario).map_err(Error::InvalidScenario)?;
    config.validate()
}

fn initial_point(
    scenario: &Scenario,
    constraints: &PowerConstraints,
    config: &SolverConfig,
) -> Result<(UavTrajectory, PowerPolicy)> {
    let (m, n) = (scenario.num_users(), scenario.num_slots());
    let trajectory = match &config.initial_trajectory {
        InitialTrajectory::ClusterCenter => UavTrajectory::at_cluster_centers(scenario),
        InitialTrajectory::Custom(t) => {
            if t.num_slots() != n {
                return Err(Error::Dimension(format!(
                    "initial trajectory has {} slots, scenario has {n}",
                    t.num_slots()
                )));
            }
            if t.max_disk_violation(scenario) > 1e-9 {
                return Err(Error::InvalidSolverConfig("initial trajectory leaves the disk".into()));
            }
            t.clone()
        }
    };
    let powers = match &config.initial_powers {
        InitialPowers::UniformFeasible => PowerPolicy::uniform(m, n, *constraints),
        InitialPowers::Custom(p) => {
            let p = PowerPolicy::new(p.powers.clone(), *constraints);
            if p.num_users() != m || p.powers.iter().any(|row| row.len() != n) {
                return Err(Error::Dimension(format!(
                    "initial powers must be {m}x{n}"
                )));
            }
            if !p.is_feasible() {
                return Err(Error::InvalidConstraints("initial powers are infeasible".into()));
            }
            p
        }
    };
    Ok((trajectory, powers))
}

fn run_bcd(
    scenario: &Scenario,
    params: &ChannelParams,
    constraints: &PowerConstraints,
    config: &SolverConfig,
    blocks: Blocks,
) -> Result<SolveResult> {
    check_inputs(scenario, config)?;
    let (mut trajectory, mut powers) = initial_point(scenario, constraints, config)?;

    let mut gains = compute_link_gains(scenario, &trajectory, params);
    let mut trace = vec![gains.objective_p2(&powers.powers)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        if blocks.position {
            trajectory = optimize_trajectory(scenario, &trajectory, &powers, params);
            gains = compute_link_gains(scenario, &trajectory, params);
        }
        if blocks.power {
            powers = update_powers(&gains, &powers)?.policy;
        }
        let current = gains.objective_p2(&powers.powers);
        let previous = *trace.last().expect("trace starts non-empty");
        trace.push(current);
        let improvement = (current - previous) / current.abs().max(REL_IMPROVEMENT_EPS);
        if improvement < config.chi {
            converged = true;
            break;
        }
    }

    let (zeroed, zeroed_slots, p1_before) = lemma1_postprocess(scenario, &trajectory, &powers, params);
    let gains = compute_link_gains(scenario, &trajectory, params);
    Ok(SolveResult {
        p1_objective: gains.objective_p1(&zeroed.powers),
        p2_objective: gains.objective_p2(&zeroed.powers),
        p1_before_zeroing: p1_before,
        trajectory,
        powers: zeroed,
        objective_trace: trace,
        iterations,
        converged,
        zeroed_slots,
    })
}

/// Alternates trajectory and power updates until the relative improvement
/// drops below `chi`, then silences every slot whose secrecy rate is negative.
pub fn run_algorithm1(
    scenario: &Scenario,
    params: &ChannelParams,
    constraints: &PowerConstraints,
    config: &SolverConfig,
) -> Result<SolveResult> {
    run_bcd(
        scenario,
        params,
        constraints,
        config,
        Blocks {
            position: true,
            power: true,
        },
    )
}

/// Sets every user's power to zero in slots with negative secrecy rate.
///
/// Returns the new policy, the `(user, slot)` pairs that were switched off,
/// and the clamped objective before zeroing. After zeroing the clamped and
/// unclamped objectives coincide and equal that value.
pub fn lemma1_postprocess(
    scenario: &Scenario,
    trajectory: &UavTrajectory,
    powers: &PowerPolicy,
    params: &ChannelParams,
) -> (PowerPolicy, Vec<(usize, usize)>, f64) {
    let gains = compute_link_gains(scenario, trajectory, params);
    let taus = gains.taus(&powers.powers);
    let before = gains.objective_p1(&powers.powers);
    let mut out = powers.clone();
    let mut zeroed = Vec::new();
    for (n, &t) in taus.iter().enumerate() {
        if t < 0.0 {
            for (i, row) in out.powers.iter_mut().enumerate() {
                if row[n] != 0.0 {
                    zeroed.push((i, n));
                }
                row[n] = 0.0;
            }
        }
    }
    zeroed.sort_unstable();
    (out, zeroed, before)
}

/// Runs one of the comparison strategies with the default solver settings
/// and the same post-processing.
pub fn run_baseline(
    scenario: &Scenario,
    params: &ChannelParams,
    constraints: &PowerConstraints,
    strategy: Strategy,
) -> Result<SolveResult> {
    run_baseline_with(scenario, params, constraints, strategy, &SolverConfig::default())
}

pub fn run_baseline_with(
    scenario: &Scenario,
    params: &ChannelParams,
    constraints: &PowerConstraints,
    strategy: Strategy,
    config: &SolverConfig,
) -> Result<SolveResult> {
    match strategy {
        Strategy::FixedFull => {
            check_inputs(scenario, config)?;
            let trajectory = UavTrajectory::at_cluster_centers(scenario);
            let powers = PowerPolicy::uniform(scenario.num_users(), scenario.num_slots(), *constraints);
            let gains = compute_link_gains(scenario, &trajectory, params);
            let trace = vec![gains.objective_p2(&powers.powers)];
            let (zeroed, zeroed_slots, p1_before) = lemma1_postprocess(scenario, &trajectory, &powers, params);
            Ok(SolveResult {
                p1_objective: gains.objective_p1(&zeroed.powers),
                p2_objective: gains.objective_p2(&zeroed.powers),
                p1_before_zeroing: p1_before,
                trajectory,
                powers: zeroed,
                objective_trace: trace,
                iterations: 0,
                converged: true,
                zeroed_slots,
            })
        }
        Strategy::PositionOnly => {
            let config = SolverConfig {
                initial_powers: InitialPowers::UniformFeasible,
                ..config.clone()
            };
            run_bcd(scenario, params, constraints, &config, Blocks { position: true, power: false })
        }
        Strategy::PowerOnly => {
            let config = SolverConfig {
                initial_trajectory: InitialTrajectory::ClusterCenter,
                ..config.clone()
            };
            run_bcd(scenario, params, constraints, &config, Blocks { position: false, power: true })
        }
        Strategy::Joint => run_algorithm1(scenario, params, constraints, config),
    }
}
