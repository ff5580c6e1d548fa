//! Brute-force reference searches for validating the solver.
//!
//! Only the capacity primitives of [`crate::channel`] are shared with the
//! solver; everything built on top of them is re-derived here.

use crate::channel::{clamped_dist2, eaves_capacity, legit_capacity, ChannelParams};
use crate::error::{Error, Result};
use crate::power_opt::{PowerConstraints, PowerPolicy};
use crate::scenario::{Point2, Scenario, UavTrajectory};

/// Largest users/eavesdroppers/slots count [`grid_search_joint`] accepts.
pub const JOINT_MAX_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Points per axis across the disk's bounding square.
    pub position_resolution: usize,
    /// Evenly spaced levels in `[0, P_max]`.
    pub power_levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            position_resolution: 101,
            power_levels: 201,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.position_resolution < 2 || self.power_levels < 2 {
            return Err(Error::InvalidConfig {
                field: "grid",
                reason: "position resolution and power levels must both be at least 2".into(),
            });
        }
        Ok(())
    }

    /// Spacing between neighbouring grid points for a disk of radius `r`.
    pub fn cell_size(&self, r: f64) -> f64 {
        2.0 * r / (self.position_resolution - 1) as f64
    }
}

/// What [`grid_search_position`] maximizes.
pub enum PositionObjective<'a> {
    /// True sum of legitimate rates at the given powers.
    LegitRate,
    /// Any caller-supplied function of the horizontal UAV position.
    Custom(&'a dyn Fn(Point2) -> f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub position: Point2,
    pub objective: f64,
}

/// Grid points of the bounding square of the slot's disk that lie inside it.
fn disk_grid(center: Point2, radius: f64, resolution: usize) -> Vec<Point2> {
    let step = 2.0 * radius / (resolution - 1) as f64;
    let mut pts = Vec::new();
    for a in 0..resolution {
        let x = center.x - radius + step * a as f64;
        for b in 0..resolution {
            let y = center.y - radius + step * b as f64;
            let p = Point2::new(x, y);
            if p.dist(&center) <= radius * (1.0 + 1e-12) {
                pts.push(p);
            }
        }
    }
    pts
}

fn legit_rate_at(scenario: &Scenario, slot_powers: &[f64], n: usize, q: Point2, params: &ChannelParams) -> f64 {
    let uav = q.at_height(scenario.altitude);
    scenario
        .users
        .iter()
        .zip(slot_powers)
        .map(|(track, &p)| legit_capacity(p, clamped_dist2(&track[n], &uav), params))
        .sum()
}

fn worst_wiretap_at(scenario: &Scenario, slot_powers: &[f64], n: usize, params: &ChannelParams) -> f64 {
    scenario
        .eavesdroppers
        .iter()
        .map(|e| {
            scenario
                .users
                .iter()
                .zip(slot_powers)
                .map(|(track, &p)| {
                    let d2 = clamped_dist2(&track[n], e);
                    eaves_capacity(p, d2 * d2, params)
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best feasible grid point of slot `n`; the first point wins ties.
pub fn grid_search_position(
    scenario: &Scenario,
    powers: &PowerPolicy,
    params: &ChannelParams,
    n: usize,
    grid: &GridSpec,
    objective: PositionObjective<'_>,
) -> Result<GridPoint> {
    grid.validate()?;
    let slot_powers: Vec<f64> = powers.powers.iter().map(|row| row[n]).collect();
    let mut best = GridPoint {
        position: scenario.cluster_center[n],
        objective: f64::NEG_INFINITY,
    };
    for q in disk_grid(scenario.cluster_center[n], scenario.disk_radius, grid.position_resolution) {
        let v = match &objective {
            PositionObjective::LegitRate => legit_rate_at(scenario, &slot_powers, n, q, params),
            PositionObjective::Custom(f) => f(q),
        };
        if v > best.objective {
            best = GridPoint { position: q, objective: v };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointOptimum {
    pub trajectory: UavTrajectory,
    /// `powers[i][n]`.
    pub powers: Vec<Vec<f64>>,
    pub objective_p1: f64,
}

/// Best clamped secrecy rate of one slot for every power-level combination.
struct SlotTable {
    value: Vec<f64>,
    position: Vec<Point2>,
}

fn combo_levels(mut combo: usize, num_users: usize, levels: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        out.push(combo % levels);
        combo /= levels;
    }
    out
}

fn slot_table(
    scenario: &Scenario,
    params: &ChannelParams,
    n: usize,
    grid: &GridSpec,
    level_power: &[f64],
) -> SlotTable {
    let m = scenario.num_users();
    let levels = level_power.len();
    let num_combos = levels.pow(m as u32);
    let pts = disk_grid(scenario.cluster_center[n], scenario.disk_radius, grid.position_resolution);
    let mut value = Vec::with_capacity(num_combos);
    let mut position = Vec::with_capacity(num_combos);
    for combo in 0..num_combos {
        let slot_powers: Vec<f64> = combo_levels(combo, m, levels)
            .into_iter()
            .map(|k| level_power[k])
            .collect();
        let wiretap = worst_wiretap_at(scenario, &slot_powers, n, params);
        let mut best = (0.0, scenario.cluster_center[n]);
        for &q in &pts {
            let v = (legit_rate_at(scenario, &slot_powers, n, q, params) - wiretap).max(0.0);
            if v > best.0 {
                best = (v, q);
            }
        }
        value.push(best.0);
        position.push(best.1);
    }
    SlotTable { value, position }
}

/// Index of the best entry dominated componentwise by each combo, for up to
/// two users.
fn prefix_argmax(values: &[f64], num_users: usize, levels: usize) -> Vec<usize> {
    let mut arg: Vec<usize> = (0..values.len()).collect();
    let better = |arg: &[usize], a: usize, b: usize| if values[arg[b]] > values[arg[a]] { arg[b] } else { arg[a] };
    let mut stride = 1;
    for _ in 0..num_users {
        for combo in 0..values.len() {
            if (combo / stride) % levels > 0 {
                arg[combo] = better(&arg, combo, combo - stride);
            }
        }
        stride *= levels;
    }
    arg
}

/// Exhaustive search of the clamped objective over a per-slot position grid
/// and a per-user-per-slot power grid, keeping only average-feasible powers.
///
/// Slots are coupled only through each user's power budget, so the search
/// tabulates the best position for every power combination of each slot and
/// then enumerates budget-feasible combinations across slots. This returns
/// the same maximum as the full product enumeration.
pub fn grid_search_joint(
    scenario: &Scenario,
    params: &ChannelParams,
    constraints: &PowerConstraints,
    grid: &GridSpec,
) -> Result<JointOptimum> {
    grid.validate()?;
    let (m, k, n) = (scenario.num_users(), scenario.num_eavesdroppers(), scenario.num_slots());
    if m > JOINT_MAX_DIM || k > JOINT_MAX_DIM || n > JOINT_MAX_DIM {
        return Err(Error::OracleTooLarge(format!(
            "joint grid search supports at most {JOINT_MAX_DIM} users, eavesdroppers and slots; got M={m}, K={k}, N={n}"
        )));
    }
    let levels = grid.power_levels;
    let p_max = constraints.p_max();
    let level_power: Vec<f64> = (0..levels).map(|l| p_max * l as f64 / (levels - 1) as f64).collect();
    // per-user cap on the sum of level indices over all slots
    let cap = if p_max > 0.0 {
        let raw = n as f64 * constraints.p_avg() * (levels - 1) as f64 / p_max;
        ((raw * (1.0 + 1e-12)).floor() as usize).min(n * (levels - 1))
    } else {
        n * (levels - 1)
    };

    let tables: Vec<SlotTable> = (0..n)
        .map(|slot| slot_table(scenario, params, slot, grid, &level_power))
        .collect();

    let within = |combo: usize, limit: &[usize]| {
        combo_levels(combo, m, levels)
            .iter()
            .zip(limit)
            .all(|(a, b)| a <= b)
    };
    let encode = |idx: &[usize]| idx.iter().rev().fold(0, |acc, &l| acc * levels + l);

    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, vec![0; n]);
    match n {
        1 => {
            let limit = vec![cap.min(levels - 1); m];
            for (combo, &v) in tables[0].value.iter().enumerate() {
                if within(combo, &limit) && v > best.0 {
                    best = (v, vec![combo]);
                }
            }
        }
        2 => {
            let arg = prefix_argmax(&tables[1].value, m, levels);
            for (combo, &v0) in tables[0].value.iter().enumerate() {
                let first = combo_levels(combo, m, levels);
                if first.iter().any(|&l| l > cap) {
                    continue;
                }
                let rest: Vec<usize> = first.iter().map(|&l| (cap - l).min(levels - 1)).collect();
                let second = arg[encode(&rest)];
                let v = v0 + tables[1].value[second];
                if v > best.0 {
                    best = (v, vec![combo, second]);
                }
            }
        }
        _ => unreachable!("slot count checked above"),
    }

    let positions = best
        .1
        .iter()
        .zip(&tables)
        .map(|(&combo, t)| t.position[combo])
        .collect();
    let mut powers = vec![vec![0.0; n]; m];
    for (slot, &combo) in best.1.iter().enumerate() {
        for (i, l) in combo_levels(combo, m, levels).into_iter().enumerate() {
            powers[i][slot] = level_power[l];
        }
    }
    Ok(JointOptimum {
        trajectory: UavTrajectory::new(positions),
        powers,
        objective_p1: best.0 / n as f64,
    })
}
