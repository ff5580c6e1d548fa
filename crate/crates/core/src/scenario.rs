//! Geometry of the eavesdropping scenario.
//!
//! A [`Scenario`] is a time-slotted snapshot of a mobile user cluster served
//! by a single aerial relay flying at fixed altitude, with a set of static
//! ground eavesdroppers. Users move with the cluster; within each slot every
//! node is treated as momentarily static.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point in 3-D space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn dist2(&self, other: &Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

/// Horizontal position, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn at_height(&self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(v: Point2) -> Self {
        [v.x, v.y]
    }
}

/// Per-slot horizontal UAV positions; the altitude is the scenario's `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavTrajectory {
    pub positions: Vec<Point2>,
}

impl UavTrajectory {
    pub fn new(positions: Vec<Point2>) -> Self {
        Self { positions }
    }

    /// Hovers over the cluster center in every slot.
    pub fn at_cluster_centers(scenario: &Scenario) -> Self {
        Self::new(scenario.cluster_center.clone())
    }

    pub fn num_slots(&self) -> usize {
        self.positions.len()
    }

    pub fn uav_position(&self, slot: usize, altitude: f64) -> Vec3 {
        self.positions[slot].at_height(altitude)
    }

    /// Largest violation of the per-slot disk constraint, zero when feasible.
    pub fn max_disk_violation(&self, scenario: &Scenario) -> f64 {
        self.positions
            .iter()
            .zip(&scenario.cluster_center)
            .map(|(p, c)| (p.dist(c) - scenario.disk_radius).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Parameters for [`generate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_users: usize,
    pub num_eavesdroppers: usize,
    pub num_slots: usize,
    /// Radius of the disk users are scattered in around the cluster center.
    pub cluster_radius: f64,
    /// Radius of the disk the UAV must stay in around the cluster center.
    pub uav_disk_radius: f64,
    pub uav_altitude: f64,
    /// Side of the square `[0, field_size]^2` eavesdroppers are placed in.
    pub field_size: f64,
    pub cluster_start: Point2,
    /// Cluster drift per slot.
    pub cluster_velocity: Point2,
    pub user_height: f64,
    pub eaves_height: f64,
    pub rng_seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: &str| {
            Err(Error::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if self.num_users == 0 {
            return bad("num_users", "must be at least 1");
        }
        if self.num_eavesdroppers == 0 {
            return bad("num_eavesdroppers", "must be at least 1");
        }
        if self.num_slots == 0 {
            return bad("num_slots", "must be at least 1");
        }
        if !(self.cluster_radius.is_finite() && self.cluster_radius >= 0.0) {
            return bad("cluster_radius", "must be finite and non-negative");
        }
        if !(self.uav_disk_radius.is_finite() && self.uav_disk_radius > 0.0) {
            return bad("uav_disk_radius", "must be finite and positive");
        }
        if !(self.field_size.is_finite() && self.field_size >= 0.0) {
            return bad("field_size", "must be finite and non-negative");
        }
        if !self.cluster_start.is_finite() {
            return bad("cluster_start", "must be finite");
        }
        if !self.cluster_velocity.is_finite() {
            return bad("cluster_velocity", "must be finite");
        }
        if !(self.user_height.is_finite() && self.user_height >= 0.0) {
            return bad("user_height", "must be finite and non-negative");
        }
        if !(self.eaves_height.is_finite() && self.eaves_height >= 0.0) {
            return bad("eaves_height", "must be finite and non-negative");
        }
        if !(self.uav_altitude.is_finite()
            && self.uav_altitude > self.user_height.max(self.eaves_height))
        {
            return bad(
                "uav_altitude",
                "must be finite and above both user_height and eaves_height",
            );
        }
        Ok(())
    }
}

/// Users, eavesdroppers and the cluster track over `N` slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// `users[i][n]`: position of user `i` in slot `n`.
    pub users: Vec<Vec<Vec3>>,
    /// Static across slots.
    pub eavesdroppers: Vec<Vec3>,
    pub cluster_center: Vec<Point2>,
    #[serde(rename = "R")]
    pub disk_radius: f64,
    #[serde(rename = "H")]
    pub altitude: f64,
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_eavesdroppers(&self) -> usize {
        self.eavesdroppers.len()
    }

    pub fn num_slots(&self) -> usize {
        self.cluster_center.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads a scenario file and checks its structural invariants.
    pub fn load(path: &Path) -> Result<Self> {
        let scenario = Self::from_json(&std::fs::read_to_string(path)?)?;
        validate_scenario(&scenario).map_err(Error::InvalidScenario)?;
        Ok(scenario)
    }
}

/// Which coordinate set a non-finite value was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    User { user: usize, slot: usize },
    Eavesdropper(usize),
    ClusterCenter(usize),
    DiskRadius,
    Altitude,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::User { user, slot } => write!(f, "users[{user}][{slot}]"),
            Location::Eavesdropper(j) => write!(f, "eavesdroppers[{j}]"),
            Location::ClusterCenter(n) => write!(f, "cluster_center[{n}]"),
            Location::DiskRadius => write!(f, "R"),
            Location::Altitude => write!(f, "H"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioIssue {
    #[error("no users")]
    NoUsers,
    #[error("no eavesdroppers")]
    NoEavesdroppers,
    #[error("no slots")]
    NoSlots,
    #[error("user {user} has {found} slots, expected {expected}")]
    SlotCountMismatch {
        user: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at {0}")]
    NonFinite(Location),
    #[error("R must be positive")]
    NonPositiveRadius,
    #[error("H must be positive")]
    NonPositiveAltitude,
}

/// Collects every violated structural invariant; `Ok` when there are none.
pub fn validate_scenario(s: &Scenario) -> std::result::Result<(), Vec<ScenarioIssue>> {
    let mut issues = Vec::new();
    let num_slots = s.num_slots();
    if s.users.is_empty() {
        issues.push(ScenarioIssue::NoUsers);
    }
    if s.eavesdroppers.is_empty() {
        issues.push(ScenarioIssue::NoEavesdroppers);
    }
    if num_slots == 0 {
        issues.push(ScenarioIssue::NoSlots);
    }
    for (i, track) in s.users.iter().enumerate() {
        if track.len() != num_slots {
            issues.push(ScenarioIssue::SlotCountMismatch {
                user: i,
                expected: num_slots,
                found: track.len(),
            });
        }
        for (n, p) in track.iter().enumerate() {
            if !p.is_finite() {
                issues.push(ScenarioIssue::NonFinite(Location::User { user: i, slot: n }));
            }
        }
    }
    for (j, e) in s.eavesdroppers.iter().enumerate() {
        if !e.is_finite() {
            issues.push(ScenarioIssue::NonFinite(Location::Eavesdropper(j)));
        }
    }
    for (n, c) in s.cluster_center.iter().enumerate() {
        if !c.is_finite() {
            issues.push(ScenarioIssue::NonFinite(Location::ClusterCenter(n)));
        }
    }
    if !s.disk_radius.is_finite() {
        issues.push(ScenarioIssue::NonFinite(Location::DiskRadius));
    } else if s.disk_radius <= 0.0 {
        issues.push(ScenarioIssue::NonPositiveRadius);
    }
    if !s.altitude.is_finite() {
        issues.push(ScenarioIssue::NonFinite(Location::Altitude));
    } else if s.altitude <= 0.0 {
        issues.push(ScenarioIssue::NonPositiveAltitude);
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// Draws a scenario: the cluster drifts linearly, users are i.i.d. uniform
/// in the cluster disk each slot, eavesdroppers are uniform in the field.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let cluster_center: Vec<Point2> = (0..config.num_slots)
        .map(|n| {
            let n = n as f64;
            Point2::new(
                config.cluster_start.x + n * config.cluster_velocity.x,
                config.cluster_start.y + n * config.cluster_velocity.y,
            )
        })
        .collect();

    let mut users = vec![Vec::with_capacity(config.num_slots); config.num_users];
    for center in &cluster_center {
        for track in users.iter_mut() {
            // sqrt for area-uniform radius
            let r = config.cluster_radius * rng.gen::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.gen::<f64>();
            track.push(Vec3::new(
                center.x + r * theta.cos(),
                center.y + r * theta.sin(),
                config.user_height,
            ));
        }
    }

    let eavesdroppers = (0..config.num_eavesdroppers)
        .map(|_| {
            Vec3::new(
                config.field_size * rng.gen::<f64>(),
                config.field_size * rng.gen::<f64>(),
                config.eaves_height,
            )
        })
        .collect();

    Ok(Scenario {
        users,
        eavesdroppers,
        cluster_center,
        disk_radius: config.uav_disk_radius,
        altitude: config.uav_altitude,
    })
}
