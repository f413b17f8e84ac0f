//! World model: workspace bounds, cylindrical obstacles, the inspection
//! surface and mission definition, loaded from a TOML scenario file.
//!
//! All lengths are meters in a local East-North-Up frame, speeds in m/s.
//! A `Scenario` is immutable after [`load_scenario`] and safe to share
//! across threads.

use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse scenario file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Validation(String),
}

/// A point (or vector) in the local ENU frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: Point3) -> f64 {
        (*self - other).norm()
    }

    pub fn dot(&self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn xy(&self) -> Point2 {
        Point2 { x: self.x, y: self.y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Point3::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// A point in the horizontal plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(&self, other: Point2) -> f64 {
        (*self - other).norm()
    }

    pub fn dot(&self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Vertical cylinder obstacle standing on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderObstacle {
    pub x_m: f64,
    pub y_m: f64,
    pub radius_m: f64,
    pub height_m: f64,
}

impl CylinderObstacle {
    pub fn center(&self) -> Point2 {
        Point2::new(self.x_m, self.y_m)
    }

    /// True when the point is strictly inside or on the cylinder.
    pub fn contains(&self, p: Point3) -> bool {
        p.z >= 0.0 && p.z <= self.height_m && p.xy().distance(self.center()) <= self.radius_m
    }
}

/// Axis-aligned workspace bounds with the flyable altitude band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
    pub z_min_m: f64,
    pub z_max_m: f64,
}

impl Workspace {
    pub fn contains_xy(&self, p: Point2) -> bool {
        p.x >= self.x_min_m && p.x <= self.x_max_m && p.y >= self.y_min_m && p.y <= self.y_max_m
    }
}

/// Inspection facade: a vertical surface extruded from a 2D polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub points_m: Vec<Point2>,
    pub height_m: f64,
}

/// Flight-safety and inspection-distance constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyConstraints {
    /// Safe radius of a single UAV.
    pub uav_radius_m: f64,
    /// Maximum inter-UAV communication range.
    pub comm_range_m: f64,
    /// Minimum standoff from the inspection surface.
    pub surface_standoff_min_m: f64,
    /// Maximum standoff from the inspection surface.
    pub surface_standoff_max_m: f64,
    /// Extra clearance added on top of geometric radii.
    pub clearance_margin_m: f64,
}

/// Start/goal, cruise speed and the nominal formation offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    pub start_m: Point3,
    pub goal_m: Point3,
    pub nominal_speed_mps: f64,
    /// Offsets of the three UAVs from the formation centroid, formation frame.
    pub uav_offsets_m: [Point3; 3],
}

/// Axis of the formation frame: x along travel, y lateral, z up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    AlongPath,
    Lateral,
    Vertical,
}

impl AxisName {
    pub fn unit(&self) -> Point3 {
        match self {
            AxisName::AlongPath => Point3::new(1.0, 0.0, 0.0),
            AxisName::Lateral => Point3::new(0.0, 1.0, 0.0),
            AxisName::Vertical => Point3::new(0.0, 0.0, 1.0),
        }
    }
}

/// The three reconfiguration shape families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Alignment,
    Rotation,
    Shrink,
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShapeKind::Alignment => write!(f, "alignment"),
            ShapeKind::Rotation => write!(f, "rotation"),
            ShapeKind::Shrink => write!(f, "shrink"),
        }
    }
}

/// Tunables for IWP detection and the reconfiguration maneuvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconfigSettings {
    pub alignment_spacing_m: f64,
    pub alignment_axis: AxisName,
    pub rotation_axis: AxisName,
    pub rotation_angle_rad: f64,
    /// Fixed shrink scale; when absent the scale is fitted to each gap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrink_scale: Option<f64>,
    pub lead_buffer_m: f64,
    pub lag_buffer_m: f64,
    /// Arc length of each morph phase; when absent, two inter-waypoint spans.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform_distance_m: Option<f64>,
    /// Obstacle pairs farther apart than this are never considered a passage.
    pub neighborhood_radius_m: f64,
    pub max_speed_mps: f64,
    pub shape_priority: Vec<ShapeKind>,
}

impl Default for ReconfigSettings {
    fn default() -> Self {
        ReconfigSettings {
            alignment_spacing_m: 1.2,
            alignment_axis: AxisName::Vertical,
            rotation_axis: AxisName::Lateral,
            rotation_angle_rad: std::f64::consts::FRAC_PI_2,
            shrink_scale: None,
            lead_buffer_m: 1.0,
            lag_buffer_m: 1.0,
            transform_distance_m: None,
            neighborhood_radius_m: 30.0,
            max_speed_mps: 10.0,
            shape_priority: vec![ShapeKind::Alignment, ShapeKind::Shrink, ShapeKind::Rotation],
        }
    }
}

/// The full validated world model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub workspace: Workspace,
    #[serde(default)]
    pub obstacles: Vec<CylinderObstacle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<Surface>,
    pub safety: SafetyConstraints,
    pub mission: MissionSpec,
    #[serde(default)]
    pub reconfig: ReconfigSettings,
}

impl Scenario {
    pub fn from_toml_str(s: &str) -> Result<Scenario, ScenarioError> {
        let scenario: Scenario = toml::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Nominal formation radius: largest UAV offset from the centroid.
    pub fn formation_radius(&self) -> f64 {
        self.mission
            .uav_offsets_m
            .iter()
            .map(|o| o.norm())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Validation(msg));

        let w = &self.workspace;
        for v in [w.x_min_m, w.x_max_m, w.y_min_m, w.y_max_m, w.z_min_m, w.z_max_m] {
            if !v.is_finite() {
                return fail("workspace bounds must be finite".into());
            }
        }
        if w.x_max_m <= w.x_min_m || w.y_max_m <= w.y_min_m {
            return fail("workspace bounds must be non-degenerate".into());
        }
        if !(w.z_max_m > w.z_min_m && w.z_min_m > 0.0) {
            return fail("workspace must satisfy z_max_m > z_min_m > 0".into());
        }

        for (k, obs) in self.obstacles.iter().enumerate() {
            if !(obs.x_m.is_finite() && obs.y_m.is_finite()) {
                return fail(format!("obstacle {k}: center must be finite"));
            }
            if !(obs.radius_m > 0.0) {
                return fail(format!("obstacle {k}: radius_m must be > 0"));
            }
            if !(obs.height_m > 0.0) {
                return fail(format!("obstacle {k}: height_m must be > 0"));
            }
        }

        if let Some(surface) = &self.surface {
            if surface.points_m.len() < 2 {
                return fail("surface must have at least 2 polyline points".into());
            }
            if !(surface.height_m > 0.0) {
                return fail("surface height_m must be > 0".into());
            }
        }

        let s = &self.safety;
        if !(s.uav_radius_m > 0.0) {
            return fail("safety: uav_radius_m must be > 0".into());
        }
        if s.comm_range_m <= 2.0 * s.uav_radius_m {
            return fail("safety: comm_range_m must exceed 2 * uav_radius_m".into());
        }
        if !(s.surface_standoff_max_m > s.surface_standoff_min_m && s.surface_standoff_min_m > 0.0)
        {
            return fail(
                "safety: surface_standoff_max_m > surface_standoff_min_m > 0 required".into(),
            );
        }
        if s.clearance_margin_m < 0.0 {
            return fail("safety: clearance_margin_m must be >= 0".into());
        }

        let m = &self.mission;
        if !m.start_m.is_finite() || !m.goal_m.is_finite() {
            return fail("mission: start_m and goal_m must be finite".into());
        }
        if m.start_m == m.goal_m {
            return fail("mission: start_m must differ from goal_m".into());
        }
        if !(m.nominal_speed_mps > 0.0) {
            return fail("mission: nominal_speed_mps must be > 0".into());
        }
        let offset_sum = m.uav_offsets_m[0] + m.uav_offsets_m[1] + m.uav_offsets_m[2];
        if offset_sum.norm() > 1e-9 {
            return fail("mission: uav_offsets_m must sum to the zero vector".into());
        }

        let r = &self.reconfig;
        if !(r.alignment_spacing_m > 0.0) {
            return fail("reconfig: alignment_spacing_m must be > 0".into());
        }
        if let Some(alpha) = r.shrink_scale {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return fail("reconfig: shrink_scale must be in (0, 1]".into());
            }
        }
        if r.lead_buffer_m < 0.0 || r.lag_buffer_m < 0.0 {
            return fail("reconfig: buffers must be >= 0".into());
        }
        if !(r.max_speed_mps >= m.nominal_speed_mps) {
            return fail("reconfig: max_speed_mps must be >= nominal_speed_mps".into());
        }
        if r.shape_priority.is_empty() {
            return fail("reconfig: shape_priority must not be empty".into());
        }

        Ok(())
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_toml_str(&text)
}

/// Shortest distance from a point to the obstacle's surface, 0 inside.
///
/// Horizontal distance to the cylinder wall below the cap height; full 3D
/// distance to the cap disk above it.
pub fn distance_to_obstacle(p: Point3, obs: &CylinderObstacle) -> f64 {
    let radial = (p.xy().distance(obs.center()) - obs.radius_m).max(0.0);
    if p.z > obs.height_m {
        let dz = p.z - obs.height_m;
        (radial * radial + dz * dz).sqrt()
    } else {
        radial
    }
}

/// Minimum horizontal distance from a point to the surface polyline.
pub fn distance_to_surface(p: Point3, surface: &Surface) -> f64 {
    let q = p.xy();
    surface
        .points_m
        .windows(2)
        .map(|seg| point_segment_distance_2d(q, seg[0], seg[1]))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn point_segment_distance_2d(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len_sq = ab.dot(ab);
    if len_sq <= 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}
