//! Composite path cost: length, obstacle violation, altitude band and
//! IWP attraction terms evaluated over a discretized candidate path.

use serde::Serialize;

use crate::polyline::Polyline3;
use crate::scenario::{distance_to_obstacle, CylinderObstacle, Point2, Point3, Scenario};

/// Stand-in for the infinite penalty on non-positive altitudes; finite so
/// infeasible candidates still rank against each other.
pub const ALTITUDE_SENTINEL: f64 = 1e9;

#[derive(Debug, thiserror::Error)]
pub enum CostError {
    #[error("segment count {segments} is below the control waypoint count {control}")]
    TooFewSegments { segments: usize, control: usize },
    #[error("path needs at least 2 control waypoints")]
    TooFewWaypoints,
}

/// Weighting factors for the cost components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostWeights {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// Weight on the IWP attraction term; 1 leaves it unweighted.
    pub jr_weight: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { beta1: 1.0, beta2: 1000.0, beta3: 100.0, jr_weight: 1.0 }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<(), String> {
        if self.beta1 < 0.0 || self.beta2 < 0.0 || self.beta3 < 0.0 || self.jr_weight < 0.0 {
            return Err("cost weights must be non-negative".into());
        }
        if self.beta1 == 0.0 && self.beta2 == 0.0 && self.beta3 == 0.0 {
            return Err("at least one of beta1, beta2, beta3 must be positive".into());
        }
        Ok(())
    }
}

/// Per-term cost values for one candidate path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub jr: f64,
    pub total: f64,
}

/// A candidate path resampled into near-equal straight segments.
#[derive(Debug, Clone)]
pub struct DiscretizedPath {
    nodes: Vec<Point3>,
}

impl DiscretizedPath {
    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn segment_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn midpoints(&self) -> impl Iterator<Item = Point3> + '_ {
        self.nodes.windows(2).map(|seg| (seg[0] + seg[1]) * 0.5)
    }
}

/// Resamples the control polyline into `segments` pieces of equal arc length.
pub fn discretize(control: &[Point3], segments: usize) -> Result<DiscretizedPath, CostError> {
    if control.len() < 2 {
        return Err(CostError::TooFewWaypoints);
    }
    if segments < control.len() {
        return Err(CostError::TooFewSegments { segments, control: control.len() });
    }
    let polyline = Polyline3::new(control.to_vec());
    Ok(DiscretizedPath { nodes: polyline.resample(segments) })
}

/// Total path length: sum of segment norms.
pub fn j1_length(d: &DiscretizedPath) -> f64 {
    d.nodes.windows(2).map(|seg| seg[0].distance(seg[1])).sum()
}

/// Normalized obstacle violation in [0, 1].
///
/// `safe_radii[k]` is the safe distance for obstacle `k`; segment midpoints
/// closer than that contribute `1 - d/r`, capped at 1 when inside.
pub fn j2_violation(d: &DiscretizedPath, obstacles: &[CylinderObstacle], safe_radii: &[f64]) -> f64 {
    assert_eq!(obstacles.len(), safe_radii.len());
    if obstacles.is_empty() {
        return 0.0;
    }
    let l = d.segment_count() as f64;
    let k = obstacles.len() as f64;
    let mut sum = 0.0;
    for mid in d.midpoints() {
        for (obs, r_s) in obstacles.iter().zip(safe_radii) {
            let dist = distance_to_obstacle(mid, obs);
            sum += (1.0 - dist / r_s).max(0.0);
        }
    }
    sum / (l * k)
}

/// Altitude band penalty summed over segment midpoint heights.
pub fn j3_altitude(d: &DiscretizedPath, z_min: f64, z_max: f64) -> f64 {
    d.midpoints()
        .map(|mid| {
            let z = mid.z;
            if z <= 0.0 {
                ALTITUDE_SENTINEL
            } else if z > z_max {
                z - z_max
            } else if z < z_min {
                z_min - z
            } else {
                0.0
            }
        })
        .sum()
}

/// Mean horizontal distance from segment midpoints to the IWPs.
pub fn jr_iwp_attraction(d: &DiscretizedPath, iwps: &[Point2]) -> f64 {
    if iwps.is_empty() {
        return 0.0;
    }
    let l = d.segment_count() as f64;
    let m = iwps.len() as f64;
    let mut sum = 0.0;
    for mid in d.midpoints() {
        for iwp in iwps {
            sum += mid.xy().distance(*iwp);
        }
    }
    sum / (l * m)
}

/// Safe distance for obstacle `k`: its radius plus the formation disk and
/// the clearance margin.
pub fn safe_radii(scenario: &Scenario, formation_radius: f64) -> Vec<f64> {
    scenario
        .obstacles
        .iter()
        .map(|obs| obs.radius_m + formation_radius + scenario.safety.clearance_margin_m)
        .collect()
}

/// Weighted sum of all components over the discretized control path.
pub fn total_cost(
    control: &[Point3],
    scenario: &Scenario,
    weights: &CostWeights,
    iwps: &[Point2],
    segments: usize,
    formation_radius: f64,
) -> Result<CostBreakdown, CostError> {
    let d = discretize(control, segments)?;
    let radii = safe_radii(scenario, formation_radius);
    let j1 = j1_length(&d);
    let j2 = j2_violation(&d, &scenario.obstacles, &radii);
    let j3 = j3_altitude(&d, scenario.workspace.z_min_m, scenario.workspace.z_max_m);
    let jr = jr_iwp_attraction(&d, iwps);
    let total = weights.beta1 * j1 + weights.beta2 * j2 + weights.beta3 * j3 + weights.jr_weight * jr;
    Ok(CostBreakdown { j1, j2, j3, jr, total })
}
