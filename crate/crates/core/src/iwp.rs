//! Narrow-passage detection: finds gaps between obstacle pairs that the
//! rigid formation cannot traverse but a reconfigured one can, and places
//! an intermediate waypoint at the midpoint of each such gap.

use serde::Serialize;

use crate::formation::{max_pairwise_distance, min_pairwise_distance, shape_offsets, ShapeSpec};
use crate::scenario::{
    distance_to_surface, CylinderObstacle, Point2, Point3, Scenario, ShapeKind,
};

#[derive(Debug, thiserror::Error)]
pub enum IwpError {
    #[error("obstacles {0} and {1} have coincident centers")]
    DegeneratePair(usize, usize),
}

/// The facing boundary points of an obstacle pair and the gap between them.
#[derive(Debug, Clone, Copy)]
pub struct GapGeometry {
    pub boundary_p: Point2,
    pub boundary_q: Point2,
    pub width_m: f64,
}

/// A reconfiguration waypoint in the middle of a narrow passage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntermediateWaypoint {
    pub position: Point2,
    pub gap_width_m: f64,
    /// Indices of the obstacle pair forming the passage.
    pub pair: (usize, usize),
    /// Passage extent along the travel direction: the larger pair radius.
    pub passage_half_extent_m: f64,
    pub feasible_shapes: Vec<ShapeKind>,
}

/// Boundary intersection points along the center line and the gap width.
/// Overlapping disks yield a zero-width gap.
pub fn gap_geometry(
    p_idx: usize,
    q_idx: usize,
    p: &CylinderObstacle,
    q: &CylinderObstacle,
) -> Result<GapGeometry, IwpError> {
    let center_dist = p.center().distance(q.center());
    if center_dist < 1e-9 {
        return Err(IwpError::DegeneratePair(p_idx, q_idx));
    }
    let dir = (q.center() - p.center()) * (1.0 / center_dist);
    let boundary_p = p.center() + dir * p.radius_m;
    let boundary_q = q.center() - dir * q.radius_m;
    let width_m = (center_dist - p.radius_m - q.radius_m).max(0.0);
    Ok(GapGeometry { boundary_p, boundary_q, width_m })
}

/// Candidate offsets for one shape family sized to the given gap.
///
/// Shrink uses the configured scale when present, otherwise the largest
/// scale whose horizontal span still fits the gap.
pub fn candidate_shape_spec(kind: ShapeKind, gap_width: f64, scenario: &Scenario) -> ShapeSpec {
    let r = &scenario.reconfig;
    match kind {
        ShapeKind::Alignment => ShapeSpec::Alignment {
            axis: r.alignment_axis.unit().into(),
            spacing_m: r.alignment_spacing_m,
        },
        ShapeKind::Rotation => ShapeSpec::Rotation {
            axis: r.rotation_axis.unit().into(),
            angle_rad: r.rotation_angle_rad,
        },
        ShapeKind::Shrink => {
            let scale = r.shrink_scale.unwrap_or_else(|| {
                let base_span = horizontal_span(&scenario.mission.uav_offsets_m);
                let s = &scenario.safety;
                let usable = gap_width - 2.0 * s.uav_radius_m - s.clearance_margin_m;
                if base_span > 0.0 {
                    (usable / base_span).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            });
            ShapeSpec::Shrink { scale }
        }
    }
}

fn horizontal_span(offsets: &[Point3; 3]) -> f64 {
    let mut max: f64 = 0.0;
    for m in 0..3 {
        for n in m + 1..3 {
            max = max.max(offsets[m].xy().distance(offsets[n].xy()));
        }
    }
    max
}

/// Shapes whose geometry, sized to the gap, keeps every pairwise UAV
/// distance within [2 r_Q, d_com], fits the gap horizontally, and (when
/// the passage borders the inspection surface) keeps the standoff band.
pub fn shape_feasibility(
    gap_width: f64,
    position: Point2,
    scenario: &Scenario,
) -> Vec<ShapeKind> {
    let s = &scenario.safety;
    let base = &scenario.mission.uav_offsets_m;
    let mut feasible = Vec::new();
    for kind in [ShapeKind::Alignment, ShapeKind::Rotation, ShapeKind::Shrink] {
        let spec = candidate_shape_spec(kind, gap_width, scenario);
        let Ok(offsets) = shape_offsets(&spec, base, s.uav_radius_m) else {
            continue;
        };
        if horizontal_span(&offsets) + 2.0 * s.uav_radius_m + s.clearance_margin_m
            > gap_width + 1e-9
        {
            continue;
        }
        if min_pairwise_distance(&offsets) < 2.0 * s.uav_radius_m - 1e-9 {
            continue;
        }
        if max_pairwise_distance(&offsets) > s.comm_range_m + 1e-9 {
            continue;
        }
        if let Some(surface) = &scenario.surface {
            let centroid_standoff =
                distance_to_surface(Point3::new(position.x, position.y, 0.0), surface);
            if centroid_standoff <= s.surface_standoff_max_m {
                let in_band = offsets.iter().all(|o| {
                    let uav_xy = position + o.xy();
                    let d = distance_to_surface(Point3::new(uav_xy.x, uav_xy.y, 0.0), surface);
                    d >= s.surface_standoff_min_m - 1e-9 && d <= s.surface_standoff_max_m + 1e-9
                });
                if !in_band {
                    continue;
                }
            }
        }
        feasible.push(kind);
    }
    feasible
}

/// Scans all obstacle pairs and emits an IWP for every gap inside the
/// reconfiguration band: at least the single-UAV need, strictly below the
/// rigid formation need. Output is sorted by pair indices.
pub fn detect_iwps(scenario: &Scenario, formation_radius: f64) -> Vec<IntermediateWaypoint> {
    let s = &scenario.safety;
    let lower = 2.0 * s.uav_radius_m + s.clearance_margin_m;
    let upper = 2.0 * (formation_radius + s.clearance_margin_m);
    let mut iwps = Vec::new();
    for p_idx in 0..scenario.obstacles.len() {
        for q_idx in p_idx + 1..scenario.obstacles.len() {
            let p = &scenario.obstacles[p_idx];
            let q = &scenario.obstacles[q_idx];
            if p.center().distance(q.center()) > scenario.reconfig.neighborhood_radius_m {
                continue;
            }
            let Ok(gap) = gap_geometry(p_idx, q_idx, p, q) else {
                continue; // coincident centers: fully overlapping, no passage
            };
            if !(gap.width_m >= lower && gap.width_m < upper) {
                continue;
            }
            let position = (gap.boundary_p + gap.boundary_q) * 0.5;
            let feasible_shapes = shape_feasibility(gap.width_m, position, scenario);
            if feasible_shapes.is_empty() {
                continue;
            }
            iwps.push(IntermediateWaypoint {
                position,
                gap_width_m: gap.width_m,
                pair: (p_idx, q_idx),
                passage_half_extent_m: p.radius_m.max(q.radius_m),
                feasible_shapes,
            });
        }
    }
    iwps
}

/// First shape from the configured priority list that is feasible for the IWP.
pub fn choose_shape(iwp: &IntermediateWaypoint, scenario: &Scenario) -> Option<ShapeKind> {
    scenario
        .reconfig
        .shape_priority
        .iter()
        .copied()
        .find(|kind| iwp.feasible_shapes.contains(kind))
}
