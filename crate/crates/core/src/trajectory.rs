//! Per-UAV trajectory assembly: blends formation offsets through the
//! reconfiguration windows, rotates them into the inertial frame along the
//! centroid path, and derives ground-speed commands. A validator replays
//! the finished commands against the scenario constraints.

use crate::formation::{rotation_matrix, ReconfigPlan};
use crate::polyline::Polyline3;
use crate::scenario::{distance_to_obstacle, distance_to_surface, Point3, Scenario};

/// Default command discretization: 10 Hz.
pub const COMMAND_DT: f64 = 0.1;

/// Margin beyond the maximum standoff within which the surface-distance
/// band is enforced.
pub const SURFACE_CHECK_RANGE_M: f64 = 5.0;

/// Timestamped positions and commanded ground speeds for one UAV.
#[derive(Debug, Clone)]
pub struct UavTrajectory {
    pub positions: Vec<Point3>,
    pub speeds: Vec<f64>,
}

/// Synchronized command sets for the three UAVs on a shared timeline.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    pub times: Vec<f64>,
    pub uavs: [UavTrajectory; 3],
}

/// A commanded window speed exceeding the configured maximum.
#[derive(Debug, Clone)]
pub struct SpeedWarning {
    pub uav: usize,
    pub window_start: f64,
    pub window_end: f64,
    pub required_speed: f64,
    pub max_speed: f64,
}

impl std::fmt::Display for SpeedWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "UAV{} needs {:.2} m/s in window [{:.1}, {:.1}] s, above max {:.2} m/s",
            self.uav + 1,
            self.required_speed,
            self.window_start,
            self.window_end,
            self.max_speed
        )
    }
}

/// Formation-frame offsets at time `t`: nominal outside every window,
/// linearly blended through the morph phases, target shape during the hold.
pub fn offsets_at(t: f64, plans: &[ReconfigPlan], base: &[Point3; 3]) -> [Point3; 3] {
    for plan in plans {
        if t < plan.t1 || t > plan.t4 {
            continue;
        }
        let blend = if t < plan.t2 {
            (t - plan.t1) / (plan.t2 - plan.t1)
        } else if t <= plan.t3 {
            1.0
        } else {
            (plan.t4 - t) / (plan.t4 - plan.t3)
        };
        let mut out = [Point3::ZERO; 3];
        for n in 0..3 {
            out[n] = base[n] + (plan.target_offsets[n] - base[n]) * blend;
        }
        return out;
    }
    *base
}

/// Rotates a formation-frame offset into the inertial frame at heading `psi`.
pub fn to_inertial(offset: Point3, psi: f64) -> Point3 {
    rotation_matrix(psi).mul_vec(offset)
}

/// Pointwise composition of the centroid position and an inertial offset.
pub fn uav_position(centroid: Point3, inertial_offset: Point3) -> Point3 {
    centroid + inertial_offset
}

fn timeline(total_time: f64, dt: f64) -> Vec<f64> {
    let n_full = (total_time / dt).floor() as usize;
    let mut times: Vec<f64> = (0..=n_full).map(|i| i as f64 * dt).collect();
    if total_time - times.last().copied().unwrap_or(0.0) > 1e-9 {
        times.push(total_time);
    }
    times
}

fn rollout(
    path: &Polyline3,
    times: &[f64],
    plans: &[ReconfigPlan],
    base: &[Point3; 3],
    speed: f64,
) -> [Vec<Point3>; 3] {
    let mut positions: [Vec<Point3>; 3] = Default::default();
    for t in times {
        let s = (speed * t).min(path.total_length());
        let centroid = path.point_at(s);
        let psi = path.heading_at(s);
        let offsets = offsets_at(*t, plans, base);
        for n in 0..3 {
            positions[n].push(uav_position(centroid, to_inertial(offsets[n], psi)));
        }
    }
    positions
}

fn arc_length(positions: &[Point3], i0: usize, i1: usize) -> f64 {
    positions[i0..=i1].windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Rolls the centroid path and reconfiguration plans into synchronized
/// per-UAV commands.
///
/// Ground speed is the nominal cruise speed outside the morph windows and
/// `nominal + delta_d / t_phase` inside them, where `delta_d` is the extra
/// arc length the UAV flies relative to keeping its nominal offset; all
/// three UAVs therefore finish each phase simultaneously.
pub fn generate(
    path: &Polyline3,
    plans: &[ReconfigPlan],
    base: &[Point3; 3],
    nominal_speed: f64,
    dt: f64,
    max_speed: f64,
) -> (TrajectorySet, Vec<SpeedWarning>) {
    let total_time = path.total_length() / nominal_speed;
    let times = timeline(total_time, dt);
    let actual = rollout(path, &times, plans, base, nominal_speed);
    let nominal = rollout(path, &times, &[], base, nominal_speed);

    let mut speeds: [Vec<f64>; 3] = [
        vec![nominal_speed; times.len()],
        vec![nominal_speed; times.len()],
        vec![nominal_speed; times.len()],
    ];
    let mut warnings = Vec::new();

    for plan in plans {
        for (w_start, w_end) in [(plan.t1, plan.t2), (plan.t3, plan.t4)] {
            let i0 = times.partition_point(|t| *t < w_start - 1e-9);
            let i1 = times.partition_point(|t| *t <= w_end + 1e-9).saturating_sub(1);
            if i1 <= i0 {
                continue;
            }
            for n in 0..3 {
                let delta_d = arc_length(&actual[n], i0, i1) - arc_length(&nominal[n], i0, i1);
                let v = (nominal_speed + delta_d / (w_end - w_start)).max(0.0);
                if v > max_speed {
                    warnings.push(SpeedWarning {
                        uav: n,
                        window_start: w_start,
                        window_end: w_end,
                        required_speed: v,
                        max_speed,
                    });
                }
                for i in i0..i1 {
                    speeds[n][i] = v;
                }
            }
        }
    }

    let [p1, p2, p3] = actual;
    let [s1, s2, s3] = speeds;
    (
        TrajectorySet {
            times,
            uavs: [
                UavTrajectory { positions: p1, speeds: s1 },
                UavTrajectory { positions: p2, speeds: s2 },
                UavTrajectory { positions: p3, speeds: s3 },
            ],
        },
        warnings,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    SeparationTooClose,
    SeparationTooFar,
    ObstacleClearance,
    AltitudeBand,
    SurfaceStandoff,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViolationKind::SeparationTooClose => "separation below 2*uav_radius",
            ViolationKind::SeparationTooFar => "separation beyond comm range",
            ViolationKind::ObstacleClearance => "obstacle clearance",
            ViolationKind::AltitudeBand => "altitude band",
            ViolationKind::SurfaceStandoff => "surface standoff",
        };
        f.write_str(s)
    }
}

/// One constraint breach at one timestep.
#[derive(Debug, Clone)]
pub struct Violation {
    pub time_s: f64,
    pub kind: ViolationKind,
    /// UAV indices involved (1-based in the rendered form).
    pub uavs: Vec<usize>,
    pub value: f64,
    pub limit: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let uavs: Vec<String> = self.uavs.iter().map(|u| format!("UAV{}", u + 1)).collect();
        write!(
            f,
            "t={:.1}s {}: {} value {:.3} vs limit {:.3}",
            self.time_s,
            uavs.join("+"),
            self.kind,
            self.value,
            self.limit
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays the commands against separation, clearance, altitude and
/// standoff constraints. Violations become report entries, not errors.
pub fn validate(set: &TrajectorySet, scenario: &Scenario) -> ValidationReport {
    let s = &scenario.safety;
    let w = &scenario.workspace;
    let mut report = ValidationReport::default();
    let eps = 1e-9;

    for (i, t) in set.times.iter().enumerate() {
        let positions = [set.uavs[0].positions[i], set.uavs[1].positions[i], set.uavs[2].positions[i]];

        for m in 0..3 {
            for n in m + 1..3 {
                let d = positions[m].distance(positions[n]);
                if d < 2.0 * s.uav_radius_m - eps {
                    report.violations.push(Violation {
                        time_s: *t,
                        kind: ViolationKind::SeparationTooClose,
                        uavs: vec![m, n],
                        value: d,
                        limit: 2.0 * s.uav_radius_m,
                    });
                }
                if d > s.comm_range_m + eps {
                    report.violations.push(Violation {
                        time_s: *t,
                        kind: ViolationKind::SeparationTooFar,
                        uavs: vec![m, n],
                        value: d,
                        limit: s.comm_range_m,
                    });
                }
            }
        }

        for (n, p) in positions.iter().enumerate() {
            if p.z < w.z_min_m - eps || p.z > w.z_max_m + eps {
                report.violations.push(Violation {
                    time_s: *t,
                    kind: ViolationKind::AltitudeBand,
                    uavs: vec![n],
                    value: p.z,
                    limit: if p.z < w.z_min_m { w.z_min_m } else { w.z_max_m },
                });
            }
            let clearance_limit = s.uav_radius_m + s.clearance_margin_m;
            for obs in &scenario.obstacles {
                let d = distance_to_obstacle(*p, obs);
                if d < clearance_limit - eps {
                    report.violations.push(Violation {
                        time_s: *t,
                        kind: ViolationKind::ObstacleClearance,
                        uavs: vec![n],
                        value: d,
                        limit: clearance_limit,
                    });
                }
            }
            if let Some(surface) = &scenario.surface {
                let d = distance_to_surface(*p, surface);
                if d <= s.surface_standoff_max_m + SURFACE_CHECK_RANGE_M
                    && (d < s.surface_standoff_min_m - eps || d > s.surface_standoff_max_m + eps)
                {
                    report.violations.push(Violation {
                        time_s: *t,
                        kind: ViolationKind::SurfaceStandoff,
                        uavs: vec![n],
                        value: d,
                        limit: if d < s.surface_standoff_min_m {
                            s.surface_standoff_min_m
                        } else {
                            s.surface_standoff_max_m
                        },
                    });
                }
            }
        }
    }
    report
}
