//! Triangular formation model: frames, reconfiguration shapes and the
//! phase schedule around each narrow passage.

use serde::Serialize;

use crate::iwp::IntermediateWaypoint;
use crate::polyline::Polyline3;
use crate::scenario::Point3;

#[derive(Debug, thiserror::Error)]
pub enum FormationError {
    #[error("infeasible shape: {0}")]
    InfeasibleShape(String),
    #[error("IWP at ({x:.2}, {y:.2}) is {dist:.2} m from the path, beyond lateral reach {reach:.2} m")]
    IwpOutOfReach { x: f64, y: f64, dist: f64, reach: f64 },
    #[error("reconfiguration window [{t1:.2}, {t4:.2}] s does not fit the mission [0, {total:.2}] s")]
    WindowOutsideMission { t1: f64, t4: f64, total: f64 },
    #[error("reconfiguration windows overlap: [{a1:.2}, {a4:.2}] s and [{b1:.2}, {b4:.2}] s")]
    OverlappingWindows { a1: f64, a4: f64, b1: f64, b4: f64 },
    #[error("phase boundaries must satisfy t1 < t2 <= t3 < t4, got {t1} {t2} {t3} {t4}")]
    BadPhaseOrder { t1: f64, t2: f64, t3: f64, t4: f64 },
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn mul_vec(&self, v: Point3) -> Point3 {
        let m = &self.0;
        Point3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Rodrigues rotation about a unit axis.
    pub fn axis_angle(axis: Point3, angle: f64) -> Mat3 {
        let a = axis * (1.0 / axis.norm());
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Mat3([
            [t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y],
            [t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x],
            [t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c],
        ])
    }
}

/// Arithmetic mean of the three UAV positions.
pub fn centroid(p1: Point3, p2: Point3, p3: Point3) -> Point3 {
    (p1 + p2 + p3) * (1.0 / 3.0)
}

/// Formation-to-inertial rotation: yaw about the vertical axis.
pub fn rotation_matrix(psi: f64) -> Mat3 {
    let (s, c) = psi.sin_cos();
    Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Largest offset norm: the radius of the formation's swept disk.
pub fn formation_radius(offsets: &[Point3; 3]) -> f64 {
    offsets.iter().map(|o| o.norm()).fold(0.0, f64::max)
}

/// Snapshot of the formation at one instant.
#[derive(Debug, Clone, Copy)]
pub struct FormationState {
    pub centroid: Point3,
    pub offsets: [Point3; 3],
    pub heading: f64,
}

impl FormationState {
    pub fn radius(&self) -> f64 {
        formation_radius(&self.offsets)
    }
}

/// A reconfiguration shape and its parameters, in the formation frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ShapeSpec {
    Triangle,
    Alignment { axis: [f64; 3], spacing_m: f64 },
    Rotation { axis: [f64; 3], angle_rad: f64 },
    Shrink { scale: f64 },
}

impl ShapeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeSpec::Triangle => "triangle",
            ShapeSpec::Alignment { .. } => "alignment",
            ShapeSpec::Rotation { .. } => "rotation",
            ShapeSpec::Shrink { .. } => "shrink",
        }
    }
}

/// Offsets of the three UAVs for a shape, preserving the zero-sum centroid
/// invariant. Fails when the shape would bring two UAVs closer than twice
/// the UAV safe radius.
pub fn shape_offsets(
    spec: &ShapeSpec,
    base: &[Point3; 3],
    uav_radius: f64,
) -> Result<[Point3; 3], FormationError> {
    let offsets = match spec {
        ShapeSpec::Triangle => *base,
        ShapeSpec::Alignment { axis, spacing_m } => {
            let axis = Point3::from(*axis);
            let unit = axis * (1.0 / axis.norm());
            [unit * -*spacing_m, Point3::ZERO, unit * *spacing_m]
        }
        ShapeSpec::Rotation { axis, angle_rad } => {
            let rot = Mat3::axis_angle(Point3::from(*axis), *angle_rad);
            [rot.mul_vec(base[0]), rot.mul_vec(base[1]), rot.mul_vec(base[2])]
        }
        ShapeSpec::Shrink { scale } => {
            if !(*scale > 0.0 && *scale <= 1.0) {
                return Err(FormationError::InfeasibleShape(format!(
                    "shrink scale {scale} outside (0, 1]"
                )));
            }
            [base[0] * *scale, base[1] * *scale, base[2] * *scale]
        }
    };
    let min_sep = min_pairwise_distance(&offsets);
    if min_sep < 2.0 * uav_radius - 1e-9 {
        return Err(FormationError::InfeasibleShape(format!(
            "{} brings UAVs {min_sep:.3} m apart, below 2 * uav_radius = {:.3} m",
            spec.name(),
            2.0 * uav_radius
        )));
    }
    Ok(offsets)
}

pub fn min_pairwise_distance(offsets: &[Point3; 3]) -> f64 {
    let mut min = f64::INFINITY;
    for m in 0..3 {
        for n in m + 1..3 {
            min = min.min(offsets[m].distance(offsets[n]));
        }
    }
    min
}

pub fn max_pairwise_distance(offsets: &[Point3; 3]) -> f64 {
    let mut max: f64 = 0.0;
    for m in 0..3 {
        for n in m + 1..3 {
            max = max.max(offsets[m].distance(offsets[n]));
        }
    }
    max
}

/// A scheduled reconfiguration around one IWP.
///
/// The formation morphs into `target_offsets` over [t1, t2], holds the new
/// shape while traversing the passage over [t2, t3], and morphs back over
/// [t3, t4]. Arc-length counterparts s1..s4 refer to the centroid path.
#[derive(Debug, Clone)]
pub struct ReconfigPlan {
    pub shape: ShapeSpec,
    pub target_offsets: [Point3; 3],
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub iwp: Option<IntermediateWaypoint>,
}

impl ReconfigPlan {
    /// Builds a plan from explicit phase times at a constant centroid speed.
    pub fn from_times(
        shape: ShapeSpec,
        target_offsets: [Point3; 3],
        times: (f64, f64, f64, f64),
        speed: f64,
    ) -> Result<ReconfigPlan, FormationError> {
        let (t1, t2, t3, t4) = times;
        if !(t1 < t2 && t2 <= t3 && t3 < t4) {
            return Err(FormationError::BadPhaseOrder { t1, t2, t3, t4 });
        }
        Ok(ReconfigPlan {
            shape,
            target_offsets,
            t1,
            t2,
            t3,
            t4,
            s1: t1 * speed,
            s2: t2 * speed,
            s3: t3 * speed,
            s4: t4 * speed,
            iwp: None,
        })
    }

    pub fn transformation_time(&self) -> f64 {
        self.t2 - self.t1
    }

    pub fn reconfiguration_time(&self) -> f64 {
        self.t4 - self.t3
    }
}

/// Scheduling knobs; distances are along the centroid path.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleParams {
    pub lead_buffer_m: f64,
    pub lag_buffer_m: f64,
    pub transform_distance_m: f64,
    /// How far laterally the IWP may sit from the centroid path.
    pub max_lateral_offset_m: f64,
}

/// Places the four phase boundaries so the hold interval spans the passage.
pub fn schedule(
    path: &Polyline3,
    iwp: &IntermediateWaypoint,
    shape: ShapeSpec,
    target_offsets: [Point3; 3],
    nominal_speed: f64,
    params: &ScheduleParams,
) -> Result<ReconfigPlan, FormationError> {
    let s_star = path.closest_arc_to_xy(iwp.position);
    let lateral = path.point_at(s_star).xy().distance(iwp.position);
    if lateral > params.max_lateral_offset_m {
        return Err(FormationError::IwpOutOfReach {
            x: iwp.position.x,
            y: iwp.position.y,
            dist: lateral,
            reach: params.max_lateral_offset_m,
        });
    }

    let s2 = s_star - (iwp.passage_half_extent_m + params.lead_buffer_m);
    let s3 = s_star + (iwp.passage_half_extent_m + params.lag_buffer_m);
    let s1 = s2 - params.transform_distance_m;
    let s4 = s3 + params.transform_distance_m;
    let total = path.total_length();
    let (t1, t2, t3, t4) =
        (s1 / nominal_speed, s2 / nominal_speed, s3 / nominal_speed, s4 / nominal_speed);
    if s1 < 0.0 || s4 > total {
        return Err(FormationError::WindowOutsideMission { t1, t4, total: total / nominal_speed });
    }
    if !(t1 < t2 && t2 <= t3 && t3 < t4) {
        return Err(FormationError::BadPhaseOrder { t1, t2, t3, t4 });
    }
    Ok(ReconfigPlan {
        shape,
        target_offsets,
        t1,
        t2,
        t3,
        t4,
        s1,
        s2,
        s3,
        s4,
        iwp: Some(iwp.clone()),
    })
}

/// Rejects plans whose morph windows overlap in time. Expects plans sorted
/// by `t1`.
pub fn check_plan_sequence(plans: &[ReconfigPlan]) -> Result<(), FormationError> {
    for pair in plans.windows(2) {
        if pair[1].t1 < pair[0].t4 {
            return Err(FormationError::OverlappingWindows {
                a1: pair[0].t1,
                a4: pair[0].t4,
                b1: pair[1].t1,
                b4: pair[1].t4,
            });
        }
    }
    Ok(())
}
