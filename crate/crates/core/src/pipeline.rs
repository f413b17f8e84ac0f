//! End-to-end planning pipeline: load the scenario, detect IWPs, optimize
//! the centroid path, schedule reconfigurations, generate and validate the
//! per-UAV commands, and write the output artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cost::{total_cost, CostBreakdown, CostWeights};
use crate::formation::{
    check_plan_sequence, shape_offsets, FormationError, ReconfigPlan, ScheduleParams,
};
use crate::iwp::{choose_shape, detect_iwps, IntermediateWaypoint};
use crate::polyline::Polyline3;
use crate::scenario::{load_scenario, Point3, Scenario, ScenarioError};
use crate::theta_pso::{optimize, OptimizeResult, PsoError, PsoParams};
use crate::trajectory::{generate, validate, TrajectorySet, ValidationReport, COMMAND_DT};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Optimizer(#[from] PsoError),
    #[error("scheduling failed: {0}")]
    Scheduling(#[from] FormationError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trajectory file {path}: {reason}")]
    MalformedTrajectory { path: PathBuf, reason: String },
}

/// Everything a planning run needs beyond the scenario file itself.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario_path: PathBuf,
    pub pso: PsoParams,
    pub weights: CostWeights,
    pub segments: usize,
    pub reconfig_enabled: bool,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn new(scenario_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            scenario_path: scenario_path.into(),
            pso: PsoParams::default(),
            weights: CostWeights::default(),
            segments: 100,
            reconfig_enabled: true,
            out_dir: out_dir.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IwpReport {
    pub x_m: f64,
    pub y_m: f64,
    pub gap_width_m: f64,
    pub obstacle_pair: [usize; 2],
    pub feasible_shapes: Vec<String>,
    pub shape: String,
    pub t1_s: f64,
    pub t2_s: f64,
    pub t3_s: f64,
    pub t4_s: f64,
}

/// Structured run summary, serialized to `report.toml`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub swarm_size: usize,
    pub iterations: usize,
    pub waypoints: usize,
    pub segments: usize,
    pub reconfig_enabled: bool,
    pub path_waypoints_m: Vec<[f64; 3]>,
    pub speed_warnings: Vec<String>,
    pub violations: Vec<String>,
    pub cost: CostBreakdown,
    pub iwps: Vec<IwpReport>,
}

/// In-memory results of a full planning run.
pub struct PlanOutcome {
    pub scenario: Scenario,
    pub optimize: OptimizeResult,
    pub iwps: Vec<IntermediateWaypoint>,
    pub plans: Vec<ReconfigPlan>,
    pub trajectories: TrajectorySet,
    pub validation: ValidationReport,
    pub report: RunReport,
}

/// Runs the whole pipeline and writes trajectory files, the convergence
/// log and the run report into `out_dir`.
pub fn run_plan(config: &RunConfig) -> Result<PlanOutcome, PipelineError> {
    let scenario = load_scenario(&config.scenario_path)?;
    config.weights.validate().map_err(PipelineError::Config)?;
    if config.segments < config.pso.waypoints + 2 {
        return Err(PipelineError::Config(format!(
            "segments ({}) must be at least waypoints + 2 ({})",
            config.segments,
            config.pso.waypoints + 2
        )));
    }

    let base = scenario.mission.uav_offsets_m;
    let formation_radius = scenario.formation_radius();

    let iwps = if config.reconfig_enabled {
        detect_iwps(&scenario, formation_radius)
    } else {
        Vec::new()
    };
    let iwp_positions: Vec<_> = iwps.iter().map(|i| i.position).collect();

    let cost_fn = |control: &[Point3]| -> CostBreakdown {
        total_cost(
            control,
            &scenario,
            &config.weights,
            &iwp_positions,
            config.segments,
            formation_radius,
        )
        .expect("segment count validated against waypoint count")
    };
    let optimize_result = optimize(&scenario, cost_fn, &config.pso)?;

    let path = Polyline3::new(snap_through_iwps(optimize_result.path.waypoints.clone(), &iwps));
    let speed = scenario.mission.nominal_speed_mps;
    let transform_distance = scenario.reconfig.transform_distance_m.unwrap_or_else(|| {
        2.0 * path.total_length() / (config.pso.waypoints as f64 + 1.0)
    });
    let schedule_params = ScheduleParams {
        lead_buffer_m: scenario.reconfig.lead_buffer_m,
        lag_buffer_m: scenario.reconfig.lag_buffer_m,
        transform_distance_m: transform_distance,
        max_lateral_offset_m: (2.0 * formation_radius).max(5.0),
    };

    let mut plans = Vec::new();
    for iwp in &iwps {
        let Some(kind) = choose_shape(iwp, &scenario) else {
            return Err(PipelineError::Config(format!(
                "no shape in the priority list is feasible for the IWP at ({:.2}, {:.2})",
                iwp.position.x, iwp.position.y
            )));
        };
        let spec = crate::iwp::candidate_shape_spec(kind, iwp.gap_width_m, &scenario);
        let target = shape_offsets(&spec, &base, scenario.safety.uav_radius_m)?;
        plans.push(crate::formation::schedule(
            &path,
            iwp,
            spec,
            target,
            speed,
            &schedule_params,
        )?);
    }
    plans.sort_by(|a, b| a.t1.partial_cmp(&b.t1).unwrap());
    check_plan_sequence(&plans)?;

    let (trajectories, speed_warnings) = generate(
        &path,
        &plans,
        &base,
        speed,
        COMMAND_DT,
        scenario.reconfig.max_speed_mps,
    );
    let validation = validate(&trajectories, &scenario);

    let report = RunReport {
        scenario: config.scenario_path.display().to_string(),
        seed: config.pso.rng_seed,
        swarm_size: config.pso.swarm_size,
        iterations: config.pso.iterations,
        waypoints: config.pso.waypoints,
        segments: config.segments,
        reconfig_enabled: config.reconfig_enabled,
        path_waypoints_m: path.points().iter().map(|p| (*p).into()).collect(),
        speed_warnings: speed_warnings.iter().map(|w| w.to_string()).collect(),
        violations: validation.violations.iter().map(|v| v.to_string()).collect(),
        cost: optimize_result.path.breakdown,
        iwps: iwps
            .iter()
            .zip(&plans)
            .map(|(iwp, plan)| IwpReport {
                x_m: iwp.position.x,
                y_m: iwp.position.y,
                gap_width_m: iwp.gap_width_m,
                obstacle_pair: [iwp.pair.0, iwp.pair.1],
                feasible_shapes: iwp.feasible_shapes.iter().map(|s| s.to_string()).collect(),
                shape: plan.shape.name().to_string(),
                t1_s: plan.t1,
                t2_s: plan.t2,
                t3_s: plan.t3,
                t4_s: plan.t4,
            })
            .collect(),
    };

    write_outputs(&config.out_dir, &trajectories, &optimize_result, &report)?;

    Ok(PlanOutcome {
        scenario,
        optimize: optimize_result,
        iwps,
        plans,
        trajectories,
        validation,
        report,
    })
}

/// Bends the optimized path so it passes exactly through each IWP.
///
/// The attraction term only pulls the path near a passage; the clearance
/// guarantee of a reconfigured shape holds when the centroid crosses at
/// the gap midpoint, so the nearest point of the path is moved onto it.
fn snap_through_iwps(mut waypoints: Vec<Point3>, iwps: &[IntermediateWaypoint]) -> Vec<Point3> {
    for iwp in iwps {
        let path = Polyline3::new(waypoints.clone());
        let s = path.closest_arc_to_xy(iwp.position);
        if s < 1e-9 || s > path.total_length() - 1e-9 {
            continue; // mission endpoints stay fixed
        }
        let p = Point3::new(iwp.position.x, iwp.position.y, path.point_at(s).z);
        let mut cum = 0.0;
        for i in 1..waypoints.len() {
            cum += waypoints[i - 1].distance(waypoints[i]);
            if cum >= s - 1e-9 {
                if (cum - s).abs() < 1e-9 && i < waypoints.len() - 1 {
                    waypoints[i] = p;
                } else {
                    waypoints.insert(i, p);
                }
                break;
            }
        }
    }
    waypoints
}

/// Loads the scenario and lists detected IWPs without optimizing.
pub fn run_inspect_iwps(
    scenario_path: &Path,
) -> Result<(Scenario, Vec<IntermediateWaypoint>), PipelineError> {
    let scenario = load_scenario(scenario_path)?;
    let iwps = detect_iwps(&scenario, scenario.formation_radius());
    Ok((scenario, iwps))
}

/// Re-validates previously written trajectory files against a scenario.
pub fn run_validate(
    scenario_path: &Path,
    dir: &Path,
) -> Result<ValidationReport, PipelineError> {
    let scenario = load_scenario(scenario_path)?;
    let set = read_trajectory_files(dir)?;
    Ok(validate(&set, &scenario))
}

fn write_outputs(
    out_dir: &Path,
    trajectories: &TrajectorySet,
    optimize_result: &OptimizeResult,
    report: &RunReport,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out_dir)?;

    for (n, uav) in trajectories.uavs.iter().enumerate() {
        let mut f = std::io::BufWriter::new(std::fs::File::create(
            out_dir.join(format!("uav_{}.txt", n + 1)),
        )?);
        writeln!(f, "# t_s x_m y_m z_m v_mps")?;
        for (i, t) in trajectories.times.iter().enumerate() {
            let p = uav.positions[i];
            writeln!(f, "{:.3} {:.6} {:.6} {:.6} {:.3}", t, p.x, p.y, p.z, uav.speeds[i])?;
        }
    }

    let mut f = std::io::BufWriter::new(std::fs::File::create(out_dir.join("convergence.csv"))?);
    writeln!(f, "iteration,total,j1,j2,j3,jr")?;
    for rec in &optimize_result.convergence {
        let b = rec.breakdown;
        writeln!(f, "{},{},{},{},{},{}", rec.iteration, b.total, b.j1, b.j2, b.j3, b.jr)?;
    }

    let toml = toml::to_string_pretty(report)
        .map_err(|e| PipelineError::Config(format!("report serialization failed: {e}")))?;
    std::fs::write(out_dir.join("report.toml"), toml)?;
    Ok(())
}

/// Parses the three `uav_N.txt` files written by [`run_plan`].
pub fn read_trajectory_files(dir: &Path) -> Result<TrajectorySet, PipelineError> {
    let mut times: Option<Vec<f64>> = None;
    let mut uavs = Vec::with_capacity(3);
    for n in 1..=3 {
        let path = dir.join(format!("uav_{n}.txt"));
        let text = std::fs::read_to_string(&path)?;
        let mut t = Vec::new();
        let mut positions = Vec::new();
        let mut speeds = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, std::num::ParseFloatError>>()
                .map_err(|e| PipelineError::MalformedTrajectory {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
            if fields.len() != 5 {
                return Err(PipelineError::MalformedTrajectory {
                    path: path.clone(),
                    reason: format!("expected 5 columns, found {}", fields.len()),
                });
            }
            t.push(fields[0]);
            positions.push(Point3::new(fields[1], fields[2], fields[3]));
            speeds.push(fields[4]);
        }
        match &times {
            None => times = Some(t),
            Some(existing) if *existing != t => {
                return Err(PipelineError::MalformedTrajectory {
                    path,
                    reason: "timestamp column differs between UAV files".into(),
                });
            }
            Some(_) => {}
        }
        uavs.push(crate::trajectory::UavTrajectory { positions, speeds });
    }
    let times = times.unwrap_or_default();
    let uavs: [crate::trajectory::UavTrajectory; 3] =
        uavs.try_into().map_err(|_| PipelineError::MalformedTrajectory {
            path: dir.to_path_buf(),
            reason: "expected three UAV files".into(),
        })?;
    Ok(TrajectorySet { times, uavs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_scenario(dir: &Path, text: &str) -> PathBuf {
        let path = dir.join("scenario.toml");
        std::fs::write(&path, text).unwrap();
        path
    }

    const EMPTY_CORRIDOR: &str = r#"
        [workspace]
        x_min_m = 0.0
        x_max_m = 100.0
        y_min_m = -10.0
        y_max_m = 10.0
        z_min_m = 7.0
        z_max_m = 15.0

        [safety]
        uav_radius_m = 0.35
        comm_range_m = 50.0
        surface_standoff_min_m = 1.0
        surface_standoff_max_m = 5.0
        clearance_margin_m = 0.0

        [mission]
        start_m = [0.0, 0.0, 10.0]
        goal_m = [100.0, 0.0, 10.0]
        nominal_speed_mps = 3.0
        uav_offsets_m = [[0.0, 2.0, 0.0], [-2.0, -1.0, 0.0], [2.0, -1.0, 0.0]]
    "#;

    #[test]
    fn empty_corridor_plans_clean_and_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let scenario_path = write_scenario(dir.path(), EMPTY_CORRIDOR);
        let out = dir.path().join("out");
        let mut config = RunConfig::new(&scenario_path, &out);
        config.pso.swarm_size = 20;
        config.pso.iterations = 20;
        let outcome = run_plan(&config).unwrap();
        assert!(outcome.validation.is_clean());
        assert!(outcome.iwps.is_empty());
        for f in ["uav_1.txt", "uav_2.txt", "uav_3.txt", "convergence.csv", "report.toml"] {
            assert!(out.join(f).exists(), "missing {f}");
        }
        // written files parse back into the same timeline
        let set = read_trajectory_files(&out).unwrap();
        assert_eq!(set.times.len(), outcome.trajectories.times.len());
    }

    #[test]
    fn convergence_log_is_non_increasing() {
        let dir = tempfile::tempdir().unwrap();
        let scenario_path = write_scenario(dir.path(), EMPTY_CORRIDOR);
        let mut config = RunConfig::new(&scenario_path, dir.path().join("out"));
        config.pso.swarm_size = 15;
        config.pso.iterations = 25;
        config.pso.rng_seed = 5;
        let outcome = run_plan(&config).unwrap();
        let text = std::fs::read_to_string(dir.path().join("out/convergence.csv")).unwrap();
        let costs: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(costs.len(), outcome.optimize.convergence.len());
        for pair in costs.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
    }

    #[test]
    fn snapping_routes_the_path_through_the_iwp() {
        let iwp = IntermediateWaypoint {
            position: crate::scenario::Point2::new(50.0, 0.8),
            gap_width_m: 2.0,
            pair: (0, 1),
            passage_half_extent_m: 4.0,
            feasible_shapes: vec![crate::scenario::ShapeKind::Alignment],
        };
        let waypoints = vec![
            Point3::new(0.0, 0.0, 10.0),
            Point3::new(40.0, 1.5, 10.0),
            Point3::new(60.0, -1.0, 11.0),
            Point3::new(100.0, 0.0, 10.0),
        ];
        let snapped = snap_through_iwps(waypoints.clone(), std::slice::from_ref(&iwp));
        assert_eq!(snapped.len(), waypoints.len() + 1);
        let path = Polyline3::new(snapped.clone());
        let s = path.closest_arc_to_xy(iwp.position);
        assert!(path.point_at(s).xy().distance(iwp.position) < 1e-9);
        assert_eq!(snapped.first(), waypoints.first());
        assert_eq!(snapped.last(), waypoints.last());
    }

    #[test]
    fn missing_scenario_file_is_a_scenario_error() {
        let config = RunConfig::new("/nonexistent/scenario.toml", "/tmp/out");
        assert!(matches!(run_plan(&config), Err(PipelineError::Scenario(_))));
    }

    #[test]
    fn bad_segment_count_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let scenario_path = write_scenario(dir.path(), EMPTY_CORRIDOR);
        let mut config = RunConfig::new(&scenario_path, dir.path().join("out"));
        config.segments = 3;
        assert!(matches!(run_plan(&config), Err(PipelineError::Config(_))));
    }
}
