//! Acceptance gate: one test per criterion, each ending in a single
//! PASS line. Run with `cargo test --test acceptance -- --nocapture`.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use formation_planner::cost::{discretize, total_cost, CostWeights};
use formation_planner::formation::{shape_offsets, ReconfigPlan, ShapeSpec};
use formation_planner::iwp::detect_iwps;
use formation_planner::pipeline::{run_plan, PlanOutcome, RunConfig};
use formation_planner::scenario::{CylinderObstacle, Point2, Point3, Scenario};
use formation_planner::theta_pso::{decode, optimize, AxisBounds, PsoParams};
use formation_planner::trajectory::{generate, ViolationKind};
use formation_planner::Polyline3;

const BASE: [Point3; 3] = [
    Point3 { x: 0.0, y: 2.0, z: 0.0 },
    Point3 { x: -2.0, y: -1.0, z: 0.0 },
    Point3 { x: 2.0, y: -1.0, z: 0.0 },
];

fn scenario_path(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn corridor_scenario() -> Scenario {
    formation_planner::scenario::load_scenario(scenario_path("corridor_empty.toml").as_ref())
        .unwrap()
}

fn corridor_cost<'a>(
    scenario: &'a Scenario,
    r_f: f64,
) -> impl Fn(&[Point3]) -> formation_planner::cost::CostBreakdown + 'a {
    move |control| total_cost(control, scenario, &CostWeights::default(), &[], 100, r_f).unwrap()
}

#[test]
fn criterion_1_optimizer_finds_near_straight_paths() {
    let scenario = corridor_scenario();
    let r_f = scenario.formation_radius();
    let straight = scenario.mission.start_m.distance(scenario.mission.goal_m);
    let mut hits = 0;
    for seed in 0..20u64 {
        let params = PsoParams { rng_seed: seed, ..PsoParams::default() };
        assert_eq!((params.swarm_size, params.waypoints, params.iterations), (100, 7, 150));
        let t0 = Instant::now();
        let result = optimize(&scenario, corridor_cost(&scenario, r_f), &params).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        assert!(elapsed <= 10.0, "seed {seed} took {elapsed:.1} s, above the 10 s budget");
        if result.path.breakdown.j1 <= 1.01 * straight {
            hits += 1;
        }
    }
    assert!(hits >= 19, "only {hits}/20 runs came within 1% of the straight line");
    println!("criterion 1: PASS — {hits}/20 seeded runs within 1% of the straight-line length");
}

#[test]
fn criterion_2_global_best_never_increases() {
    let bridge =
        formation_planner::scenario::load_scenario(scenario_path("bridge_gap.toml").as_ref())
            .unwrap();
    let mut blocked = corridor_scenario();
    blocked.obstacles =
        vec![CylinderObstacle { x_m: 50.0, y_m: 0.0, radius_m: 2.0, height_m: 30.0 }];
    let scenarios = [corridor_scenario(), bridge, blocked];

    let mut checked = 0usize;
    for scenario in &scenarios {
        let r_f = scenario.formation_radius();
        let iwps: Vec<Point2> =
            detect_iwps(scenario, r_f).iter().map(|i| i.position).collect();
        let cost = |control: &[Point3]| {
            total_cost(control, scenario, &CostWeights::default(), &iwps, 100, r_f).unwrap()
        };
        for seed in 0..50u64 {
            let params = PsoParams {
                swarm_size: 12,
                iterations: 25,
                rng_seed: seed,
                ..PsoParams::default()
            };
            let result = optimize(scenario, cost, &params).unwrap();
            for pair in result.convergence.windows(2) {
                assert!(
                    pair[1].breakdown.total <= pair[0].breakdown.total,
                    "cost rose at iteration {} for seed {seed}",
                    pair[1].iteration
                );
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 150);
    println!("criterion 2: PASS — non-increasing convergence in 50 seeds x 3 scenarios");
}

#[test]
fn criterion_3_cost_terms_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let template = corridor_scenario();
    for case in 0..100 {
        let mut scenario = template.clone();
        scenario.obstacles = (0..rng.gen_range(1..=5))
            .map(|_| CylinderObstacle {
                x_m: rng.gen_range(5.0..95.0),
                y_m: rng.gen_range(-9.0..9.0),
                radius_m: rng.gen_range(0.5..4.0),
                height_m: rng.gen_range(5.0..25.0),
            })
            .collect();
        let control: Vec<Point3> = (0..rng.gen_range(2..=6))
            .map(|_| {
                Point3::new(
                    rng.gen_range(0.0..100.0),
                    rng.gen_range(-9.0..9.0),
                    rng.gen_range(1.0..20.0),
                )
            })
            .collect();
        let iwps: Vec<Point2> = (0..rng.gen_range(0..=3))
            .map(|_| Point2::new(rng.gen_range(0.0..100.0), rng.gen_range(-9.0..9.0)))
            .collect();
        let r_f = rng.gen_range(0.5..4.0);
        let segments = rng.gen_range(10..=60);
        let weights = CostWeights::default();

        let got = total_cost(&control, &scenario, &weights, &iwps, segments, r_f).unwrap();
        let nodes = discretize(&control, segments).unwrap().nodes().to_vec();

        // independent double-loop evaluation over the same discretization
        let mut j1 = 0.0;
        for w in nodes.windows(2) {
            let (dx, dy, dz) = (w[1].x - w[0].x, w[1].y - w[0].y, w[1].z - w[0].z);
            j1 += (dx * dx + dy * dy + dz * dz).sqrt();
        }
        let mids: Vec<Point3> = nodes.windows(2).map(|w| (w[0] + w[1]) * 0.5).collect();
        let mut j2 = 0.0;
        for mid in &mids {
            for obs in &scenario.obstacles {
                let hor = ((mid.x - obs.x_m).powi(2) + (mid.y - obs.y_m).powi(2)).sqrt()
                    - obs.radius_m;
                let hor = hor.max(0.0);
                let d = if mid.z > obs.height_m {
                    (hor * hor + (mid.z - obs.height_m).powi(2)).sqrt()
                } else {
                    hor
                };
                let r_s = obs.radius_m + r_f + scenario.safety.clearance_margin_m;
                j2 += (1.0 - d / r_s).max(0.0);
            }
        }
        j2 /= (mids.len() * scenario.obstacles.len()) as f64;
        let mut j3 = 0.0;
        for mid in &mids {
            j3 += if mid.z <= 0.0 {
                1e9
            } else if mid.z > scenario.workspace.z_max_m {
                mid.z - scenario.workspace.z_max_m
            } else if mid.z < scenario.workspace.z_min_m {
                scenario.workspace.z_min_m - mid.z
            } else {
                0.0
            };
        }
        let mut jr = 0.0;
        if !iwps.is_empty() {
            for mid in &mids {
                for iwp in &iwps {
                    jr += ((mid.x - iwp.x).powi(2) + (mid.y - iwp.y).powi(2)).sqrt();
                }
            }
            jr /= (mids.len() * iwps.len()) as f64;
        }

        for (name, got, want) in
            [("J1", got.j1, j1), ("J2", got.j2, j2), ("J3", got.j3, j3), ("JR", got.jr, jr)]
        {
            let scale = want.abs().max(1.0);
            assert!(
                (got - want).abs() <= 1e-10 * scale,
                "case {case}: {name} = {got}, oracle = {want}"
            );
        }
    }
    println!("criterion 3: PASS — all four cost terms match the brute-force oracle on 100 cases");
}

#[test]
fn criterion_4_decode_identities_and_bounds() {
    for (min, max) in [(0.0, 100.0), (-10.0, 10.0), (7.0, 15.0), (-50.0, -20.0)] {
        let b = AxisBounds::new(min, max);
        assert_eq!(decode(FRAC_PI_2, &b).unwrap(), max);
        assert_eq!(decode(-FRAC_PI_2, &b).unwrap(), min);
        assert_eq!(decode(0.0, &b).unwrap(), 0.5 * (max + min));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1_000_000 {
        let min = rng.gen_range(-1000.0..1000.0);
        let b = AxisBounds::new(min, min + rng.gen_range(1e-3..500.0));
        let x = decode(rng.gen_range(-FRAC_PI_2..=FRAC_PI_2), &b).unwrap();
        assert!(x >= b.min && x <= b.max, "decoded {x} outside [{}, {}]", b.min, b.max);
    }
    println!("criterion 4: PASS — decode identities exact, 1e6 random angles stay in bounds");
}

#[test]
fn criterion_5_iwp_midpoints_and_band_filter() {
    use formation_planner::iwp::gap_geometry;

    // midpoint equidistance over random non-overlapping pairs
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs = 0;
    while pairs < 1000 {
        let p = CylinderObstacle {
            x_m: rng.gen_range(-50.0..50.0),
            y_m: rng.gen_range(-50.0..50.0),
            radius_m: rng.gen_range(0.2..6.0),
            height_m: 20.0,
        };
        let q = CylinderObstacle {
            x_m: rng.gen_range(-50.0..50.0),
            y_m: rng.gen_range(-50.0..50.0),
            radius_m: rng.gen_range(0.2..6.0),
            height_m: 20.0,
        };
        if p.center().distance(q.center()) <= p.radius_m + q.radius_m + 0.01 {
            continue;
        }
        let g = gap_geometry(0, 1, &p, &q).unwrap();
        let c = (g.boundary_p + g.boundary_q) * 0.5;
        let to_p = c.distance(p.center()) - p.radius_m;
        let to_q = c.distance(q.center()) - q.radius_m;
        assert!((to_p - to_q).abs() < 1e-9, "midpoint not equidistant: {to_p} vs {to_q}");
        assert!((to_p - g.width_m / 2.0).abs() < 1e-9);
        pairs += 1;
    }

    // band filtering against an independent pair scan
    let template = corridor_scenario();
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let mut scenario = template.clone();
        scenario.obstacles = (0..6)
            .map(|_| CylinderObstacle {
                x_m: rng.gen_range(10.0..90.0),
                y_m: rng.gen_range(-8.0..8.0),
                radius_m: rng.gen_range(0.5..5.0),
                height_m: 20.0,
            })
            .collect();
        let r_f = scenario.formation_radius();
        let s = &scenario.safety;
        let lower = 2.0 * s.uav_radius_m + s.clearance_margin_m;
        let upper = 2.0 * (r_f + s.clearance_margin_m);

        let mut expected = Vec::new();
        for i in 0..scenario.obstacles.len() {
            for j in i + 1..scenario.obstacles.len() {
                let (p, q) = (&scenario.obstacles[i], &scenario.obstacles[j]);
                let dist = ((p.x_m - q.x_m).powi(2) + (p.y_m - q.y_m).powi(2)).sqrt();
                if dist < 1e-9 || dist > scenario.reconfig.neighborhood_radius_m {
                    continue;
                }
                let width = (dist - p.radius_m - q.radius_m).max(0.0);
                if width >= lower && width < upper {
                    expected.push((i, j, width));
                }
            }
        }

        let detected = detect_iwps(&scenario, r_f);
        // every detected IWP must be in the expected band list
        for iwp in &detected {
            assert!(
                expected
                    .iter()
                    .any(|(i, j, w)| (*i, *j) == iwp.pair && (w - iwp.gap_width_m).abs() < 1e-9),
                "trial {trial}: detected pair {:?} outside the brute-force band list",
                iwp.pair
            );
        }
        // every banded pair with a feasible shape must be detected
        for (i, j, width) in &expected {
            let feasible = !formation_planner::iwp::shape_feasibility(
                *width,
                {
                    let g = gap_geometry(*i, *j, &scenario.obstacles[*i], &scenario.obstacles[*j])
                        .unwrap();
                    (g.boundary_p + g.boundary_q) * 0.5
                },
                &scenario,
            )
            .is_empty();
            assert_eq!(
                detected.iter().any(|iwp| iwp.pair == (*i, *j)),
                feasible,
                "trial {trial}: band pair ({i}, {j}) detection mismatch"
            );
        }
    }
    println!("criterion 5: PASS — midpoint equidistance on 1000 pairs, band filter matches scan");
}

fn plan_bridge(reconfig: bool, seed: u64, out: &std::path::Path) -> PlanOutcome {
    let mut config = RunConfig::new(scenario_path("bridge_gap.toml"), out);
    config.pso.swarm_size = 40;
    config.pso.iterations = 60;
    config.pso.rng_seed = seed;
    config.reconfig_enabled = reconfig;
    run_plan(&config).unwrap()
}

#[test]
fn criterion_6_narrow_bridge_needs_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = plan_bridge(true, 0, &dir.path().join("with"));
    assert_eq!(outcome.iwps.len(), 1, "expected exactly one IWP");
    assert_eq!(outcome.plans.len(), 1);
    assert!(matches!(outcome.plans[0].shape, ShapeSpec::Alignment { .. }));
    assert!(
        outcome.validation.is_clean(),
        "aligned pass should be violation-free, got {:?}",
        outcome.report.violations
    );

    let rigid = plan_bridge(false, 0, &dir.path().join("without"));
    assert!(rigid.iwps.is_empty());
    let clearance = rigid
        .validation
        .violations
        .iter()
        .filter(|v| v.kind == ViolationKind::ObstacleClearance)
        .count();
    assert!(clearance >= 1, "rigid formation must hit a clearance violation");
    println!(
        "criterion 6: PASS — alignment pass is clean, rigid pass has {clearance} clearance violations"
    );
}

#[test]
fn criterion_7_rotation_schedule_preserves_shape() {
    let spec = ShapeSpec::Rotation { axis: [0.0, 1.0, 0.0], angle_rad: FRAC_PI_2 };
    let target = shape_offsets(&spec, &BASE, 0.35).unwrap();
    let plan = ReconfigPlan::from_times(spec, target, (20.0, 26.0, 27.0, 35.0), 3.0).unwrap();
    let path =
        Polyline3::new(vec![Point3::new(0.0, 0.0, 10.0), Point3::new(120.0, 0.0, 10.0)]);
    let (set, warnings) = generate(&path, &[plan], &BASE, 3.0, 0.1, 10.0);
    assert!(warnings.is_empty());

    let mut base_pairs = [[0.0; 3]; 3];
    for m in 0..3 {
        for n in 0..3 {
            base_pairs[m][n] = BASE[m].distance(BASE[n]);
        }
    }
    let mut uav23_altitude_changed = false;
    for (i, t) in set.times.iter().enumerate() {
        let p = [set.uavs[0].positions[i], set.uavs[1].positions[i], set.uavs[2].positions[i]];
        if (26.0..=27.0).contains(t) {
            for m in 0..3 {
                for n in 0..3 {
                    assert!(
                        (p[m].distance(p[n]) - base_pairs[m][n]).abs() < 1e-9,
                        "t={t}: pairwise distance not preserved during the hold"
                    );
                }
            }
        }
        assert!((p[0].z - 10.0).abs() < 1e-9, "t={t}: leader altitude changed");
        if (p[1].z - 10.0).abs() > 1.0 && (p[2].z - 10.0).abs() > 1.0 {
            uav23_altitude_changed = true;
        }
    }
    assert!(uav23_altitude_changed, "non-leader UAVs never changed altitude");
    println!("criterion 7: PASS — rotation hold is rigid, only non-leader altitudes change");
}

#[test]
fn criterion_8_centroid_tracks_planned_path() {
    let dir = tempfile::tempdir().unwrap();

    let mut corridor = RunConfig::new(scenario_path("corridor_empty.toml"), dir.path().join("a"));
    corridor.pso.swarm_size = 20;
    corridor.pso.iterations = 20;
    let outcomes = [
        run_plan(&corridor).unwrap(),
        plan_bridge(true, 0, &dir.path().join("b")),
        plan_bridge(false, 0, &dir.path().join("c")),
    ];

    for outcome in &outcomes {
        let flown: Vec<Point3> =
            outcome.report.path_waypoints_m.iter().map(|w| Point3::new(w[0], w[1], w[2])).collect();
        let path = Polyline3::new(flown);
        let speed = outcome.scenario.mission.nominal_speed_mps;
        let set = &outcome.trajectories;
        for (i, t) in set.times.iter().enumerate() {
            let mean = (set.uavs[0].positions[i]
                + set.uavs[1].positions[i]
                + set.uavs[2].positions[i])
                * (1.0 / 3.0);
            let planned = path.point_at((speed * t).min(path.total_length()));
            assert!(
                mean.distance(planned) <= 1e-9,
                "t={t}: centroid off the planned path by {}",
                mean.distance(planned)
            );
        }
    }
    println!("criterion 8: PASS — centroid within 1e-9 of the planned path in all missions");
}

#[test]
fn criterion_9_half_scale_shrink_hold() {
    let r_q = 0.35;
    let spec = ShapeSpec::Shrink { scale: 0.5 };
    let target = shape_offsets(&spec, &BASE, r_q).unwrap();
    let plan = ReconfigPlan::from_times(spec, target, (10.0, 14.0, 20.0, 24.0), 3.0).unwrap();
    let path =
        Polyline3::new(vec![Point3::new(0.0, 0.0, 10.0), Point3::new(100.0, 0.0, 10.0)]);
    let (set, _) = generate(&path, &[plan], &BASE, 3.0, 0.1, 10.0);

    let mut held = 0;
    for (i, t) in set.times.iter().enumerate() {
        if !(14.0..=20.0).contains(t) {
            continue;
        }
        held += 1;
        let p = [set.uavs[0].positions[i], set.uavs[1].positions[i], set.uavs[2].positions[i]];
        let mut min_sep = f64::INFINITY;
        for m in 0..3 {
            for n in 0..3 {
                let want = 0.5 * BASE[m].distance(BASE[n]);
                assert!(
                    (p[m].distance(p[n]) - want).abs() < 1e-9,
                    "t={t}: held distance matrix is not half the nominal"
                );
                if m != n {
                    min_sep = min_sep.min(p[m].distance(p[n]));
                }
            }
        }
        assert!(min_sep >= 2.0 * r_q, "t={t}: min separation {min_sep} below 2 r_Q");
    }
    assert!(held > 0);
    println!("criterion 9: PASS — hold matrix is 0.5x nominal, min separation above 2 r_Q");
}

#[test]
fn criterion_10_repeat_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    plan_bridge(true, 3, &dir.path().join("first"));
    plan_bridge(true, 3, &dir.path().join("second"));
    for name in ["uav_1.txt", "uav_2.txt", "uav_3.txt", "convergence.csv"] {
        let a = std::fs::read(dir.path().join("first").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("second").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    println!("criterion 10: PASS — repeated runs produce byte-identical outputs");
}
