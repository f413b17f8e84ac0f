//! Angle-encoded particle swarm optimizer.
//!
//! Particles carry phase angles in [-pi/2, pi/2]; a sine map decodes each
//! angle into a workspace coordinate. The swarm evolves the angles and the
//! decoded global best becomes the formation centroid path.
//!
//! Every particle draws from its own counter-based RNG stream derived from
//! the run seed, so results do not depend on evaluation order and repeated
//! runs with the same seed are bit-identical.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::CostBreakdown;
use crate::scenario::{Point3, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum PsoError {
    #[error("invalid PSO parameters: {0}")]
    InvalidParams(String),
    #[error("phase angle {0} outside [-pi/2, pi/2]")]
    AngleOutOfRange(f64),
    #[error("infeasible setup: {0}")]
    InfeasibleSetup(String),
}

/// Swarm parameters. `waypoints` is the number of interior path waypoints;
/// the particle dimension is three times that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub waypoints: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub rng_seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm_size: 100,
            waypoints: 7,
            iterations: 150,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            rng_seed: 0,
        }
    }
}

impl PsoParams {
    pub fn dimensions(&self) -> usize {
        3 * self.waypoints
    }

    pub fn validate(&self) -> Result<(), PsoError> {
        if self.swarm_size < 2 {
            return Err(PsoError::InvalidParams("swarm_size must be >= 2".into()));
        }
        if self.waypoints < 1 {
            return Err(PsoError::InvalidParams("waypoints must be >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(PsoError::InvalidParams("iterations must be >= 1".into()));
        }
        if !(self.inertia > 0.0 && self.inertia <= 1.0) {
            return Err(PsoError::InvalidParams("inertia must be in (0, 1]".into()));
        }
        if !(self.cognitive > 0.0 && self.social > 0.0) {
            return Err(PsoError::InvalidParams("cognitive and social gains must be > 0".into()));
        }
        Ok(())
    }
}

/// Search bounds for one decoded dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBounds {
    pub min: f64,
    pub max: f64,
}

impl AxisBounds {
    pub fn new(min: f64, max: f64) -> AxisBounds {
        assert!(max > min, "AxisBounds requires max > min");
        AxisBounds { min, max }
    }
}

/// Per-dimension bounds in waypoint-interleaved order (x, y, z, x, y, z, ...).
pub fn workspace_bounds(scenario: &Scenario, waypoints: usize) -> Vec<AxisBounds> {
    let w = &scenario.workspace;
    (0..3 * waypoints)
        .map(|j| match j % 3 {
            0 => AxisBounds::new(w.x_min_m, w.x_max_m),
            1 => AxisBounds::new(w.y_min_m, w.y_max_m),
            _ => AxisBounds::new(w.z_min_m, w.z_max_m),
        })
        .collect()
}

/// Sine map from a phase angle to a coordinate inside the bounds.
pub fn decode(theta: f64, bounds: &AxisBounds) -> Result<f64, PsoError> {
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
        return Err(PsoError::AngleOutOfRange(theta));
    }
    let x = 0.5 * ((bounds.max - bounds.min) * theta.sin() + bounds.max + bounds.min);
    Ok(x.clamp(bounds.min, bounds.max))
}

/// Inverse of [`decode`]; used to seed a particle from a known path.
pub fn encode(x: f64, bounds: &AxisBounds) -> f64 {
    let r = ((2.0 * x - bounds.max - bounds.min) / (bounds.max - bounds.min)).clamp(-1.0, 1.0);
    r.asin()
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub theta: Vec<f64>,
    pub delta_theta: Vec<f64>,
    pub best_theta: Vec<f64>,
    pub best_cost: f64,
    pub best_breakdown: Option<CostBreakdown>,
}

impl Particle {
    fn new(theta: Vec<f64>) -> Particle {
        let dims = theta.len();
        Particle {
            best_theta: theta.clone(),
            theta,
            delta_theta: vec![0.0; dims],
            best_cost: f64::INFINITY,
            best_breakdown: None,
        }
    }
}

/// One velocity/position update with the random factors supplied.
///
/// `r1` and `r2` are drawn once per particle per iteration and shared
/// across dimensions. Both the angle and its increment are clamped back
/// into [-pi/2, pi/2].
pub fn step_with_random(
    particle: &mut Particle,
    global_best: &[f64],
    params: &PsoParams,
    r1: f64,
    r2: f64,
) {
    for j in 0..particle.theta.len() {
        let theta = particle.theta[j];
        let delta = params.inertia * particle.delta_theta[j]
            + params.cognitive * r1 * (particle.best_theta[j] - theta)
            + params.social * r2 * (global_best[j] - theta);
        let delta = delta.clamp(-FRAC_PI_2, FRAC_PI_2);
        particle.delta_theta[j] = delta;
        particle.theta[j] = (theta + delta).clamp(-FRAC_PI_2, FRAC_PI_2);
    }
}

/// Draws the two random factors from the particle's stream and updates it.
pub fn step(
    particle: &mut Particle,
    global_best: &[f64],
    params: &PsoParams,
    rng: &mut impl Rng,
) {
    let r1: f64 = rng.gen();
    let r2: f64 = rng.gen();
    step_with_random(particle, global_best, params, r1, r2);
}

/// The decoded global best with its cost breakdown.
#[derive(Debug, Clone)]
pub struct CandidatePath {
    /// Start, the interior waypoints, then the goal.
    pub waypoints: Vec<Point3>,
    pub breakdown: CostBreakdown,
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub breakdown: CostBreakdown,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub path: CandidatePath,
    pub convergence: Vec<IterationRecord>,
}

fn decode_control_path(
    theta: &[f64],
    bounds: &[AxisBounds],
    scenario: &Scenario,
) -> Result<Vec<Point3>, PsoError> {
    let mut control = Vec::with_capacity(theta.len() / 3 + 2);
    control.push(scenario.mission.start_m);
    for w in 0..theta.len() / 3 {
        let x = decode(theta[3 * w], &bounds[3 * w])?;
        let y = decode(theta[3 * w + 1], &bounds[3 * w + 1])?;
        let z = decode(theta[3 * w + 2], &bounds[3 * w + 2])?;
        control.push(Point3::new(x, y, z));
    }
    control.push(scenario.mission.goal_m);
    Ok(control)
}

fn check_endpoint_feasibility(scenario: &Scenario) -> Result<(), PsoError> {
    for (name, p) in [("start", scenario.mission.start_m), ("goal", scenario.mission.goal_m)] {
        if !scenario.workspace.contains_xy(p.xy()) {
            return Err(PsoError::InfeasibleSetup(format!(
                "{name} lies outside the workspace bounds"
            )));
        }
        for (k, obs) in scenario.obstacles.iter().enumerate() {
            if obs.contains(p) {
                return Err(PsoError::InfeasibleSetup(format!(
                    "{name} lies inside obstacle {k}"
                )));
            }
        }
    }
    Ok(())
}

/// Runs the full iteration-by-particle loop and returns the decoded global
/// best. Deterministic for a fixed `params.rng_seed`.
pub fn optimize<F>(
    scenario: &Scenario,
    cost_fn: F,
    params: &PsoParams,
) -> Result<OptimizeResult, PsoError>
where
    F: Fn(&[Point3]) -> CostBreakdown,
{
    params.validate()?;
    check_endpoint_feasibility(scenario)?;

    let dims = params.dimensions();
    let bounds = workspace_bounds(scenario, params.waypoints);
    let start = scenario.mission.start_m;
    let goal = scenario.mission.goal_m;

    // Particle RNG streams: one ChaCha stream per particle, derived from the
    // run seed, so evaluation order cannot change the outcome.
    let mut rngs: Vec<ChaCha8Rng> = (0..params.swarm_size)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
            rng.set_stream(1 + i as u64);
            rng
        })
        .collect();

    let mut particles: Vec<Particle> = Vec::with_capacity(params.swarm_size);
    for (i, rng) in rngs.iter_mut().enumerate() {
        let theta = if i == 0 {
            // seed one particle with the straight start-goal line
            (0..dims)
                .map(|j| {
                    let w = j / 3;
                    let frac = (w as f64 + 1.0) / (params.waypoints as f64 + 1.0);
                    let p = start + (goal - start) * frac;
                    let coord = match j % 3 {
                        0 => p.x,
                        1 => p.y,
                        _ => p.z,
                    };
                    encode(coord, &bounds[j])
                })
                .collect()
        } else {
            (0..dims).map(|_| rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)).collect()
        };
        particles.push(Particle::new(theta));
    }

    let mut global_best_theta: Vec<f64> = Vec::new();
    let mut global_best_cost = f64::INFINITY;
    let mut global_best_breakdown: Option<CostBreakdown> = None;

    let evaluate = |particle: &mut Particle| -> Result<CostBreakdown, PsoError> {
        let control = decode_control_path(&particle.theta, &bounds, scenario)?;
        let breakdown = cost_fn(&control);
        if breakdown.total < particle.best_cost {
            particle.best_cost = breakdown.total;
            particle.best_theta = particle.theta.clone();
            particle.best_breakdown = Some(breakdown);
        }
        Ok(breakdown)
    };

    for particle in &mut particles {
        evaluate(particle)?;
    }
    for particle in &particles {
        if particle.best_cost < global_best_cost {
            global_best_cost = particle.best_cost;
            global_best_theta = particle.best_theta.clone();
            global_best_breakdown = particle.best_breakdown;
        }
    }

    let mut convergence = Vec::with_capacity(params.iterations);
    for iteration in 1..=params.iterations {
        // synchronous update: every particle sees the same global best
        let snapshot = global_best_theta.clone();
        for (particle, rng) in particles.iter_mut().zip(rngs.iter_mut()) {
            step(particle, &snapshot, params, rng);
            evaluate(particle)?;
        }
        for particle in &particles {
            if particle.best_cost < global_best_cost {
                global_best_cost = particle.best_cost;
                global_best_theta = particle.best_theta.clone();
                global_best_breakdown = particle.best_breakdown;
            }
        }
        convergence.push(IterationRecord {
            iteration,
            breakdown: global_best_breakdown.expect("at least one particle evaluated"),
        });
    }

    let waypoints = decode_control_path(&global_best_theta, &bounds, scenario)?;
    Ok(OptimizeResult {
        path: CandidatePath {
            waypoints,
            breakdown: global_best_breakdown.expect("at least one particle evaluated"),
        },
        convergence,
    })
}
