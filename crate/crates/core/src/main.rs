use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use formation_planner::cost::CostWeights;
use formation_planner::pipeline::{
    run_inspect_iwps, run_plan, run_validate, PipelineError, RunConfig,
};
use formation_planner::theta_pso::PsoParams;

// Exit codes: 0 success, 2 scenario error, 3 optimizer infeasibility,
// 4 scheduling conflict, 5 validation failures, 1 anything else.
const EXIT_SCENARIO: u8 = 2;
const EXIT_OPTIMIZER: u8 = 3;
const EXIT_SCHEDULING: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "formation-planner",
    about = "Plans collision-free inspection paths for a three-UAV triangular formation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write trajectories, report and convergence log
    Plan(PlanArgs),
    /// List detected intermediate waypoints without optimizing
    InspectIwps {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Re-validate previously written trajectory files against a scenario
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory holding uav_1.txt .. uav_3.txt
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    swarm_size: usize,
    #[arg(long, default_value_t = 150)]
    iterations: usize,
    /// Number of interior path waypoints
    #[arg(long, default_value_t = 7)]
    waypoints: usize,
    /// Path discretization segment count for cost evaluation
    #[arg(long, default_value_t = 100)]
    segments: usize,
    #[arg(long, default_value_t = 1.0)]
    beta1: f64,
    #[arg(long, default_value_t = 1000.0)]
    beta2: f64,
    #[arg(long, default_value_t = 100.0)]
    beta3: f64,
    /// Disable IWP detection and formation reconfiguration
    #[arg(long)]
    no_reconfig: bool,
    /// Output directory
    #[arg(long, env = "FORMATION_PLANNER_OUT", default_value = "out")]
    out: PathBuf,
}

fn error_exit(err: &PipelineError) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        PipelineError::Scenario(_) => ExitCode::from(EXIT_SCENARIO),
        PipelineError::Optimizer(_) => ExitCode::from(EXIT_OPTIMIZER),
        PipelineError::Scheduling(_) => ExitCode::from(EXIT_SCHEDULING),
        _ => ExitCode::FAILURE,
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Plan(args) => {
            let config = RunConfig {
                scenario_path: args.scenario,
                pso: PsoParams {
                    swarm_size: args.swarm_size,
                    waypoints: args.waypoints,
                    iterations: args.iterations,
                    rng_seed: args.seed,
                    ..PsoParams::default()
                },
                weights: CostWeights {
                    beta1: args.beta1,
                    beta2: args.beta2,
                    beta3: args.beta3,
                    ..CostWeights::default()
                },
                segments: args.segments,
                reconfig_enabled: !args.no_reconfig,
                out_dir: args.out,
            };
            match run_plan(&config) {
                Ok(outcome) => {
                    let b = outcome.report.cost;
                    println!(
                        "cost: total={:.3} J1={:.3} J2={:.6} J3={:.3} JR={:.3}",
                        b.total, b.j1, b.j2, b.j3, b.jr
                    );
                    for iwp in &outcome.report.iwps {
                        println!(
                            "IWP at ({:.2}, {:.2}) gap {:.2} m -> {} over t=[{:.1}, {:.1}, {:.1}, {:.1}] s",
                            iwp.x_m, iwp.y_m, iwp.gap_width_m, iwp.shape,
                            iwp.t1_s, iwp.t2_s, iwp.t3_s, iwp.t4_s
                        );
                    }
                    for w in &outcome.report.speed_warnings {
                        eprintln!("warning: {w}");
                    }
                    if outcome.validation.is_clean() {
                        println!("validation: clean");
                        ExitCode::SUCCESS
                    } else {
                        for v in &outcome.report.violations {
                            eprintln!("violation: {v}");
                        }
                        eprintln!(
                            "validation: {} violation(s)",
                            outcome.validation.violations.len()
                        );
                        ExitCode::from(EXIT_VALIDATION)
                    }
                }
                Err(err) => error_exit(&err),
            }
        }
        Command::InspectIwps { scenario } => match run_inspect_iwps(&scenario) {
            Ok((_, iwps)) => {
                if iwps.is_empty() {
                    println!("no intermediate waypoints detected");
                } else {
                    for iwp in &iwps {
                        let shapes: Vec<String> =
                            iwp.feasible_shapes.iter().map(|s| s.to_string()).collect();
                        println!(
                            "IWP at ({:.2}, {:.2}) gap {:.2} m between obstacles {} and {}, feasible: {}",
                            iwp.position.x,
                            iwp.position.y,
                            iwp.gap_width_m,
                            iwp.pair.0,
                            iwp.pair.1,
                            shapes.join(", ")
                        );
                    }
                }
                ExitCode::SUCCESS
            }
            Err(err) => error_exit(&err),
        },
        Command::Validate { scenario, dir } => match run_validate(&scenario, &dir) {
            Ok(report) => {
                if report.is_clean() {
                    println!("validation: clean");
                    ExitCode::SUCCESS
                } else {
                    for v in &report.violations {
                        println!("violation: {v}");
                    }
                    println!("validation: {} violation(s)", report.violations.len());
                    ExitCode::from(EXIT_VALIDATION)
                }
            }
            Err(err) => error_exit(&err),
        },
    }
}
