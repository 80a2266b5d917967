//! `sailnav`: simulate sailboat races to a target under a random wind.
//!
//! Exit codes: 0 on success, 1 when a reported check fails, 2 on usage or
//! domain errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sailnav", version, about = "Sailboat navigation under a random wind")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one path and optionally write its trajectory CSV.
    Simulate(SimulateArgs),
    /// Estimate expected payoff, tack counts and tails over many paths.
    Montecarlo(MontecarloArgs),
    /// Print the analytical bounds for a parameter set.
    Bounds(BoundsArgs),
    /// Run a scripted adversarial wind scenario.
    Scenario(ScenarioArgs),
    /// Euler strong-error study against the exact fixed-heading solutions.
    Convergence(ConvergenceArgs),
    /// Render a trajectory CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    ImpulseA,
    AStar,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Config file (JSON, snake_case keys); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wind volatility [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Boat speed [default: 1]
    #[arg(long)]
    pub v: Option<f64>,
    /// Cost per tack [default: 0.5]
    #[arg(long)]
    pub c: Option<f64>,
    /// Target radius [default: 0.1]
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    /// Strategy [default: impulse-a]
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyName>,
    /// Tacking margin of the impulse strategy [default: π/8]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Outer radius of the impulse strategy [default: 1]
    #[arg(long)]
    pub r0: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Start radius [default: r0]
    #[arg(long)]
    pub r: Option<f64>,
    /// Start angle in the rotating frame [default: π/2]
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Start tack, 1 (starboard) or -1 (port) [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub tack: Option<i8>,
    /// Time step [default: 1e-3 times r0/v, or r/v for a-star]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Time horizon [default: 200 times max(r0, r)/v]
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Master seed [default: 20240917]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ramp coefficients to zero over [eta - 1/n, eta] instead of cutting off
    #[arg(long)]
    pub damping_n: Option<u32>,
    /// JSON wind schedule `[{"t":..,"angle_rad":..}, ..]` replacing the Brownian wind
    #[arg(long)]
    pub wind_schedule: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Keep every n-th step in the trajectory [default: 1]
    #[arg(long)]
    pub record_stride: Option<usize>,
    /// Trajectory CSV path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add geographic columns xi1, xi2 to the CSV
    #[arg(long)]
    pub geographic: bool,
}

#[derive(Debug, Args)]
pub struct MontecarloArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of paths [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest tack index in the tail table [default: 10]
    #[arg(long)]
    pub tail_max: Option<usize>,
    /// Worker threads; results do not depend on it [default: all cores]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Results JSON path [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Tacking margin [default: π/8]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Outer radius [default: 1]
    #[arg(long)]
    pub r0: Option<f64>,
    /// Start radius for the calm-wind bound [default: r0]
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    /// Wind shifts that keep the impulse strategy cycling between two radii.
    ShiftTrap,
    /// Quarter-turn shift after every tack.
    Ninety,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(value_enum)]
    pub kind: ScenarioKind,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Tacking margin [default: π/8, or 0.2 for ninety]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Outer radius (shift-trap) or start radius (ninety) [default: 1]
    #[arg(long)]
    pub r0: Option<f64>,
    /// Start angle past the port layline [default: π/4 - 0.02]
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Wind shift per step of the trap [default: 0.75·alpha]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Radius where the trap starts [default: 0.95·r0]
    #[arg(long)]
    pub r1: Option<f64>,
    /// Cap on shifts per cycle [default: none]
    #[arg(long)]
    pub shift_limit: Option<u32>,
    /// Disable the wind shifts of the ninety-degree loop
    #[arg(long)]
    pub no_shifts: bool,
    /// Cycles to run [default: 10]
    #[arg(long)]
    pub cycles: Option<u32>,
    /// Time step [default: 1e-3·r0/v]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Trajectory CSV path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add geographic columns xi1, xi2 to the CSV
    #[arg(long)]
    pub geographic: bool,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Config file (JSON, snake_case keys); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wind volatility [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Boat speed [default: 1]
    #[arg(long)]
    pub v: Option<f64>,
    /// Step sizes, comma separated [default: 1e-2,1e-3,1e-4]
    #[arg(long, value_delimiter = ',')]
    pub dts: Option<Vec<f64>>,
    /// Paths per step size [default: 200]
    #[arg(long)]
    pub n: Option<usize>,
    /// Final time [default: 1]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Reference grid refinement below the smallest step [default: 10]
    #[arg(long)]
    pub refine: Option<usize>,
    /// Steps of the radial check [default: 10000]
    #[arg(long)]
    pub radial_steps: Option<usize>,
    /// Master seed [default: 20240917]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameName {
    Rotating,
    Geographic,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trajectory CSV
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "rotating")]
    pub frame: FrameName,
    /// Target radius to draw
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Picture size in pixels
    #[arg(long, default_value_t = 640.0)]
    pub size: f64,
    /// SVG path [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Montecarlo(a) => commands::montecarlo(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Scenario(a) => commands::scenario(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Plot(a) => commands::plot(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
