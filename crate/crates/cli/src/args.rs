use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "sta", version, about = "Robust shortcut-to-adiabaticity transport in a moving harmonic trap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Design a protocol; writes protocol.json and trajectory.csv
    Design(DesignArgs),
    /// Final-excitation curve, optional transient and Λ for a protocol file
    Evaluate(EvaluateArgs),
    /// Λ(η) over a grid of placement spacings
    Sweep(SweepArgs),
    /// Spacing ε that minimizes Λ(η)
    Optimize(OptimizeArgs),
    /// Reference datasets: fig1a trajectories, fig1b transients, fig2 robustness sweeps
    Reproduce(ReproduceArgs),
    /// Split-operator check of a protocol at desk scale
    Qverify(QverifyArgs),
    /// Re-run the command recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Dimensionless,
    Physical,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct UnitArgs {
    /// Output units; inputs are always in reduced units (a₀, 1/ω_ref, ω_ref)
    #[arg(long, value_enum, default_value = "dimensionless")]
    pub units: Units,
    /// Ion mass in atomic mass units (physical mode)
    #[arg(long)]
    pub mass_amu: Option<f64>,
    /// Reference trap frequency ω_ref/2π in Hz (physical mode)
    #[arg(long)]
    pub omega_hz: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DesignArgs {
    /// Design angular frequencies ω_i, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub freqs: Vec<f64>,
    /// Transport duration t_f
    #[arg(long, allow_negative_numbers = true)]
    pub tf: f64,
    /// Transport distance d
    #[arg(long, allow_negative_numbers = true)]
    pub d: f64,
    #[command(flatten)]
    pub units: UnitArgs,
    /// Trajectory samples in trajectory.csv
    #[arg(long, default_value_t = sta_core::io::TRAJECTORY_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub protocol: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 1.1)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Also write the transient ΔE(t) at --omega
    #[arg(long, requires = "omega")]
    pub transient: bool,
    /// Trap frequency for the transient series
    #[arg(long)]
    pub omega: Option<f64>,
    /// RK4 steps for the transient series
    #[arg(long)]
    pub steps: Option<usize>,
    /// Half-width of the Λ window; Λ is printed when given
    #[arg(long)]
    pub eta: Option<f64>,
    /// Centre of the Λ window
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PatternArgs {
    /// one_point, two_point, three_point or symmetric_<N>
    #[arg(long)]
    pub pattern: String,
    #[arg(long, allow_negative_numbers = true)]
    pub tf: f64,
    #[arg(long, default_value_t = 30000.0, allow_negative_numbers = true)]
    pub d: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
    #[arg(long, default_value_t = 0.02)]
    pub eta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    /// Explicit ε grid, comma separated (default 0, 0.0025, …, 0.08)
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    #[arg(long, default_value_t = 0.0)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 0.08)]
    pub eps_max: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig2,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QverifyArgs {
    #[arg(long)]
    pub protocol: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Transport distance used for the simulation (the protocol is redesigned at this d)
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub d_scale: f64,
    /// Grid points
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 0.002)]
    pub dt: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (default: the one recorded in the manifest)
    #[arg(long)]
    pub out: Option<PathBuf>,
}
