use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hhgq", version, about = "Semiconductor HHG and the quantum state of the emitted light")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Flat `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set t2_fs=inf`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for the momentum sweep (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harmonic spectrum and currents.
    Spectrum(Plain),
    /// Wigner function of the fundamental mode after conditioning.
    Wigner(WignerArgs),
    /// Fock-state and coherent-state fidelities along a parameter axis.
    Fidelity(FidelityArgs),
    /// Linear entropy across modes or along a parameter axis.
    Entropy(EntropyArgs),
    /// Zone-aggregated mode displacements.
    Displacement(Plain),
    /// Built-in invariant suite.
    Validate(ValidateArgs),
    /// Fix the coupling g0 at the reference working point.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct Plain {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ComponentArg {
    Total,
    Inter,
    Intra,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = ComponentArg::Total)]
    pub component: ComponentArg,
    /// Points per phase-space axis.
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    /// Half-width of the square; by default 5 beyond the largest amplitude.
    #[arg(long)]
    pub half: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanAxis {
    /// Peak field (V/Å).
    E0,
    /// Dephasing time (fs).
    T2,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Range {
    /// First scan value; defaults to 0.2 V/Å or 1 fs.
    #[arg(long)]
    pub from: Option<f64>,
    /// Last scan value; defaults to 0.6 V/Å or 20 fs.
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 9)]
    pub steps: usize,
}

impl Range {
    pub fn values(&self, axis: ScanAxis) -> Vec<f64> {
        let (a, b) = match axis {
            ScanAxis::E0 => (self.from.unwrap_or(0.2), self.to.unwrap_or(0.6)),
            ScanAxis::T2 => (self.from.unwrap_or(1.0), self.to.unwrap_or(20.0)),
        };
        if self.steps <= 1 {
            return vec![a];
        }
        (0..self.steps).map(|i| a + (b - a) * i as f64 / (self.steps - 1) as f64).collect()
    }
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = ScanAxis::E0)]
    pub axis: ScanAxis,
    #[command(flatten)]
    pub range: Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyAxis {
    Q,
    E0,
    T2,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = EntropyAxis::Q)]
    pub axis: EntropyAxis,
    /// Mode whose entropy is tracked along the e0 and t2 axes.
    #[arg(long, default_value_t = 1)]
    pub mode: usize,
    #[arg(long, value_enum, default_value_t = ComponentArg::Total)]
    pub component: ComponentArg,
    #[command(flatten)]
    pub range: Range,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Corrupt one side of the Wigner oracle pair to demonstrate detection.
    #[arg(long)]
    pub mutate_dipole_sign: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Linear entropy of the fundamental mode to reach.
    #[arg(long, default_value_t = hhgq::calibration::TARGET_ENTROPY)]
    pub target: f64,
}
