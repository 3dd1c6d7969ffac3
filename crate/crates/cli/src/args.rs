use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "pinchflow",
    version,
    about = "Pinching constants, Grassmann curvature and graphical MCF on the torus"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat JSON object of flag values; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// δ_Λ on a grid, Λ₀, Λ₁ and Λ′.
    Constants(ConstantsArgs),
    /// Conditions (A), (B), (C) for a symmetric space.
    Curvature(CurvatureArgs),
    /// α₀, g(α₀) and x*.
    Appendix,
    /// Run the graphical flow from one initial map.
    Simulate(SimulateArgs),
    /// Run the flow over a grid of shear amplitudes and sizes.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Symplectic,
    Free,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SymmetryArg {
    #[value(alias = "full_symmetric")]
    FullSymmetric,
    Unconstrained,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// Number of singular value pairs.
    #[arg(long = "N", default_value_t = 1)]
    pub n_pairs: usize,
    #[arg(long, value_enum, default_value = "symplectic")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "full-symmetric")]
    pub symmetry: SymmetryArg,
    /// "start:stop:step" or a comma separated list.
    #[arg(long = "Lambda-grid", default_value = "1:4:0.5")]
    pub lambda_grid: String,
    /// Exponent n for Λ₁(n, Λ₀) and Λ′_n.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Largest Λ probed when bracketing Λ₀.
    #[arg(long, default_value_t = 10.0)]
    pub probe: f64,
    #[arg(long, default_value_t = 9)]
    pub grid_per_axis: usize,
    #[arg(long, default_value_t = 200)]
    pub refine_iters: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpaceArg {
    Grassmann,
    Skew,
    Sym,
    Quadric,
}

#[derive(Args, Debug)]
pub struct CurvatureArgs {
    #[arg(long, value_enum, default_value = "grassmann")]
    pub space: SpaceArg,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Second dimension, GrassmannI only.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Identity,
    Linear,
    Shears,
}

#[derive(Args, Debug, Clone)]
pub struct FlowArgs {
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.2)]
    pub dt_factor: f64,
    /// Stencil order, 2 or 4.
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    #[arg(long, default_value_t = 100)]
    pub record_every: usize,
    /// Stop once max |II|² drops below this.
    #[arg(long = "stop-II2", default_value_t = 0.0)]
    pub stop_ii2: f64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "shears")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 1)]
    pub harmonics: usize,
    /// Linear part "a11,a12,a21,a22" for --kind linear.
    #[arg(long = "A", default_value = "1,1,0,1")]
    pub a: String,
    /// Initial map from a grid file; overrides --kind.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long = "L", default_value_t = 64)]
    pub grid_size: usize,
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Compare with the Riccati envelope using δ at this pinch.
    #[arg(long = "riccati-Lambda1")]
    pub riccati_lambda1: Option<f64>,
    /// Write the final map as a grid file.
    #[arg(long)]
    pub final_grid: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma separated shear amplitudes.
    #[arg(long, default_value = "0.05,0.1")]
    pub eps: String,
    #[arg(long, default_value_t = 1)]
    pub harmonics: usize,
    /// Comma separated grid sizes.
    #[arg(long = "L", default_value = "32")]
    pub grid_sizes: String,
    #[command(flatten)]
    pub flow: FlowArgs,
}
