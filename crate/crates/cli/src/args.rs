use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "optpred",
    version,
    about = "Optimal prediction with memory for a coupled-oscillator model"
)]
pub struct Cli {
    /// Worker threads (0 = all cores). Outputs do not depend on this.
    #[arg(long, global = true, env = "MZ_THREADS")]
    pub threads: Option<usize>,

    /// `key=value` file supplying defaults; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw equilibrium samples of the full system.
    Sample(SampleArgs),
    /// Conditional ensemble mean of the resolved variables.
    Truth(TruthArgs),
    /// Estimate the equilibrium memory kernel.
    Kernel(KernelArgs),
    /// Integrate the truncated (Galerkin) system.
    Galerkin(ReducedArgs),
    /// Integrate first-order optimal prediction.
    Op1(ReducedArgs),
    /// Solve the memory equation with a kernel file.
    Predict(PredictArgs),
    /// Join four result files on a common grid and plot y1.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Number of samples.
    #[arg(long, value_parser = positive_count)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive_real)]
    pub temp: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Resolved initial data `(x1, x2)`.
#[derive(Debug, Args)]
pub struct InitialData {
    #[arg(long, default_value_t = 1.0, value_parser = finite_real, allow_hyphen_values = true)]
    pub x1: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite_real, allow_hyphen_values = true)]
    pub x2: f64,
}

#[derive(Debug, Args)]
pub struct Grid {
    /// Time step.
    #[arg(long, default_value_t = 0.01, value_parser = positive_real)]
    pub dt: f64,
    /// Number of steps; the grid has `steps + 1` nodes.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct TruthArgs {
    #[command(flatten)]
    pub data: InitialData,
    #[arg(long, default_value_t = 1.0, value_parser = positive_real)]
    pub temp: f64,
    #[arg(long, default_value_t = 10_000, value_parser = positive_count)]
    pub members: usize,
    #[command(flatten)]
    pub grid: Grid,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Resolved component (1-based) whose kernel is estimated.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=2))]
    pub component: u64,
    #[arg(long, default_value_t = 1.0, value_parser = positive_real)]
    pub temp: f64,
    #[arg(long, default_value_t = 10_000, value_parser = positive_count)]
    pub members: usize,
    #[command(flatten)]
    pub grid: Grid,
    /// Largest lag, in steps.
    #[arg(long, default_value_t = 1000)]
    pub max_lag: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReducedArgs {
    #[command(flatten)]
    pub data: InitialData,
    #[arg(long, default_value_t = 1.0, value_parser = positive_real)]
    pub temp: f64,
    #[command(flatten)]
    pub grid: Grid,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sign {
    /// Non-memory components follow the closure.
    Consistent,
    /// Non-memory components negated, as in the printed two-variable example.
    Paper,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: InitialData,
    /// Kernel table written by `kernel`; also fixes the temperature.
    #[arg(long, value_name = "FILE")]
    pub kernel: PathBuf,
    /// Time step; must equal the kernel's lag spacing. Defaults to it.
    #[arg(long, value_parser = positive_real)]
    pub dt: Option<f64>,
    /// Number of steps. Defaults to the kernel's largest lag.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = Sign::Consistent)]
    pub sign: Sign,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub galerkin: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub op1: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub predict: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_csv: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out_svg: PathBuf,
}

fn finite_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    let v = finite_real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a nonnegative integer")),
    }
}
