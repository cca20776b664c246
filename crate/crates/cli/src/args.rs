use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bailfund::analysis::{CompensatorComponent, OrderingFamily};
use bailfund::simulate::ReturnFactor;
use bailfund::{DistSpec, ModelKind};

#[derive(Debug, Parser)]
#[command(name = "bailfund", version, about = "Simulate and analyse community bail fund balances")]
pub struct Cli {
    /// Worker threads for replication loops (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one balance path and write `t,value` rows.
    Simulate(SimulateArgs),
    /// Compute a deterministic fluid limit.
    Fluid(FluidArgs),
    /// Pointwise sample mean and standard deviation over replications.
    Mean(MeanArgs),
    /// Sup-norm distance to the fluid limit as the scale grows.
    Converge(ConvergeArgs),
    /// Check the pathwise orderings on coupled replications.
    Order(OrderArgs),
    /// Check that reflecting the infinite model reproduces partial fulfilment.
    Equiv(EquivArgs),
    /// Centered compensator diagnostics for the blocking model.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Parameter preset: example1, example2-inf or example2-block. Individual flags override it.
    #[arg(long, default_value = "example1")]
    pub preset: String,
    /// Initial capital M0 [default: 10, or the preset's value]
    #[arg(long)]
    pub m0: Option<f64>,
    /// Donation arrival rate [default: 1, or the preset's value]
    #[arg(long)]
    pub lambda_d: Option<f64>,
    /// Bail request arrival rate [default: 1, or the preset's value]
    #[arg(long)]
    pub lambda_b: Option<f64>,
    /// Donation size, e.g. exp:1, unif:0:2, point:3 [default: exp:1, or the preset's value]
    #[arg(long)]
    pub dist_d: Option<DistSpec>,
    /// Bail size [default: exp:1, or the preset's value]
    #[arg(long)]
    pub dist_b: Option<DistSpec>,
    /// Poundage fraction kept by the court [default: unif:0:1, or the preset's value]
    #[arg(long)]
    pub dist_p: Option<DistSpec>,
    /// Trial delay [default: exp:10, or the preset's value]
    #[arg(long)]
    pub dist_s: Option<DistSpec>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scale factor: rates times eta, amounts divided by eta.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Base seed.
    #[arg(long, env = "BAILFUND_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Time horizon T.
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// inf, block, partial, skorokhod, inf-nr, block-nr, partial-nr, skorokhod-nr
    #[arg(long, default_value = "inf")]
    pub model: ModelKind,
    /// Scripted event file instead of random arrivals [default: none]
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Comma-separated times to sample the path at [default: none, write breakpoints]
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Also write the input events in scenario format to this file [default: none]
    #[arg(long)]
    pub emit_events: Option<PathBuf>,
    /// Return factor credited by `skorokhod`: one-minus-p or p.
    #[arg(long, default_value = "one-minus-p")]
    pub skorokhod_return_factor: ReturnFactor,
    /// Output file, `-` for standard output.
    #[arg(short, long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FluidChoice {
    Inf,
    Skorokhod,
    Block,
}

#[derive(Debug, Args)]
pub struct FluidArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = FluidChoice::Inf)]
    pub model: FluidChoice,
    /// Time horizon T.
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    /// Grid step.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Output file, `-` for standard output.
    #[arg(short, long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "inf")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Comma-separated sample times [default: 0, 1, ..., T]
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Output file, `-` for standard output.
    #[arg(short, long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// inf, skorokhod or block
    #[arg(long, default_value = "inf")]
    pub model: ModelKind,
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,256")]
    pub etas: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    /// Grid step of the reference fluid curve.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, env = "BAILFUND_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Output file, `-` for standard output.
    #[arg(short, long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// no-returns or with-returns
    #[arg(long, default_value = "no-returns")]
    pub family: OrderingFamily,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, env = "BAILFUND_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Violations CSV, `-` for standard output [default: none, summary only]
    #[arg(short, long)]
    pub output: Option<String>,
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, env = "BAILFUND_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "one-minus-p")]
    pub skorokhod_return_factor: ReturnFactor,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// donation, bail or return
    #[arg(long, default_value = "bail")]
    pub component: CompensatorComponent,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "5,10,25,50")]
    pub checkpoints: Vec<f64>,
    #[arg(long, env = "BAILFUND_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Output file, `-` for standard output.
    #[arg(short, long, default_value = "-")]
    pub output: String,
}
