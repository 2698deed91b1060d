use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robust_dnn::dgp::{InnovationLaw, RegressionFn};
use robust_dnn::losses::LossSpec;

/// Robust deep learning for weakly dependent time series: simulation,
/// training, evaluation and the theoretical rate calculators.
#[derive(Debug, Parser)]
#[command(name = "robust-wdep-dnn", version)]
pub struct Cli {
    /// Print progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a trajectory from a nonlinear autoregressive process.
    Simulate(SimulateArgs),
    /// Fit a network to a trajectory by empirical risk minimization.
    Train(TrainArgs),
    /// Prediction errors of a trained network, optionally excess risks.
    Eval(EvalArgs),
    /// Architecture schedule prescribed by the theory at a sample size.
    Plan(PlanArgs),
    /// Excess-risk bounds on a grid of sample sizes.
    Bound(BoundArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Arithmetic checks of the theoretical hypotheses.
    CheckAssumptions(CheckArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Regression function: dgp1 or dgp2.
    #[arg(long)]
    pub dgp: RegressionFn,
    /// Innovation law: gaussian, t2, t<df>, cauchy or zero.
    #[arg(long)]
    pub error: InnovationLaw,
    /// Number of observations kept after burn-in.
    #[arg(long)]
    pub n: usize,
    /// Seed of the innovation stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Discarded initial steps.
    #[arg(long, default_value_t = robust_dnn::dgp::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Trajectory CSV as written by `simulate`.
    #[arg(long)]
    pub data: PathBuf,
    /// Take the lag order from this process (dgp1: 3, dgp2: 2).
    #[arg(long, conflicts_with = "order")]
    pub dgp: Option<RegressionFn>,
    /// Lag order p.
    #[arg(long)]
    pub order: Option<usize>,
    /// l1, huber, huber:<delta> or l2.
    #[arg(long, default_value = "l1")]
    pub loss: LossSpec,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "100,100")]
    pub hidden: Vec<usize>,
    /// TOML or JSON file with training settings; flags given here win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Adam step size [default: 0.001].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Mini-batch size [default: 32].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Epochs without improvement of the training risk before stopping [default: 30].
    #[arg(long)]
    pub patience: Option<usize>,
    /// Epoch cap [default: 1000].
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Seed of initialization and shuffling [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the fitted parameters (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of the training risk per epoch.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Parameters written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Test trajectory CSV for MAPE and RMSPE.
    #[arg(long)]
    pub data: PathBuf,
    /// Also report excess risks against this process.
    #[arg(long, requires = "error")]
    pub dgp: Option<RegressionFn>,
    /// Innovation law of that process.
    #[arg(long, requires = "dgp")]
    pub error: Option<InnovationLaw>,
    /// Length of the simulated evaluation trajectory.
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,
    /// Seed of the evaluation trajectory.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Discarded initial steps of the evaluation trajectory.
    #[arg(long, default_value_t = robust_dnn::dgp::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// Threshold of the Huber excess-risk column.
    #[arg(long, default_value_t = robust_dnn::losses::DEFAULT_HUBER_DELTA)]
    pub huber_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Constants {
    Proof,
    Statement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Psi {
    Theta,
    Eta,
    Kappa,
    Lambda,
}

/// Constants of the theorems. Unset flags fall back to `--inputs`, then to
/// the built-in defaults.
#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// TOML or JSON file with theory inputs.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    /// Smoothness s.
    #[arg(long)]
    pub s: Option<f64>,
    /// Input dimension d.
    #[arg(long)]
    pub d: Option<usize>,
    /// Moment order r; `inf` allowed.
    #[arg(long)]
    pub r: Option<f64>,
    /// Loss whose Lipschitz constant enters the bounds.
    #[arg(long, conflicts_with = "lipschitz")]
    pub loss: Option<LossSpec>,
    /// Lipschitz constant of the loss.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Mixing rate constant c in alpha(j) = alpha_bar exp(-c j^gamma).
    #[arg(long)]
    pub c: Option<f64>,
    /// Mixing rate exponent gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mixing rate scale alpha_bar.
    #[arg(long)]
    pub alpha_bar: Option<f64>,
    /// Weak dependence constant L1.
    #[arg(long)]
    pub l1: Option<f64>,
    /// Weak dependence constant L2.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Weak dependence decay exponent mu.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Moment bound M.
    #[arg(long)]
    pub moment_bound: Option<f64>,
    /// Log exponent nu of the strong mixing bound.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Depth scale L0 of the schedule.
    #[arg(long)]
    pub l0: Option<f64>,
    /// Width scale N0.
    #[arg(long)]
    pub n0: Option<f64>,
    /// Sparsity scale S0.
    #[arg(long)]
    pub s0: Option<f64>,
    /// Weight bound scale B0.
    #[arg(long)]
    pub b0: Option<f64>,
    /// Weak dependence combinator.
    #[arg(long, value_enum)]
    pub psi: Option<Psi>,
    /// Activation constant of the covering bound.
    #[arg(long)]
    pub c_sigma: Option<f64>,
    /// Hölder norm bound K of the target.
    #[arg(long)]
    pub holder_bound: Option<f64>,
    /// Output bound F.
    #[arg(long)]
    pub output_bound: Option<f64>,
    /// Constant pair in the weak dependence bound.
    #[arg(long, value_enum)]
    pub constants: Option<Constants>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// 1 (strong mixing) or 2 (weak dependence).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub theorem: u8,
    /// Sample size.
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub theory: TheoryArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Theorem whose schedule fills the L, N, S, B columns.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub theorem: u8,
    /// Explicit sample sizes; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Smallest sample size of the log grid.
    #[arg(long, default_value_t = 1_000)]
    pub n_min: u64,
    /// Largest sample size of the log grid.
    #[arg(long, default_value_t = 100_000_000)]
    pub n_max: u64,
    /// Grid points per decade.
    #[arg(long, default_value_t = 4)]
    pub per_decade: u32,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub theory: TheoryArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub theory: TheoryArgs,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Run a sweep and write records.csv, summary.csv and boxplot.json.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML or JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (default: all logical cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config replication count.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Fill the `seconds` column with wall time.
    #[arg(long)]
    pub record_timing: bool,
}
