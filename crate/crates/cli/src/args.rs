//! Command-line surface. Exit codes: 0 success, 2 I/O or parse failure,
//! 3 domain precondition violation, 4 enumeration budget exceeded.

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Fixed default seed so repeated runs are byte-identical.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(
    name = "stablecluster",
    about = "Exact clustering of perturbation-stable instances: single-linkage tree plus best-k-pruning, with stability diagnostics, a brute-force oracle, and instance generators",
    version
)]
pub struct Cli {
    /// Cap worker threads for parallel sections (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an instance with the single-linkage tree + pruning DP.
    Solve(SolveArgs),
    /// Brute-force optimal clustering by exhaustive partition enumeration.
    Oracle(OracleArgs),
    /// Stability diagnostics for an instance/clustering pair.
    Check(CheckArgs),
    /// Apply a multiplicative perturbation to an instance file.
    Perturb(PerturbArgs),
    /// Emit one of the built-in instance families.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Compare tree-DP, naive single-linkage-at-k, and the oracle.
    Compare(CompareArgs),
    /// Time the solver over a size sweep and fit the scaling exponent.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum ObjArg {
    Kmedian,
    Kmeans,
    Kcenter,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum CentersArg {
    Data,
    Steiner,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum FormatArg {
    Tsv,
    Json,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long, value_enum)]
    pub objective: ObjArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: String,
    /// Override the instance's center policy.
    #[arg(long, value_enum)]
    pub centers: Option<CentersArg>,
    /// Also write the dendrogram as JSON.
    #[arg(long)]
    pub dump_tree: Option<String>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long, value_enum)]
    pub objective: ObjArg,
    #[arg(long)]
    pub k: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_enum)]
    pub centers: Option<CentersArg>,
    /// Partition enumeration budget (default 10^7; env STABLECLUSTER_BUDGET
    /// overrides the default).
    #[arg(long)]
    pub budget: Option<u128>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub clustering: String,
    /// Evaluate the separation check (and any probe) at this alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Subset budget for the exact min-stability checker (default 2^20; env
    /// STABLECLUSTER_BUDGET overrides the default).
    #[arg(long)]
    pub exact_budget: Option<u128>,
    /// Run a resilience probe with this many trials (0 = skip).
    #[arg(long, default_value_t = 0)]
    pub trials: u32,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Allow probing large instances with the tree solver instead of the
    /// oracle (exact only under stability).
    #[arg(long)]
    pub probe_with_solver: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub dump_tree: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum ModeArg {
    Uniform,
    Blowup,
    Mask,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Blowup mode: comma-separated member indices.
    #[arg(long)]
    pub members: Option<String>,
    /// Mask mode: comma-separated pairs like 0-1,2-5.
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: String,
}

#[derive(Subcommand, Debug)]
pub enum GenerateCmd {
    /// The shipped 5-point metric where the tree solver provably fails.
    Fig2(GenFig2Args),
    /// Four components where stopping single linkage at k picks wrongly.
    Fig3(GenFig3Args),
    /// Well-separated groups hitting a target proximity factor.
    Resilient(GenResilientArgs),
    /// Shortest-path metric of a set-cover membership graph.
    Coverage(GenCoverageArgs),
}

#[derive(Args, Debug)]
pub struct GenFig2Args {
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct GenFig3Args {
    #[arg(long, default_value_t = 100)]
    pub size_big: usize,
    #[arg(long, default_value_t = 10)]
    pub size_small: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct GenResilientArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Target proximity factor (> 1).
    #[arg(long)]
    pub target: f64,
    #[arg(long, value_enum, default_value_t = CentersArg::Data)]
    pub centers: CentersArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: String,
    /// Also write the intended clustering next to the instance.
    #[arg(long)]
    pub out_clustering: Option<String>,
}

#[derive(Args, Debug)]
pub struct GenCoverageArgs {
    /// Set-system file: first line "m u", then m lines of element ids.
    #[arg(long)]
    pub sets: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: String,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub instance: String,
    #[arg(long, value_enum)]
    pub objective: ObjArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub centers: Option<CentersArg>,
    /// Skip the oracle row (required for instances beyond its budget).
    #[arg(long)]
    pub no_oracle: bool,
    #[arg(long)]
    pub budget: Option<u128>,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv)]
    pub format: FormatArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated instance sizes.
    #[arg(long, default_value = "250,500,1000,2000")]
    pub sizes: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ObjArg::Kmedian)]
    pub objective: ObjArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Repetitions per size; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv)]
    pub format: FormatArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
    /// Also dump the largest swept instance's dendrogram (after timing).
    #[arg(long)]
    pub dump_tree: Option<String>,
}
