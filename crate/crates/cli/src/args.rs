use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "eamkit",
    version,
    about = "Entanglement adjacency matrices and contours of pure states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for the entropy sweep (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Reserved; every pipeline is currently deterministic
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Omit the timestamp comment from written files
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Show summary entropies in bits (files always hold nats)
    #[arg(long, global = true)]
    pub bits: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep all 2^N bipartition entropies
    Entropies(EntropiesArgs),
    /// Fit the entanglement adjacency matrix to an entropy table
    Fit(FitArgs),
    /// Per-site entanglement contour of one block
    Contour(ContourArgs),
    /// Continuum and lattice checks of the inverse-square current correlator
    CftCheck(CftArgs),
    /// Write state-vector amplitudes as CSV
    StateDump(StateDumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Dimer,
    Rainbow,
    Ghz,
    Freefermion,
    Xxz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Auto,
    Statevector,
    Freefermion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Eam,
    Freefermion,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,

    /// Number of sites
    #[arg(long)]
    pub n: Option<usize>,

    /// Dimer pairs as "i-j,k-l,..." (0-based; default nearest neighbour)
    #[arg(long)]
    pub matching: Option<String>,

    /// Hopping dimerization δ in t = 1 + δ(−1)^i (free-fermion model)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub dimerized: f64,

    /// XXZ anisotropy Δ
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub aniso: f64,

    /// Chain boundary (default: periodic for xxz, open for freefermion)
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,

    /// Particle number for the free-fermion model (default N/2)
    #[arg(long)]
    pub filling: Option<usize>,

    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    pub engine: EngineChoice,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output path (default: stdout)
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct EntropiesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Fit an existing entropy table (CSV or JSON) instead of a model
    #[arg(long, conflicts_with = "model")]
    pub table: Option<PathBuf>,

    /// Also fit a constant offset s0 (trivial masks are then excluded)
    #[arg(long)]
    pub offset: bool,

    /// Where to write the fit report (default: next to --output)
    #[arg(long)]
    pub report: Option<PathBuf>,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Block as a decimal bitmask (bit i = site i)
    #[arg(long, conflicts_with = "half_chain")]
    pub mask: Option<u64>,

    /// Use the left half chain {0, …, N/2−1} (the default)
    #[arg(long)]
    pub half_chain: bool,

    #[arg(long, value_enum, default_value_t = Route::Eam)]
    pub route: Route,

    #[arg(long)]
    pub offset: bool,

    /// Output path; with --route both it is a stem for
    /// <stem>.eam.csv, <stem>.freefermion.csv and <stem>.comparison.json
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CftArgs {
    /// Lattice mode: fit the decay of EAM weights of the uniform open chain
    #[arg(long)]
    pub lattice: bool,

    #[arg(
        long,
        required_unless_present = "lattice",
        allow_negative_numbers = true
    )]
    pub u: Option<f64>,

    #[arg(
        long,
        required_unless_present = "lattice",
        allow_negative_numbers = true
    )]
    pub v: Option<f64>,

    #[arg(long, required_unless_present = "lattice")]
    pub eps: Option<f64>,

    /// Central charge
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,

    /// Lattice size
    #[arg(long, default_value_t = 16)]
    pub n: usize,

    #[arg(long, default_value_t = 2)]
    pub min_sep: usize,

    #[arg(long, default_value_t = 6)]
    pub max_sep: usize,

    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StateDumpArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
