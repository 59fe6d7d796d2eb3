//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "diolab",
    version,
    about = "Diophantine random walks and Gaussian excursion variance"
)]
#[command(after_help = crate::config::ExperimentConfig::describe_keys())]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; flags override config keys.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format (config key `output.format`).
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Write to this file instead of stdout or `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Frequency descriptors, e.g. `sqrt:2` or `sqrt:2 sqrt:3; sqrt:5 sqrt:7` (config key `omega`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Working precision in bits (config key `precision`).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diophantine approximation reports.
    #[command(subcommand)]
    Dioph(DiophCmd),
    /// Lattice walk distributions and recurrence series.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// Excursion variance from the convolution series.
    Variance(VarianceArgs),
    /// Structure factor atoms or ball masses.
    #[command(subcommand)]
    Sfactor(SfactorCmd),
    /// Monte Carlo excursion variance.
    Mc(McArgs),
    /// Power-law fit of a two-column CSV.
    Fit(FitArgs),
}

/// `psi(q) = c q^-tau ln(1+q)^p`; unset fields fall back to the `psi.*` config keys.
#[derive(Debug, Args, Clone, Default)]
pub struct PsiArgs {
    /// Exponent `tau` (config key `psi.tau`).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Constant `c` (config key `psi.c`).
    #[arg(long = "psi-c")]
    pub psi_c: Option<f64>,
    /// Log exponent `p` (config key `psi.p`).
    #[arg(long = "psi-p")]
    pub psi_p: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum DiophCmd {
    /// Continued-fraction convergents of a scalar frequency.
    Convergents {
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Stop at denominators above this instead of after `count`.
        #[arg(long)]
        qmax: Option<u64>,
    },
    /// `delta_q = dist(q . omega, Z)` for one row of frequencies.
    Delta {
        /// Integer vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// The approximation set `I_eps` up to `qmax`.
    Iset {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        qmax: u64,
        /// Also check separation against psi.
        #[arg(long)]
        with_psi: bool,
        #[command(flatten)]
        psi: PsiArgs,
    },
    /// Finite-range badly-approximable certificate.
    BaCert {
        #[arg(long)]
        qmax: u64,
        #[command(flatten)]
        psi: PsiArgs,
    },
    /// Well-approximable witnesses.
    Witnesses {
        #[arg(long)]
        qmax: u64,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        cw: f64,
        #[command(flatten)]
        psi: PsiArgs,
    },
}

/// Walk options; unset fields fall back to the `walk.*` config keys.
#[derive(Debug, Args, Clone, Default)]
pub struct WalkArgs {
    /// Last step (config key `walk.nmax`).
    #[arg(long)]
    pub nmax: Option<u32>,
    /// Pruning threshold in `[0, 1e-6]` (config key `walk.prune`).
    #[arg(long)]
    pub prune: Option<f64>,
    /// Step weights, comma separated (uniform by default).
    #[arg(long)]
    pub weights: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq, Default)]
pub enum ModeArg {
    #[default]
    Crude,
    Envelope,
    Asymptotic,
}

#[derive(Debug, Args, Clone)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Summation exponent, `w(n) = n^{-beta/2}`; must exceed 2.
    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,
    /// Radii, comma separated.
    #[arg(long)]
    pub eps: String,
    /// First summed step (config key `walk.neps`).
    #[arg(long)]
    pub neps: Option<u32>,
    /// Tail used for the `tail` and `hi` columns; all three are always listed.
    #[arg(long, value_enum, default_value_t = ModeArg::Crude)]
    pub mode: ModeArg,
}

#[derive(Debug, Subcommand)]
pub enum WalkCmd {
    /// The law of `S_n` at `n = nmax`.
    Dist {
        #[command(flatten)]
        walk: WalkArgs,
    },
    /// `P(U-bar_n in B_K(eps))` for `n <= nmax`.
    Pbar {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        eps: String,
        /// One-based axes with nonzero coordinates (all axes by default).
        #[arg(long)]
        k: Option<String>,
    },
    /// `J_beta(eps)` over odd steps in `R^d`.
    Jbeta(SeriesArgs),
    /// `I_beta(eps)` over all steps on the torus.
    Ibeta(SeriesArgs),
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Window radii (config key `variance.t`).
    #[arg(long = "T", alias = "t")]
    pub t: Option<String>,
    /// Last convolution power (config key `variance.nmax`).
    #[arg(long)]
    pub nmax: Option<u32>,
    /// Pruning threshold (config key `walk.prune`).
    #[arg(long)]
    pub prune: Option<f64>,
    /// Excursion level.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
}

#[derive(Debug, Subcommand)]
pub enum SfactorCmd {
    /// Atoms of the structure factor in a box (the data behind its plot).
    Atoms {
        #[arg(long)]
        nmax: u32,
        /// Half-width of the box on every axis.
        #[arg(long, default_value_t = 10.0)]
        half_width: f64,
    },
    /// Structure factor mass of closed balls.
    Ball {
        #[arg(long)]
        eps: String,
        #[arg(long)]
        nmax: Option<u32>,
        #[arg(long)]
        prune: Option<f64>,
        /// Tail used for the `tail` and `hi` columns.
        #[arg(long, value_enum, default_value_t = ModeArg::Crude)]
        mode: ModeArg,
    },
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Window radii (config key `variance.t`).
    #[arg(long = "T", alias = "t")]
    pub t: Option<String>,
    /// Replications per radius (config key `mc.reps`).
    #[arg(long)]
    pub reps: Option<u64>,
    /// Grid points per unit length (config key `mc.grid`).
    #[arg(long)]
    pub grid: Option<u32>,
    /// Master seed (config key `mc.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Excursion level.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    /// Random frequencies: `shared:LO:HI` or `tuple:LO:HI` (fixed `omega` by default).
    #[arg(long)]
    pub law: Option<String>,
    /// Dimension for random laws.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Frequencies per axis for random laws.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Fields per frequency draw for random laws.
    #[arg(long, default_value_t = 1)]
    pub inner: u64,
    /// Also write replicate volumes (`T,rep,volume`) to this CSV.
    #[arg(long)]
    pub volumes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with scale and value columns; `-` reads stdin.
    #[arg(long)]
    pub input: PathBuf,
    /// Column names `x,y` in a headed table (first two columns otherwise).
    #[arg(long)]
    pub columns: Option<String>,
}
