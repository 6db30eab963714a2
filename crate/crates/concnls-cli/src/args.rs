use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "concnls", version, about = "Ground states, minimizers and binding diagnostics for the concave-regularized NLS energy")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Flags override the config file.
#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration (unknown keys are rejected).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    #[arg(long, global = true)]
    pub d: Option<usize>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Grid intervals for every solver.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Outer radius override for every solver.
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    /// Highest angular momentum channel of the SCF.
    #[arg(long, global = true)]
    pub l_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub exec: Option<ExecArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial ground states by shooting.
    Shoot(ShootArgs),
    /// Constrained minimization of the bosonic energy.
    #[command(subcommand)]
    Bosonic(BosonicCmd),
    /// Fermionic SCF, binding checks and two-center states.
    #[command(subcommand)]
    Fermi(FermiCmd),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Record or compare regression fixtures.
    #[command(subcommand)]
    Fixtures(FixturesCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EquationArg {
    /// `−Δu = g_μ(u)` at the given `--mu`.
    Model,
    V0,
    Q,
    ZeroMass,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[arg(long, value_enum, default_value = "model")]
    pub equation: EquationArg,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Comma-separated multipliers: tabulates `Λ(μ)` and the energy instead.
    #[arg(long, value_delimiter = ',')]
    pub mu_list: Option<Vec<f64>>,
    /// Starting height for the critical zero-mass problem.
    #[arg(long)]
    pub height: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum BosonicCmd {
    Minimize {
        #[arg(long)]
        lambda: f64,
    },
    LambdaC {
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        bracket: Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum FermiCmd {
    Scf {
        #[arg(long = "N")]
        n: usize,
    },
    Binding {
        #[arg(long = "N")]
        n: usize,
    },
    AlphaC {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        bracket: Vec<f64>,
        #[arg(long)]
        tol: f64,
    },
    TwoCenter {
        /// Separations; in units of `1/√μ` with `--scaled`.
        #[arg(long = "R-list", value_delimiter = ',', required = true)]
        r_list: Vec<f64>,
        #[arg(long)]
        scaled: bool,
        /// Use the orbital at the single-particle threshold of the family.
        #[arg(long)]
        critical: bool,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// subcritical, supercritical, critical, mu-infinity or scaling.
    pub suite: String,
}

#[derive(Debug, Subcommand)]
pub enum FixturesCmd {
    Record(FixtureArgs),
    Compare(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Directory of fixture files.
    #[arg(long, default_value = "fixtures")]
    pub store: PathBuf,
    /// Relative drift tolerated by `compare`.
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    /// Include the bosonic critical-mass bisection.
    #[arg(long)]
    pub slow: bool,
}
