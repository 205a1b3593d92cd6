use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "sharpineq",
    version,
    about = "Numerical checks of a sharp exponential-weight inequality, its extremals, and the Onofri inequality"
)]
pub struct Cli {
    /// key=value file supplying defaults for the subcommand's flags; flags given on the command line win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Report format (default: csv for `sweep`, json otherwise)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sharp coefficient, C_n, rough constants and the Bliss constant
    Constants(ConstantsArgs),
    /// Deficit of the sharp inequality at a generated or supplied function
    Deficit(DeficitArgs),
    /// Closed-form extremal for a mass or a parameter lambda0
    Extremal(ExtremalArgs),
    /// Direct minimization of the energy over the mass constraint
    Minimize(MinimizeArgs),
    /// Shooting on the Euler-Lagrange equation
    Shoot(ShootArgs),
    /// Onofri deficit on the sphere
    Onofri(OnofriArgs),
    /// Bliss quotient against its sharp constant
    Bliss(BlissArgs),
    /// Moser-type functional against its bound
    Moser(MoserArgs),
    /// Parameter sweep producing a table for plotting
    Sweep(SweepArgs),
    /// Run the acceptance checks
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Deficit(_) => "deficit",
            Command::Extremal(_) => "extremal",
            Command::Minimize(_) => "minimize",
            Command::Shoot(_) => "shoot",
            Command::Onofri(_) => "onofri",
            Command::Bliss(_) => "bliss",
            Command::Moser(_) => "moser",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: f64,
    /// Also report the rough constants c(beta0), c1(beta0)
    #[arg(long)]
    pub beta0: Option<f64>,
    /// Bliss exponent k (requires --l)
    #[arg(long, requires = "l")]
    pub k: Option<f64>,
    /// Bliss exponent l (requires --k)
    #[arg(long, requires = "k")]
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatementArg {
    Consistent,
    AsPrinted,
}

#[derive(Debug, Args)]
pub struct DeficitArgs {
    #[arg(long)]
    pub n: f64,
    /// CSV `r,u` of a piecewise-linear function; otherwise one is generated
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub pieces: usize,
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 2.0)]
    pub amplitude: f64,
    #[arg(long, value_enum, default_value_t = StatementArg::Consistent)]
    pub statement: StatementArg,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub n: f64,
    /// Weighted mass a > 1/n
    #[arg(long, conflicts_with = "lambda0", required_unless_present = "lambda0")]
    pub a: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Write the sampled profile as CSV `r,u` (to --output or stdout); the summary goes to stderr
    #[arg(long)]
    pub emit_profile: bool,
    #[arg(long, default_value_t = 3000)]
    pub nodes: usize,
    /// Sampling radius (default: the truncation rule of the minimizer)
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Ramp,
    Extremal,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[arg(long)]
    pub n: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 3000)]
    pub nodes: usize,
    /// Truncation radius (default: smallest integer with tail below 1e-10 a)
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = InitArg::Ramp)]
    pub init: InitArg,
    /// Relative perturbation of lambda0 for --init extremal
    #[arg(long, default_value_t = 0.2)]
    pub perturbation: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub constraint_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 10.0)]
    pub penalty_growth: f64,
    /// Relative energy error against the closed form that counts as a failure
    #[arg(long, default_value_t = 1e-2)]
    pub tolerance: f64,
    /// Write the minimizer as CSV `r,u` (to --output or stdout); the summary goes to stderr
    #[arg(long)]
    pub emit_profile: bool,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[arg(long)]
    pub n: f64,
    #[arg(long, conflicts_with = "a", required_unless_present = "a")]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 20.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 401)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1e-28)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-28)]
    pub abs_tol: f64,
    /// Sup-norm distance to the closed form that counts as a failure
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Write the shot solution as CSV `r,u` (to --output or stdout); the summary goes to stderr
    #[arg(long)]
    pub emit_profile: bool,
}

#[derive(Debug, Args)]
pub struct OnofriArgs {
    /// Möbius parameters, comma separated
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Number of random polynomial functions, seeds seed..seed+samples
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_degree: usize,
    /// Monomial coefficients in x3, lowest degree first, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub polynomial: Vec<f64>,
    /// CSV `t,u` of a tabulated function
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BlissArgs {
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub l: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40.0)]
    pub x_max: f64,
}

#[derive(Debug, Args)]
pub struct MoserArgs {
    #[arg(long)]
    pub n: f64,
    /// Energy budget
    #[arg(long)]
    pub a: f64,
    /// Exponent coefficient (default: half the threshold n a^{-1/(n-1)})
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub pieces: usize,
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    /// Extremal deficit against the mass a
    A,
    /// Rough constants against beta0
    Beta0,
    /// Onofri deficit of the Möbius factor against lambda
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long, default_value_t = 2.0)]
    pub n: f64,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run every criterion
    #[arg(long, conflicts_with = "criterion", required_unless_present = "criterion")]
    pub all: bool,
    /// Run only these criteria (1-10), comma separated
    #[arg(long, value_delimiter = ',')]
    pub criterion: Vec<u32>,
}
