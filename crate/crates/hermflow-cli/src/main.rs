//! `hermflow` command line.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hermflow", version, about = "Bismut curvature of Hopf and invariant Hermitian metrics, and Hermitian curvature flows")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "HERMFLOW_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Relative zero tolerance.
    #[arg(long, global = true, default_value_t = hermflow::tol::ZERO_REL)]
    pub zero_tol: f64,
    /// Relative sign tolerance.
    #[arg(long, global = true, default_value_t = hermflow::tol::SIGN_REL)]
    pub sign_tol: f64,
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
    Markdown,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bismut curvature of g(α,β) on a linear Hopf manifold.
    Hopf(HopfArgs),
    /// Integrate an HCF on Hopf metrics g(α,β).
    Flow(FlowArgs),
    /// Check (Cplx) for an invariant structure.
    Cplx(CplxArgs),
    /// Sign of the Bismut bisectional curvature.
    Classify(ClassifyArgs),
    /// Regenerate the curvature classification table and diff it against the fixture.
    Table3(Table3Args),
    /// List the bundled families.
    Families,
}

#[derive(Args, Debug)]
pub struct HopfArgs {
    /// Complex dimension.
    #[arg(long)]
    pub n: usize,
    /// Coefficient of `δ_{ij}/|z|²` (> 0).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Coefficient of `z̄_i z_j/|z|⁴` (> −α).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Point in ℂⁿ∖{0}, e.g. `1,0.5i` or `e1`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Evaluate the bisectional form at this tangent vector (with `--nu`).
    #[arg(long, allow_hyphen_values = true, requires = "nu")]
    pub xi: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "xi")]
    pub nu: Option<String>,
    /// Cross-check against finite differences of the metric.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    /// gradient, pluriclosed or ustinovskiy.
    #[arg(long, conflicts_with = "coeffs")]
    pub name: Option<String>,
    /// `a,b,c,d`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Keep every k-th step.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
}

/// An invariant structure: a bundled family or a JSON equations file.
#[derive(Args, Debug)]
pub struct Target {
    #[arg(long, conflicts_with = "equations")]
    pub family: Option<String>,
    /// `name=value,...`
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub params: String,
    /// Structure equations as JSON (`{"n":3,"C":[[k,i,j,re,im],..],"D":[..]}`).
    #[arg(long)]
    pub equations: Option<PathBuf>,
    /// Metric coefficients, e.g. `r2=1,s2=2,u=0.1+0.2i` (others unit).
    #[arg(long, default_value = "unit", allow_hyphen_values = true)]
    pub metric: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Holds,
    Fails,
}

#[derive(Args, Debug)]
pub struct CplxArgs {
    #[command(flatten)]
    pub target: Target,
    /// Instead of `--metric`, draw this many random metrics on `--slice`.
    #[arg(long)]
    pub random: Option<usize>,
    /// `generic`, `u=0`, `u=v=0`, ...
    #[arg(long, default_value = "generic")]
    pub slice: String,
    /// List every nonzero component.
    #[arg(long)]
    pub dump: bool,
    /// Exit 1 unless the outcome is this.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub target: Target,
    /// Classify g(α,β) on the Hopf manifold instead.
    #[arg(long, requires_all = ["n", "alpha", "beta"], conflicts_with_all = ["family", "equations"])]
    pub hopf: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Local-search starts for the minimum and maximum.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    /// Exit 1 unless the verdict is this (`non-negative`, `flat`, ...).
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Args, Debug)]
pub struct Table3Args {
    /// Metrics per slice at each tabulated point.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    /// Only these families (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<String>,
    /// Fixture to diff against (default: the bundled one).
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Test mode: flip the first sign verdict of the fixture before comparing.
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hermflow: {e}");
            ExitCode::from(e.code())
        }
    }
}

impl Cli {
    pub fn tolerances(&self) -> Result<hermflow::tol::Tolerances, CliError> {
        let g = &self.global;
        for (name, v) in [("zero-tol", g.zero_tol), ("sign-tol", g.sign_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Invalid(format!("--{name} must be positive, got {v}")));
            }
        }
        Ok(hermflow::tol::Tolerances {
            zero_rel: g.zero_tol,
            sign_rel: g.sign_tol,
        })
    }
}
