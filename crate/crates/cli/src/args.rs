use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SEED_ENV: &str = "BELLGARCH_SEED";

#[derive(Parser, Debug, Clone)]
#[command(
    name = "bellgarch",
    version,
    about = "Bell-INGARCH modelling of overdispersed count series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Fit one model to a count series and export diagnostics.
    Fit(FitArgs),
    /// Fit several models and rank them by AIC.
    Compare(CompareArgs),
    /// Simulate a BELL-INGARCH(1,1) path.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo study described by a TOML file.
    McStudy(McStudyArgs),
    /// Tabulate the printed closed-form mean against simulated means.
    MeanFormula(MeanFormulaArgs),
    /// Re-run a command from its manifest.
    Rerun(RerunArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Bell,
    Poisson,
    Nb,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Bell => "bell",
            ModelKind::Poisson => "poisson",
            ModelKind::Nb => "nb",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Linear,
    Nonlinear,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Linear => "linear",
            LinkKind::Nonlinear => "nonlinear",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Single-column CSV of non-negative integers (optional header).
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Bell)]
    pub model: ModelKind,
    #[arg(long, value_enum, default_value_t = LinkKind::Linear)]
    pub link: LinkKind,
    /// Starting values `alpha0,alpha1,beta1[,gamma]`.
    #[arg(long)]
    pub init: Option<String>,
    /// Add random restarts around the start.
    #[arg(long)]
    pub multi_start: bool,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Pre-sample intensity; defaults to the stationary level.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// ACF/PACF horizon; defaults to min(40, n/4).
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Label used in reports; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    pub data: PathBuf,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "bell,poisson,nb"
    )]
    pub models: Vec<ModelKind>,
    #[arg(long)]
    pub multi_start: bool,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = LinkKind::Linear)]
    pub link: LinkKind,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: f64,
    /// Required with `--link nonlinear`.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = bellgarch::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Also write the intensity path.
    #[arg(long)]
    pub lambda_path: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct McStudyArgs {
    /// TOML study description.
    pub config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct MeanFormulaArgs {
    /// Length of each simulated path.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}
