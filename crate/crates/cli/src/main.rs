//! `homog`: experiment runner for the homogeneous QAOA proxy.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use homog_core::{ClassKind, LinearRamp, Parameterization, Schedule};

use config::{Config, ConfigError};
use output::Outputs;

#[derive(Parser)]
#[command(
    name = "homog",
    version,
    about = "QAOA parameter setting with the homogeneous proxy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and cache the class distribution table.
    Precompute(Flags),
    /// Optimize angles on the proxy.
    Optimize(Flags),
    /// Exact approximation ratios of a schedule over seeded instances.
    Evaluate(Flags),
    /// Per-layer squared overlap between the proxy pseudostate and exact QAOA.
    OverlapSweep(Flags),
    /// Exact and proxy landscapes over the last layer's angles.
    Landscape(Flags),
    /// Analytic against empirical replacement distributions.
    EmpiricalCompare(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Precompute(f) => ("precompute", f),
            Command::Optimize(f) => ("optimize", f),
            Command::Evaluate(f) => ("evaluate", f),
            Command::OverlapSweep(f) => ("overlap-sweep", f),
            Command::Landscape(f) => ("landscape", f),
            Command::EmpiricalCompare(f) => ("empirical-compare", f),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    MaxCutEr,
    MaxE3Lin2,
    MaxKXor,
    RandKSat,
    HammingWeight,
}

impl From<ClassArg> for ClassKind {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::MaxCutEr => ClassKind::MaxCutEr,
            ClassArg::MaxE3Lin2 => ClassKind::MaxE3Lin2,
            ClassArg::MaxKXor => ClassKind::MaxKXor,
            ClassArg::RandKSat => ClassKind::RandKSat,
            ClassArg::HammingWeight => ClassKind::HammingWeight,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    Full2p,
    LinearRamp4,
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct Flags {
    /// TOML or JSON config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (max-cut-er).
    #[arg(long)]
    pe: Option<f64>,
    /// Clause count.
    #[arg(long)]
    m: Option<usize>,
    /// Clause arity.
    #[arg(long)]
    k: Option<usize>,
    /// Widen the MaxCut cost set by this many standard deviations of the edge count.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    parameterization: Option<ParamArg>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Optimizer starting ramps.
    #[arg(long)]
    starts: Option<usize>,
    /// Number of seeded instances.
    #[arg(long)]
    instances: Option<usize>,
    /// Ramp `g1,gf,b1,bf`; repeat for several.
    #[arg(long, value_delimiter = ';')]
    ramp: Vec<String>,
    /// Comma-separated gammas of an explicit schedule (with --betas).
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Optimization result to evaluate.
    #[arg(long)]
    result: Option<PathBuf>,
    /// Landscape points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Anchor cost for empirical-compare; repeatable.
    #[arg(long)]
    cprime: Vec<usize>,
    /// Divide proxy estimates by the pseudo-norm.
    #[arg(long)]
    normalize: bool,
}

fn parse_ramp(text: &str) -> anyhow::Result<LinearRamp> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigError(format!("ramp `{text}`: {e}")))?;
    if v.len() != 4 {
        return Err(ConfigError(format!("ramp `{text}` needs four values")).into());
    }
    Ok(LinearRamp::from_slice(&v))
}

impl Flags {
    fn config(&self, command: &str) -> anyhow::Result<Config> {
        let mut c = match &self.config {
            Some(path) => Config::load(path, command)?,
            None => Config::default(),
        };
        if let Some(v) = self.class {
            c.class.kind = Some(v.into());
        }
        c.class.n = self.n.or(c.class.n);
        c.class.p_e = self.pe.or(c.class.p_e);
        c.class.m = self.m.or(c.class.m);
        c.class.k = self.k.or(c.class.k);
        c.class.margin = self.margin.unwrap_or(c.class.margin);
        c.seed = self.seed.unwrap_or(c.seed);
        c.out = self.out.clone().or(c.out);
        c.cache_dir = self.cache_dir.clone().or(c.cache_dir);
        c.p = self.p.or(c.p);
        if let Some(v) = self.parameterization {
            c.parameterization = Some(match v {
                ParamArg::Full2p => Parameterization::Full2p,
                ParamArg::LinearRamp4 => Parameterization::LinearRamp4,
            });
        }
        c.tol = self.tol.or(c.tol);
        c.max_iter = self.max_iter.or(c.max_iter);
        c.workers = self.workers.or(c.workers);
        c.starts = self.starts.or(c.starts);
        c.instances = self.instances.or(c.instances);
        c.result = self.result.clone().or(c.result);
        c.grid = self.grid.or(c.grid);
        c.normalize |= self.normalize;
        if !self.ramp.is_empty() {
            c.ramps = self
                .ramp
                .iter()
                .map(|r| parse_ramp(r))
                .collect::<anyhow::Result<_>>()?;
        }
        if !self.cprime.is_empty() {
            c.cprimes = self.cprime.clone();
        }
        match (&self.gammas, &self.betas) {
            (Some(g), Some(b)) => {
                let s =
                    Schedule::new(g.clone(), b.clone()).map_err(|e| ConfigError(e.to_string()))?;
                if command == "landscape" {
                    c.prefix = Some(s);
                } else {
                    c.schedule = Some(s);
                }
            }
            (None, None) => {}
            _ => return Err(ConfigError("--gammas and --betas go together".into()).into()),
        }
        c.resolve(command)
    }
}

fn run(command: &Command) -> anyhow::Result<()> {
    let (name, flags) = command.parts();
    let config = flags.config(name)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers())
        .build_global()?;
    let mut out = Outputs::new(&config, name)?;
    log::info!("{name} config_hash={}", out.hash());
    match command {
        Command::Precompute(_) => commands::precompute(&config, &mut out)?,
        Command::Optimize(_) => commands::optimize(&config, &mut out)?,
        Command::Evaluate(_) => commands::evaluate(&config, &mut out)?,
        Command::OverlapSweep(_) => commands::overlap_sweep(&config, &mut out)?,
        Command::Landscape(_) => commands::landscape(&config, &mut out)?,
        Command::EmpiricalCompare(_) => commands::empirical_compare(&config, &mut out)?,
    }
    let manifest = out.finish(&config)?;
    log::info!("wrote {}", manifest.display());
    Ok(())
}

/// 2 invalid config, 3 size limit, 4 numerical failure, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<homog_core::Error>() {
        Some(homog_core::Error::SizeLimit { .. }) => 3,
        Some(e) if e.is_numerical() => 4,
        Some(
            homog_core::Error::InvalidSpec(_)
            | homog_core::Error::InvalidSchedule(_)
            | homog_core::Error::InvalidOptions(_)
            | homog_core::Error::DimensionMismatch { .. }
            | homog_core::Error::CostOutOfRange { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
