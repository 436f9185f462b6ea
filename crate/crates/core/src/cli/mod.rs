//! Command-line front end.

mod config;

pub use config::{
    parse_config, BenchmarkSection, Command, ConfigError, ContractConfig, ExperimentSection,
    McSection, MethodName, ModelConfig, OutputSection, RngName, RunConfig, TrialsRuleName,
    TruthConfig, TruthName,
};

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::engine::EngineError;
use crate::harness::{
    make_benchmark, run_convergence_table, verify_properties, write_table_csv, BenchmarkStore,
    HarnessError, VerifyBudget,
};
use crate::pricing::{analytic_price, price, relative_error, PricingError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0} check(s) did not pass")]
    Verify(usize),
}

fn pricing_exit_code(e: &PricingError) -> i32 {
    match e {
        PricingError::Engine(EngineError::NonFinite { .. } | EngineError::Pool(_)) => EXIT_RUNTIME,
        _ => EXIT_INVALID,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(ConfigError::Parse(_)) => EXIT_USAGE,
            CliError::Config(ConfigError::Invalid(_)) => EXIT_INVALID,
            CliError::Pricing(e) | CliError::Harness(HarnessError::Pricing(e)) => pricing_exit_code(e),
            CliError::Harness(HarnessError::Experiment(_)) => EXIT_INVALID,
            CliError::Harness(_) | CliError::Io(_) => EXIT_RUNTIME,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pcs,
    Pathwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RngArg {
    Pseudo,
    Lds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum CommandArg {
    /// Price one contract
    Price,
    /// Run a convergence table and write it as CSV
    Table,
    /// Generate a path-wise benchmark and append it to the store
    Benchmark,
    /// Run the property suite
    Verify,
}

/// Monte-Carlo pricing of barrier options by path-wise Euler-Maruyama and
/// by put-call symmetrization.
#[derive(Debug, Parser)]
#[command(name = "pcs-barrier", version)]
struct Args {
    /// TOML run configuration
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Time steps n (the benchmark budget for `benchmark`)
    #[arg(long)]
    steps: Option<usize>,
    /// Monte-Carlo trials M (the benchmark budget for `benchmark`)
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = all cores
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    rng: Option<RngArg>,
    /// Output file (CSV for `table`)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<CommandArg>,
}

impl Args {
    /// Reads the config file, if any, and lays the flags over it.
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read {}: {e}", path.display()))
                })?;
                toml::from_str::<RunConfig>(&text)
                    .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(c) = self.command {
            cfg.command = match c {
                CommandArg::Price => Command::Price,
                CommandArg::Table => Command::Table,
                CommandArg::Benchmark => Command::Benchmark,
                CommandArg::Verify => Command::Verify,
            };
        }
        if let Some(m) = self.method {
            cfg.mc.method = match m {
                MethodArg::Pcs => MethodName::Pcs,
                MethodArg::Pathwise => MethodName::Pathwise,
            };
        }
        if let Some(r) = self.rng {
            cfg.mc.rng = match r {
                RngArg::Pseudo => RngName::Pseudo,
                RngArg::Lds => RngName::Lds,
            };
        }
        if cfg.command == Command::Benchmark {
            if let Some(n) = self.steps {
                cfg.benchmark.steps = n;
            }
            if let Some(m) = self.trials {
                cfg.benchmark.trials = m;
            }
        } else {
            if let Some(n) = self.steps {
                cfg.mc.steps = n;
            }
            if let Some(m) = self.trials {
                cfg.mc.trials = m;
            }
        }
        if let Some(s) = self.seed {
            cfg.mc.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.mc.workers = w;
        }
        if let Some(p) = self.out {
            cfg.output.path = Some(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Executes a validated configuration, writing human-readable output to
/// `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.command {
        Command::Price => run_price(cfg, out),
        Command::Table => run_table(cfg, out),
        Command::Benchmark => run_benchmark(cfg, out),
        Command::Verify => run_verify(cfg, out),
    }
}

fn run_price(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model_spec()?;
    let contract = cfg.contract()?;
    let est = price(cfg.mc.method.into(), &model, &contract, &cfg.mc.mc_config())?;
    let method = match cfg.mc.method {
        MethodName::Pcs => "pcs",
        MethodName::Pathwise => "pathwise",
    };
    writeln!(out, "method     {method}")?;
    writeln!(out, "steps      {}", est.steps)?;
    writeln!(out, "trials     {}", est.trials)?;
    writeln!(out, "mean       {:.8}", est.mean)?;
    writeln!(out, "stderr     {:.8}", est.stderr)?;
    if let Some(exact) = analytic_price(&model, &contract) {
        let exact = exact?;
        writeln!(out, "exact      {exact:.8}")?;
        if let Ok(err) = relative_error(est.mean, exact) {
            writeln!(out, "rel_error  {err:.6}")?;
        }
    }
    writeln!(out, "elapsed_s  {:.3}", est.elapsed)?;
    Ok(())
}

fn run_table(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let exp = cfg.experiment()?;
    let rows = run_convergence_table(&exp)?;
    match &cfg.output.path {
        Some(path) => {
            write_table_csv(&rows, BufWriter::new(File::create(path)?))?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => write_table_csv(&rows, out)?,
    }
    Ok(())
}

fn run_benchmark(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model_spec()?;
    let contract = cfg.contract()?;
    let b = make_benchmark(
        &model,
        &contract,
        cfg.benchmark.steps,
        cfg.benchmark.trials,
        &cfg.benchmark_options(),
    )?;
    let store = BenchmarkStore::new(&cfg.benchmark.store);
    store.append(&b.record)?;
    writeln!(out, "mean       {:.8}", b.estimate.mean)?;
    writeln!(out, "stderr     {:.8}", b.estimate.stderr)?;
    writeln!(out, "elapsed_s  {:.3}", b.estimate.elapsed)?;
    writeln!(out, "appended to {}: {}", store.path().display(), b.record)?;
    Ok(())
}

fn run_verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let budget = VerifyBudget {
        workers: cfg.mc.workers,
        ..VerifyBudget::full()
    };
    let report = verify_properties(&budget);
    writeln!(out, "{report}")?;
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::Verify(n)),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = args.into_config().and_then(|cfg| run(&cfg, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
