//! Declarative run configuration.
//!
//! ```toml
//! command = "price"            # price | table | benchmark | verify
//!
//! [model]
//! kind = "black-scholes"       # cev | arithmetic-bm | heston | lambda-sabr
//! x0 = 100.0
//! rate = 0.0
//! vol = 0.2
//!
//! [contract]
//! strike = 95.0
//! barrier = 90.0
//! # upper = 110.0              # double knock-out
//! maturity = 1.0
//!
//! [mc]
//! method = "pcs"               # pcs | pathwise
//! steps = 100
//! trials = 1000000
//! seed = 42
//! workers = 0                  # 0 = all cores
//! rng = "pseudo"               # pseudo | lds
//! ```
//!
//! Optional sections: `[experiment]` (`schedule`, `trials_rule = "cube" |
//! "fixed"`, `truth = "analytic" | "benchmark" | "stored" | <number>`),
//! `[benchmark]` (`steps`, `trials`, `path_step_limit`, `store`) and
//! `[output]` (`path`).
//!
//! Model keys: `x0`, `rate` (default 0) and
//! * `black-scholes`: `vol`
//! * `cev`: `vol`, `elasticity`
//! * `arithmetic-bm`: `vol`
//! * `heston`: `v0`, `mean_reversion`, `long_run`, `vol_of_vol`, `correlation`
//! * `lambda-sabr`: as `heston`, plus `elasticity`

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{
    contract_hash, default_schedule, model_hash, BenchmarkOptions, BenchmarkStore, Experiment,
    TrialsRule, Truth,
};
use crate::models::{Model1D, ModelError, ModelSpec, SvModel};
use crate::pricing::{analytic_price, McConfig, Method, RngMode};
use crate::symmetry::BarrierContract;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Price,
    Table,
    Benchmark,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    BlackScholes {
        x0: f64,
        #[serde(default)]
        rate: f64,
        vol: f64,
    },
    Cev {
        x0: f64,
        #[serde(default)]
        rate: f64,
        vol: f64,
        elasticity: f64,
    },
    ArithmeticBm {
        x0: f64,
        vol: f64,
    },
    Heston {
        x0: f64,
        v0: f64,
        #[serde(default)]
        rate: f64,
        mean_reversion: f64,
        long_run: f64,
        vol_of_vol: f64,
        correlation: f64,
    },
    LambdaSabr {
        x0: f64,
        v0: f64,
        #[serde(default)]
        rate: f64,
        mean_reversion: f64,
        long_run: f64,
        vol_of_vol: f64,
        correlation: f64,
        elasticity: f64,
    },
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec<f64>, ModelError> {
        Ok(match *self {
            ModelConfig::BlackScholes { x0, rate, vol } => Model1D::black_scholes(x0, rate, vol)?.into(),
            ModelConfig::Cev {
                x0,
                rate,
                vol,
                elasticity,
            } => Model1D::cev(x0, rate, vol, elasticity)?.into(),
            ModelConfig::ArithmeticBm { x0, vol } => Model1D::arithmetic_bm(x0, vol)?.into(),
            ModelConfig::Heston {
                x0,
                v0,
                rate,
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
            } => SvModel::heston(x0, v0, rate, mean_reversion, long_run, vol_of_vol, correlation)?
                .into(),
            ModelConfig::LambdaSabr {
                x0,
                v0,
                rate,
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
                elasticity,
            } => SvModel::lambda_sabr(
                x0,
                v0,
                rate,
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
                elasticity,
            )?
            .into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub strike: f64,
    pub barrier: f64,
    /// Upper barrier of a double knock-out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub maturity: f64,
}

impl ContractConfig {
    pub fn build(&self) -> BarrierContract<f64> {
        match self.upper {
            Some(upper) => BarrierContract::double_out(self.strike, self.barrier, upper, self.maturity),
            None => BarrierContract::down_and_out(self.strike, self.barrier, self.maturity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    #[default]
    Pcs,
    Pathwise,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Pcs => Method::Pcs,
            MethodName::Pathwise => Method::Pathwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RngName {
    #[default]
    Pseudo,
    Lds,
}

impl From<RngName> for RngMode {
    fn from(r: RngName) -> Self {
        match r {
            RngName::Pseudo => RngMode::Pseudo,
            RngName::Lds => RngMode::LowDiscrepancy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub method: MethodName,
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub rng: RngName,
}

impl Default for McSection {
    fn default() -> Self {
        let d = McConfig::default();
        Self {
            method: MethodName::Pcs,
            steps: d.steps,
            trials: d.trials,
            seed: d.seed,
            workers: d.workers,
            rng: RngName::Pseudo,
        }
    }
}

impl McSection {
    pub fn mc_config(&self) -> McConfig {
        McConfig::new(self.steps, self.trials, self.seed)
            .with_workers(self.workers)
            .with_rng(self.rng.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialsRuleName {
    /// `M = n³`.
    #[default]
    Cube,
    /// `M` from `[mc] trials`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthName {
    #[default]
    Analytic,
    /// Fresh run at the `[benchmark]` budget.
    Benchmark,
    /// Latest matching record of the benchmark store.
    Stored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruthConfig {
    Named(TruthName),
    Value(f64),
}

impl Default for TruthConfig {
    fn default() -> Self {
        TruthConfig::Named(TruthName::Analytic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub schedule: Vec<usize>,
    pub trials_rule: TrialsRuleName,
    pub truth: TruthConfig,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            schedule: default_schedule(),
            trials_rule: TrialsRuleName::Cube,
            truth: TruthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub steps: usize,
    pub trials: u64,
    pub path_step_limit: u64,
    pub store: PathBuf,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            steps: 5_000,
            trials: 50_000_000,
            path_step_limit: 250_000_000_000,
            store: PathBuf::from("benchmarks.csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<ContractConfig>,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Strict parse followed by validation of every section.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn model_spec(&self) -> Result<ModelSpec<f64>, ConfigError> {
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [model] section".into()))?;
        Ok(m.build()?)
    }

    pub fn contract(&self) -> Result<BarrierContract<f64>, ConfigError> {
        let c = self
            .contract
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing [contract] section".into()))?;
        Ok(c.build())
    }

    /// Reference price for `table`. A stored truth is looked up in the
    /// benchmark store by model and contract hash.
    pub fn truth(&self) -> Result<Truth<f64>, ConfigError> {
        Ok(match self.experiment.truth {
            TruthConfig::Value(v) => Truth::Value(v),
            TruthConfig::Named(TruthName::Analytic) => Truth::Analytic,
            TruthConfig::Named(TruthName::Benchmark) => Truth::BenchmarkRun {
                steps: self.benchmark.steps,
                trials: self.benchmark.trials,
            },
            TruthConfig::Named(TruthName::Stored) => {
                let (m, c) = (model_hash(&self.model_spec()?), contract_hash(&self.contract()?));
                let store = BenchmarkStore::new(&self.benchmark.store);
                let rec = store
                    .latest(&m, &c)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?
                    .ok_or_else(|| {
                        ConfigError::Invalid(format!(
                            "no benchmark for model {m} / contract {c} in {}",
                            store.path().display()
                        ))
                    })?;
                Truth::Value(rec.mean)
            }
        })
    }

    fn build_experiment(&self, truth: Truth<f64>) -> Result<Experiment<f64>, ConfigError> {
        let mut exp = Experiment::new(self.model_spec()?, self.contract()?);
        exp.truth = truth;
        exp.schedule = self.experiment.schedule.clone();
        exp.trials = match self.experiment.trials_rule {
            TrialsRuleName::Cube => TrialsRule::Cube,
            TrialsRuleName::Fixed => TrialsRule::Fixed(self.mc.trials),
        };
        exp.seed = self.mc.seed;
        exp.workers = self.mc.workers;
        exp.rng = self.mc.rng.into();
        Ok(exp)
    }

    pub fn experiment(&self) -> Result<Experiment<f64>, ConfigError> {
        self.build_experiment(self.truth()?)
    }

    pub fn benchmark_options(&self) -> BenchmarkOptions {
        BenchmarkOptions {
            seed: self.mc.seed,
            workers: self.mc.workers,
            path_step_limit: self.benchmark.path_step_limit as u128,
        }
    }

    /// Checks every section the command needs against the library's
    /// invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        if let Some(m) = &self.model {
            m.build()?;
        }
        if let Some(c) = &self.contract {
            let contract = c.build();
            contract.validate_terms().map_err(|e| invalid(&e))?;
        }
        self.mc.mc_config().validate().map_err(|e| invalid(&e))?;
        if self.command == Command::Verify {
            return Ok(());
        }
        let model = self.model_spec()?;
        let contract = self.contract()?;
        let lds_unsupported = match self.command {
            Command::Price => self.mc.method == MethodName::Pathwise,
            Command::Benchmark => true,
            Command::Table | Command::Verify => false,
        };
        if self.mc.rng == RngName::Lds && lds_unsupported {
            return Err(ConfigError::Invalid(
                "low-discrepancy sampling is only available with method = \"pcs\"".into(),
            ));
        }
        if self.mc.method == MethodName::Pcs || self.command == Command::Table {
            contract.validate(model.x0()).map_err(|e| invalid(&e))?;
        }
        if self.command == Command::Table {
            let exp = self.build_experiment(Truth::Value(1.0))?;
            exp.validate().map_err(|e| invalid(&e))?;
            match self.experiment.truth {
                TruthConfig::Value(v) if !(v.is_finite() && v != 0.0) => {
                    return Err(ConfigError::Invalid(
                        "truth value must be finite and non-zero".into(),
                    ));
                }
                TruthConfig::Named(TruthName::Analytic)
                    if analytic_price(&model, &contract).is_none() =>
                {
                    return Err(ConfigError::Invalid(
                        "no closed-form price for this model and contract; set experiment.truth".into(),
                    ));
                }
                _ => {}
            }
        }
        if self.command == Command::Benchmark && (self.benchmark.steps == 0 || self.benchmark.trials == 0) {
            return Err(ConfigError::Invalid("benchmark budget must be positive".into()));
        }
        Ok(())
    }
}
