//! Convergence tables, benchmark generation and the property suite.

mod benchmark;
mod report;
mod verify;

pub use benchmark::{
    contract_hash, make_benchmark, model_hash, Benchmark, BenchmarkOptions, BenchmarkRecord,
    BenchmarkStore,
};
pub use report::{format_sig6, table_csv, write_table_csv, CSV_HEADER};
pub use verify::{verify_properties, CheckResult, VerifyBudget, VerifyReport};

use thiserror::Error;

use crate::engine::mix_seed;
use crate::models::ModelSpec;
use crate::num::Real;
use crate::pricing::{
    analytic_price, price, price_pathwise, relative_error, McConfig, Method, PriceEstimate,
    PricingError, RngMode,
};
use crate::symmetry::BarrierContract;

const EM_TAG: u64 = 0x454d;
const PCM_TAG: u64 = 0x50434d;
const TRUTH_TAG: u64 = 0x5452;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid experiment: {0}")]
    Experiment(String),
    #[error("malformed benchmark record at line {line}: {reason}")]
    Store { line: usize, reason: String },
}

/// Reference price the error columns are measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truth<T> {
    /// Closed form; only for models that have one.
    Analytic,
    /// A fixed number, e.g. a published or stored benchmark.
    Value(T),
    /// Fresh path-wise benchmark at the given budget.
    BenchmarkRun { steps: usize, trials: u64 },
}

/// Trial count per schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialsRule {
    /// `M = n³`.
    #[default]
    Cube,
    Fixed(u64),
}

impl TrialsRule {
    pub fn trials(&self, steps: usize) -> u64 {
        match *self {
            TrialsRule::Cube => (steps as u64).saturating_pow(3),
            TrialsRule::Fixed(m) => m,
        }
    }
}

pub fn default_schedule() -> Vec<usize> {
    (1..=10).map(|i| 10 * i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment<T> {
    pub model: ModelSpec<T>,
    pub contract: BarrierContract<T>,
    pub truth: Truth<T>,
    pub schedule: Vec<usize>,
    pub trials: TrialsRule,
    pub seed: u64,
    pub workers: usize,
    /// Sampling for the symmetrization column; the path-wise column always
    /// uses pseudo-random streams.
    pub rng: RngMode,
}

impl<T: Real> Experiment<T> {
    /// Default schedule 10, 20, ..., 100 with `M = n³`, analytic truth.
    pub fn new(model: ModelSpec<T>, contract: BarrierContract<T>) -> Self {
        Self {
            model,
            contract,
            truth: Truth::Analytic,
            schedule: default_schedule(),
            trials: TrialsRule::Cube,
            seed: McConfig::default().seed,
            workers: 0,
            rng: RngMode::Pseudo,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.model.validate().map_err(PricingError::from)?;
        self.contract.validate_terms().map_err(PricingError::from)?;
        if self.schedule.contains(&0) {
            return Err(HarnessError::Experiment("step counts must be positive".into()));
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Experiment(
                "step schedule must be strictly increasing".into(),
            ));
        }
        if self.trials == TrialsRule::Fixed(0) {
            return Err(HarnessError::Experiment("trial count must be positive".into()));
        }
        if let Truth::BenchmarkRun { steps, trials } = self.truth {
            if steps == 0 || trials == 0 {
                return Err(HarnessError::Experiment(
                    "benchmark budget must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Seed of the cell `(column, n)`.
    fn cell_seed(&self, tag: u64, steps: usize) -> u64 {
        mix_seed(mix_seed(self.seed, tag), steps as u64)
    }

    pub fn resolve_truth(&self) -> Result<T, HarnessError> {
        match self.truth {
            Truth::Value(v) => Ok(v),
            Truth::Analytic => analytic_price(&self.model, &self.contract)
                .ok_or_else(|| {
                    HarnessError::Experiment("no closed-form price for this model".into())
                })?
                .map_err(HarnessError::from),
            Truth::BenchmarkRun { steps, trials } => {
                let cfg = McConfig::new(steps, trials, mix_seed(self.seed, TRUTH_TAG))
                    .with_workers(self.workers);
                Ok(price_pathwise(&self.model, &self.contract, &cfg)?.mean)
            }
        }
    }
}

/// One line of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow<T> {
    pub trials: u64,
    pub steps: usize,
    pub em: PriceEstimate<T>,
    pub pcm: PriceEstimate<T>,
    pub em_err_pct: T,
    pub pcm_err_pct: T,
}

/// Runs both estimators for every schedule entry. Each cell draws from its
/// own seed derived from the master seed.
pub fn run_convergence_table<T: Real>(exp: &Experiment<T>) -> Result<Vec<TableRow<T>>, HarnessError> {
    exp.validate()?;
    if exp.schedule.is_empty() {
        return Ok(Vec::new());
    }
    let truth = exp.resolve_truth()?;
    let hundred = T::lit(100.0);
    let mut rows = Vec::with_capacity(exp.schedule.len());
    for &n in &exp.schedule {
        let trials = exp.trials.trials(n);
        let em_cfg = McConfig::new(n, trials, exp.cell_seed(EM_TAG, n)).with_workers(exp.workers);
        let pcm_cfg = McConfig::new(n, trials, exp.cell_seed(PCM_TAG, n))
            .with_workers(exp.workers)
            .with_rng(exp.rng);
        let em = price_pathwise(&exp.model, &exp.contract, &em_cfg)?;
        let pcm = price(Method::Pcs, &exp.model, &exp.contract, &pcm_cfg)?;
        log::info!(
            "n={n} M={trials}: em={} pcm={}",
            em.mean.as_f64(),
            pcm.mean.as_f64()
        );
        rows.push(TableRow {
            trials,
            steps: n,
            em,
            pcm,
            em_err_pct: relative_error(em.mean, truth)? * hundred,
            pcm_err_pct: relative_error(pcm.mean, truth)? * hundred,
        });
    }
    Ok(rows)
}
