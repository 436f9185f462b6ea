//! Monte-Carlo estimators for knock-out calls.
//!
//! * [`price_pathwise`]: Euler paths of the original model, payoff paid if
//!   every grid point stays alive.
//! * [`price_pcs`] / [`price_pcs_double`]: terminal Euler draws of the
//!   symmetrized (or folded) model against the reflected (or unfolded)
//!   payoff. No barrier is monitored.

pub mod analytic;

use std::time::Instant;

use thiserror::Error;

pub use analytic::{
    bachelier_barrier_exact, bachelier_call, bs_barrier_exact, bs_call_undiscounted, norm_cdf,
    norm_pdf, relative_error,
};

use crate::engine::{
    run_batch, simulate_pathwise, simulate_terminal, EngineError, Moments, PathStream,
    SobolSequence, TimeGrid,
};
use crate::models::{Dimension, Model1DKind, ModelError, ModelSpec};
use crate::num::Real;
use crate::symmetry::{
    fold_double, reflect_payoff_single, symmetrize_single, unfold_payoff_double, BarrierContract,
    BarrierGeometry, SymmetrizedCoefficients, SymmetryError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Contract(#[from] SymmetryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid Monte-Carlo configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error("relative error undefined for a zero reference price")]
    ZeroTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RngMode {
    /// Counter-based pseudo-random streams, one per path.
    #[default]
    Pseudo,
    /// Shifted Sobol points; only for path-independent estimators.
    LowDiscrepancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pathwise,
    Pcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub steps: usize,
    pub trials: u64,
    pub seed: u64,
    /// 0 uses every available core.
    pub workers: usize,
    pub rng: RngMode,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            trials: 1_000_000,
            seed: 42,
            workers: 0,
            rng: RngMode::Pseudo,
        }
    }
}

impl McConfig {
    pub fn new(steps: usize, trials: u64, seed: u64) -> Self {
        Self {
            steps,
            trials,
            seed,
            ..Self::default()
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_rng(mut self, rng: RngMode) -> Self {
        self.rng = rng;
        self
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        if self.steps == 0 {
            return Err(PricingError::Config("steps must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(PricingError::Config("trials must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: T,
    pub trials: u64,
    pub steps: usize,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

impl<T: Real> PriceEstimate<T> {
    fn from_moments(m: &Moments<T>, cfg: &McConfig, started: Instant) -> Self {
        Self {
            mean: m.mean,
            stderr: m.stderr(),
            trials: m.count,
            steps: cfg.steps,
            elapsed: started.elapsed().as_secs_f64(),
        }
    }
}

/// Path-wise Euler-Maruyama estimate of `E[f(X_T) 1{alive on the grid}]`.
/// A start outside the alive region prices to zero.
pub fn price_pathwise<T: Real>(
    model: &ModelSpec<T>,
    contract: &BarrierContract<T>,
    cfg: &McConfig,
) -> Result<PriceEstimate<T>, PricingError> {
    cfg.validate()?;
    if cfg.rng == RngMode::LowDiscrepancy {
        return Err(PricingError::Config(
            "low-discrepancy sampling is only available for the symmetrization estimators".into(),
        ));
    }
    contract.validate_terms()?;
    let coeffs = model.coefficients()?;
    let grid = TimeGrid::new(contract.maturity, cfg.steps)?;
    let (x0, v0) = (model.x0(), model.v0());
    let started = Instant::now();
    let m: Moments<T> = run_batch(cfg.trials, cfg.workers, |i| {
        let mut src = PathStream::new(cfg.seed, i).normals();
        let out = simulate_pathwise(&coeffs, x0, v0, &contract.geometry, &grid, &mut src)?;
        Ok(if out.survived {
            contract.payoff.payoff(out.x)
        } else {
            T::zero()
        })
    })?;
    Ok(PriceEstimate::from_moments(&m, cfg, started))
}

/// Averages `payoff(X̃_T)` over terminal draws of `coeffs`.
fn terminal_estimate<T: Real>(
    model: &ModelSpec<T>,
    coeffs: &SymmetrizedCoefficients<T>,
    maturity: T,
    cfg: &McConfig,
    payoff: impl Fn(T) -> T + Sync,
) -> Result<PriceEstimate<T>, PricingError> {
    let grid = TimeGrid::new(maturity, cfg.steps)?;
    let (x0, v0) = (model.x0(), model.v0());
    let started = Instant::now();
    let m: Moments<T> = match cfg.rng {
        RngMode::Pseudo => run_batch(cfg.trials, cfg.workers, |i| {
            let mut src = PathStream::new(cfg.seed, i).normals();
            Ok(payoff(simulate_terminal(coeffs, x0, v0, &grid, &mut src)?.x))
        })?,
        RngMode::LowDiscrepancy => {
            let per_step = match coeffs.dimension() {
                Dimension::One => 1,
                Dimension::Two => 2,
            };
            let seq = SobolSequence::new(cfg.steps * per_step, cfg.seed).ok_or_else(|| {
                PricingError::Config(format!(
                    "low-discrepancy mode supports at most {} dimensions",
                    SobolSequence::MAX_DIMS
                ))
            })?;
            run_batch(cfg.trials, cfg.workers, |i| {
                let mut src = seq.normals(i);
                Ok(payoff(simulate_terminal(coeffs, x0, v0, &grid, &mut src)?.x))
            })?
        }
    };
    Ok(PriceEstimate::from_moments(&m, cfg, started))
}

/// Single-barrier symmetrization estimate
/// `E[f(X̃_T) 1{X̃_T > K}] - E[f(2K - X̃_T) 1{X̃_T < K}]`.
pub fn price_pcs<T: Real>(
    model: &ModelSpec<T>,
    contract: &BarrierContract<T>,
    cfg: &McConfig,
) -> Result<PriceEstimate<T>, PricingError> {
    cfg.validate()?;
    let BarrierGeometry::DownAndOut { barrier } = contract.geometry else {
        return Err(PricingError::Config(
            "single-barrier symmetrization needs a down-and-out contract".into(),
        ));
    };
    contract.validate(model.x0())?;
    let sym = symmetrize_single(model.coefficients()?, barrier);
    let call = contract.payoff;
    terminal_estimate(model, &sym, contract.maturity, cfg, move |x| {
        reflect_payoff_single(|y| call.payoff(y), barrier, x)
    })
}

/// Corridor estimate through the folded process and the unfolded payoff.
pub fn price_pcs_double<T: Real>(
    model: &ModelSpec<T>,
    contract: &BarrierContract<T>,
    cfg: &McConfig,
) -> Result<PriceEstimate<T>, PricingError> {
    cfg.validate()?;
    let BarrierGeometry::DoubleOut { barrier, width } = contract.geometry else {
        return Err(PricingError::Config(
            "corridor folding needs a double knock-out contract".into(),
        ));
    };
    contract.validate(model.x0())?;
    let folded = fold_double(model.coefficients()?, barrier, width)?;
    let call = contract.payoff;
    terminal_estimate(model, &folded, contract.maturity, cfg, move |x| {
        unfold_payoff_double(|y| call.payoff(y), barrier, width, x)
    })
}

/// Runs `method`, picking the single or corridor variant from the contract.
pub fn price<T: Real>(
    method: Method,
    model: &ModelSpec<T>,
    contract: &BarrierContract<T>,
    cfg: &McConfig,
) -> Result<PriceEstimate<T>, PricingError> {
    match (method, contract.geometry) {
        (Method::Pathwise, _) => price_pathwise(model, contract, cfg),
        (Method::Pcs, BarrierGeometry::DownAndOut { .. }) => price_pcs(model, contract, cfg),
        (Method::Pcs, BarrierGeometry::DoubleOut { .. }) => price_pcs_double(model, contract, cfg),
    }
}

/// Closed-form price when one exists: Black-Scholes (or unit-elasticity
/// CEV) and arithmetic Brownian motion under a single down barrier.
pub fn analytic_price<T: Real>(
    model: &ModelSpec<T>,
    contract: &BarrierContract<T>,
) -> Option<Result<T, PricingError>> {
    let ModelSpec::OneD(m) = model else {
        return None;
    };
    let BarrierGeometry::DownAndOut { barrier } = contract.geometry else {
        return None;
    };
    let strike = contract.payoff.strike;
    match m.kind {
        Model1DKind::BlackScholes => Some(bs_barrier_exact(
            m.x0,
            strike,
            barrier,
            m.vol,
            m.rate,
            contract.maturity,
        )),
        Model1DKind::Cev { elasticity } if elasticity == T::one() => Some(bs_barrier_exact(
            m.x0,
            strike,
            barrier,
            m.vol,
            m.rate,
            contract.maturity,
        )),
        Model1DKind::ArithmeticBm => Some(bachelier_barrier_exact(
            m.x0,
            strike,
            barrier,
            m.vol,
            contract.maturity,
        )),
        Model1DKind::Cev { .. } => None,
    }
}
