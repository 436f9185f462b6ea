//! Euler-Maruyama discretization on a uniform grid, with terminal-only and
//! barrier-monitored path simulation and a deterministic parallel reducer.

pub mod lds;
pub mod rng;

use rayon::prelude::*;
use thiserror::Error;

use crate::models::{CoefficientSet, CoeffsSv, Dimension};
use crate::num::Real;
use crate::symmetry::{BarrierGeometry, SymmetrizedCoefficients};

pub use lds::{SobolNormals, SobolSequence};
pub use rng::{mix_seed, NormalSource, PathNormals, PathStream, Recording, ReplayNormals};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("non-finite state at step {step} of path {path:?} (coefficient blow-up)")]
    NonFinite { path: Option<u64>, step: usize },
    #[error("two-factor model needs an initial variance/volatility")]
    MissingVolatility,
    #[error("time grid needs n >= 1 steps and a positive finite maturity")]
    InvalidGrid,
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

impl EngineError {
    fn on_path(self, index: u64) -> Self {
        match self {
            EngineError::NonFinite { step, .. } => EngineError::NonFinite {
                path: Some(index),
                step,
            },
            e => e,
        }
    }
}

/// Uniform net `t_k = kT/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    maturity: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(maturity: T, steps: usize) -> Result<Self, EngineError> {
        if steps == 0 || !(maturity > T::zero()) || !maturity.is_finite() {
            return Err(EngineError::InvalidGrid);
        }
        Ok(Self { maturity, steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn maturity(&self) -> T {
        self.maturity
    }

    pub fn dt(&self) -> T {
        self.maturity / T::lit(self.steps as f64)
    }

    pub fn time(&self, k: usize) -> T {
        self.maturity * T::lit(k as f64) / T::lit(self.steps as f64)
    }
}

/// Coefficients the stepper can drive. The price equation may be modified
/// (symmetrized); the variance equation, if present, is always the model's.
pub trait Dynamics<T: Real>: Sync {
    fn dimension(&self) -> Dimension;
    fn sigma_x(&self, x: T, v: T) -> T;
    fn mu_x(&self, x: T, v: T) -> T;
    fn variance(&self) -> Option<&CoeffsSv<T>>;
}

impl<T: Real> Dynamics<T> for CoefficientSet<T> {
    fn dimension(&self) -> Dimension {
        CoefficientSet::dimension(self)
    }

    #[inline(always)]
    fn sigma_x(&self, x: T, v: T) -> T {
        CoefficientSet::sigma_x(self, x, v)
    }

    #[inline(always)]
    fn mu_x(&self, x: T, v: T) -> T {
        CoefficientSet::mu_x(self, x, v)
    }

    fn variance(&self) -> Option<&CoeffsSv<T>> {
        self.as_sv()
    }
}

impl<T: Real> Dynamics<T> for SymmetrizedCoefficients<T> {
    fn dimension(&self) -> Dimension {
        self.base.dimension()
    }

    #[inline(always)]
    fn sigma_x(&self, x: T, v: T) -> T {
        SymmetrizedCoefficients::sigma_x(self, x, v)
    }

    #[inline(always)]
    fn mu_x(&self, x: T, v: T) -> T {
        SymmetrizedCoefficients::mu_x(self, x, v)
    }

    fn variance(&self) -> Option<&CoeffsSv<T>> {
        self.base.as_sv()
    }
}

/// Terminal state of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome<T> {
    pub x: T,
    pub v: Option<T>,
    /// No grid point violated the barrier condition.
    pub survived: bool,
}

/// Euler state with the step sizes cached.
struct Stepper<'a, T: Real, D: Dynamics<T>> {
    coeffs: &'a D,
    var: Option<&'a CoeffsSv<T>>,
    dt: T,
    sqrt_dt: T,
}

impl<'a, T: Real, D: Dynamics<T>> Stepper<'a, T, D> {
    fn new(coeffs: &'a D, grid: &TimeGrid<T>) -> Self {
        let dt = grid.dt();
        Self {
            coeffs,
            var: coeffs.variance(),
            dt,
            sqrt_dt: dt.sqrt(),
        }
    }

    #[inline(always)]
    fn step_1d(&self, x: T, src: &mut impl NormalSource) -> T {
        let dw = self.sqrt_dt * T::lit(src.next_normal());
        x + self.coeffs.mu_x(x, T::zero()) * self.dt + self.coeffs.sigma_x(x, T::zero()) * dw
    }

    /// `W` increment drawn first, `B` second.
    #[inline(always)]
    fn step_sv(&self, c: &CoeffsSv<T>, x: T, v: T, src: &mut impl NormalSource) -> (T, T) {
        let dw = self.sqrt_dt * T::lit(src.next_normal());
        let db = self.sqrt_dt * T::lit(src.next_normal());
        let x1 = x + self.coeffs.mu_x(x, v) * self.dt + self.coeffs.sigma_x(x, v) * dw;
        let v1 = v + c.mu2(v) * self.dt + c.sigma21(v) * dw + c.sigma22(v) * db;
        (x1, v1)
    }
}

fn initial_v<T: Real, D: Dynamics<T>>(coeffs: &D, v0: Option<T>) -> Result<T, EngineError> {
    match coeffs.dimension() {
        Dimension::One => Ok(T::zero()),
        Dimension::Two => v0.ok_or(EngineError::MissingVolatility),
    }
}

#[inline(always)]
fn finite<T: Real>(x: T, v: T, step: usize) -> Result<(), EngineError> {
    if x.is_finite() && v.is_finite() {
        Ok(())
    } else {
        Err(EngineError::NonFinite { path: None, step })
    }
}

/// Euler iterate at maturity. `survived` is vacuously true.
pub fn simulate_terminal<T: Real, D: Dynamics<T>>(
    coeffs: &D,
    x0: T,
    v0: Option<T>,
    grid: &TimeGrid<T>,
    src: &mut impl NormalSource,
) -> Result<PathOutcome<T>, EngineError> {
    let mut v = initial_v(coeffs, v0)?;
    let st = Stepper::new(coeffs, grid);
    let mut x = x0;
    match st.var {
        None => {
            for k in 1..=grid.steps {
                x = st.step_1d(x, src);
                finite(x, v, k)?;
            }
        }
        Some(c) => {
            for k in 1..=grid.steps {
                (x, v) = st.step_sv(c, x, v, src);
                finite(x, v, k)?;
            }
        }
    }
    Ok(PathOutcome {
        x,
        v: v0.map(|_| v),
        survived: true,
    })
}

/// Euler path monitored at every grid point `k = 0..=n`. Stops at the first
/// point outside the alive region and reports the state there.
pub fn simulate_pathwise<T: Real, D: Dynamics<T>>(
    coeffs: &D,
    x0: T,
    v0: Option<T>,
    geometry: &BarrierGeometry<T>,
    grid: &TimeGrid<T>,
    src: &mut impl NormalSource,
) -> Result<PathOutcome<T>, EngineError> {
    let mut v = initial_v(coeffs, v0)?;
    let st = Stepper::new(coeffs, grid);
    let mut x = x0;
    let done = |x: T, v: T, survived| PathOutcome {
        x,
        v: v0.map(|_| v),
        survived,
    };
    if !geometry.is_alive(x) {
        return Ok(done(x, v, false));
    }
    match st.var {
        None => {
            for k in 1..=grid.steps {
                x = st.step_1d(x, src);
                finite(x, v, k)?;
                if !geometry.is_alive(x) {
                    return Ok(done(x, v, false));
                }
            }
        }
        Some(c) => {
            for k in 1..=grid.steps {
                (x, v) = st.step_sv(c, x, v, src);
                finite(x, v, k)?;
                if !geometry.is_alive(x) {
                    return Ok(done(x, v, false));
                }
            }
        }
    }
    Ok(done(x, v, true))
}

/// All grid iterates `(x_k, v_k)` for `k = 0..=n` (`v` is zero for 1-D).
pub fn simulate_trajectory<T: Real, D: Dynamics<T>>(
    coeffs: &D,
    x0: T,
    v0: Option<T>,
    grid: &TimeGrid<T>,
    src: &mut impl NormalSource,
) -> Result<Vec<(T, T)>, EngineError> {
    let mut v = initial_v(coeffs, v0)?;
    let st = Stepper::new(coeffs, grid);
    let mut x = x0;
    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push((x, v));
    for k in 1..=grid.steps {
        match st.var {
            None => x = st.step_1d(x, src),
            Some(c) => (x, v) = st.step_sv(c, x, v, src),
        }
        finite(x, v, k)?;
        out.push((x, v));
    }
    Ok(out)
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub count: u64,
    pub mean: T,
    pub m2: T,
}

impl<T: Real> Default for Moments<T> {
    fn default() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }
}

impl<T: Real> Moments<T> {
    #[inline(always)]
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / T::lit(self.count as f64);
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = T::lit(self.count as f64);
        let n2 = T::lit(other.count as f64);
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean = self.mean + delta * n2 / n;
        self.m2 = self.m2 + other.m2 + delta * delta * n1 * n2 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> T {
        if self.count < 2 {
            T::zero()
        } else {
            (self.m2 / T::lit((self.count - 1) as f64)).pos()
        }
    }

    pub fn stderr(&self) -> T {
        if self.count == 0 {
            return T::zero();
        }
        (self.variance() / T::lit(self.count as f64)).sqrt()
    }
}

/// Paths per work item. Fixed so the reduction tree never depends on the
/// worker count.
pub const CHUNK: u64 = 4096;

/// Runs `sample(i)` for `i in 0..trials` on `workers` threads (0 = all
/// cores) and reduces the results in index order. Bit-identical for any
/// worker count. The reported error is that of the lowest failing index.
pub fn run_batch<X, S, F>(trials: u64, workers: usize, sample: F) -> Result<S, EngineError>
where
    S: Accumulator<X>,
    F: Fn(u64) -> Result<X, EngineError> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = S::default();
                for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    acc.add(sample(i).map_err(|e| e.on_path(i))?);
                }
                Ok(acc)
            })
            .collect::<Vec<Result<S, EngineError>>>()
    };
    let parts = if workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?
            .install(work)
    };
    let mut total = S::default();
    for part in parts {
        total.combine(&part?);
    }
    Ok(total)
}

/// Reduction state for [`run_batch`].
pub trait Accumulator<T>: Default + Send {
    fn add(&mut self, x: T);
    fn combine(&mut self, other: &Self);
}

impl<T: Real> Accumulator<T> for Moments<T> {
    fn add(&mut self, x: T) {
        self.push(x)
    }

    fn combine(&mut self, other: &Self) {
        self.merge(other)
    }
}

/// Independent moments of `N` statistics computed on the same paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentsN<T, const N: usize>(pub [Moments<T>; N]);

impl<T: Real, const N: usize> Default for MomentsN<T, N> {
    fn default() -> Self {
        Self([Moments::default(); N])
    }
}

impl<T: Real, const N: usize> Accumulator<[T; N]> for MomentsN<T, N> {
    fn add(&mut self, x: [T; N]) {
        for (m, v) in self.0.iter_mut().zip(x) {
            m.push(v);
        }
    }

    fn combine(&mut self, other: &Self) {
        for (m, o) in self.0.iter_mut().zip(&other.0) {
            m.merge(o);
        }
    }
}
