//! Barrier symmetrization of coefficient sets and the matching terminal
//! payoff maps.
//!
//! A single down barrier `K` is handled by reflecting the coefficients below
//! `K` (`x ↦ 2K - x`, drift negated) so the modified process is symmetric
//! about `K` and agrees with the original until it first reaches the barrier.
//! A corridor `(K, K + K')` is handled by folding: the coefficients on the
//! fundamental band `[K, K + K')` are extended periodically with period `2K'`,
//! alternating plain and reflected copies. Band index is
//! `m(x) = floor((x - K) / K')`.

use thiserror::Error;

use crate::models::{CoefficientSet, Dimension};
use crate::num::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("expected {expected:?}-dimensional coefficients, got {found:?}")]
    DimensionMismatch {
        expected: Dimension,
        found: Dimension,
    },
    #[error("corridor width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("invalid contract: {0}")]
    InvalidContract(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanillaCall<T> {
    pub strike: T,
}

impl<T: Real> VanillaCall<T> {
    #[inline(always)]
    pub fn payoff(&self, x: T) -> T {
        (x - self.strike).pos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierGeometry<T> {
    /// Knocked out when the price reaches `barrier` from above.
    DownAndOut { barrier: T },
    /// Knocked out on leaving `(barrier, barrier + width)`.
    DoubleOut { barrier: T, width: T },
}

impl<T: Real> BarrierGeometry<T> {
    pub fn lower(&self) -> T {
        match *self {
            BarrierGeometry::DownAndOut { barrier } => barrier,
            BarrierGeometry::DoubleOut { barrier, .. } => barrier,
        }
    }

    pub fn upper(&self) -> Option<T> {
        match *self {
            BarrierGeometry::DownAndOut { .. } => None,
            BarrierGeometry::DoubleOut { barrier, width } => Some(barrier + width),
        }
    }

    /// Strictly inside the alive region.
    #[inline(always)]
    pub fn is_alive(&self, x: T) -> bool {
        match *self {
            BarrierGeometry::DownAndOut { barrier } => x > barrier,
            BarrierGeometry::DoubleOut { barrier, width } => x > barrier && x < barrier + width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierContract<T> {
    pub payoff: VanillaCall<T>,
    pub geometry: BarrierGeometry<T>,
    pub maturity: T,
}

impl<T: Real> BarrierContract<T> {
    pub fn down_and_out(strike: T, barrier: T, maturity: T) -> Self {
        Self {
            payoff: VanillaCall { strike },
            geometry: BarrierGeometry::DownAndOut { barrier },
            maturity,
        }
    }

    pub fn double_out(strike: T, lower: T, upper: T, maturity: T) -> Self {
        Self {
            payoff: VanillaCall { strike },
            geometry: BarrierGeometry::DoubleOut {
                barrier: lower,
                width: upper - lower,
            },
            maturity,
        }
    }

    /// Checks maturity, strike and barrier levels.
    pub fn validate_terms(&self) -> Result<(), SymmetryError> {
        let bad = |msg: String| Err(SymmetryError::InvalidContract(msg));
        if !(self.maturity > T::zero()) || !self.maturity.is_finite() {
            return bad(format!("maturity must be > 0, got {}", self.maturity));
        }
        if !(self.payoff.strike > T::zero()) || !self.payoff.strike.is_finite() {
            return bad(format!("strike must be > 0, got {}", self.payoff.strike));
        }
        let lower = self.geometry.lower();
        if !lower.is_finite() {
            return bad(format!("barrier must be finite, got {lower}"));
        }
        if let BarrierGeometry::DoubleOut { width, .. } = self.geometry {
            if !(width > T::zero()) || !width.is_finite() {
                return bad(format!("corridor width must be > 0, got {width}"));
            }
        }
        Ok(())
    }

    /// Checks the contract terms and that `x0` starts strictly alive.
    pub fn validate(&self, x0: T) -> Result<(), SymmetryError> {
        self.validate_terms()?;
        if !self.geometry.is_alive(x0) {
            let region = match self.geometry {
                BarrierGeometry::DownAndOut { barrier } => format!("above {barrier}"),
                BarrierGeometry::DoubleOut { barrier, width } => {
                    format!("inside ({barrier}, {})", barrier + width)
                }
            };
            return Err(SymmetryError::InvalidContract(format!(
                "x0 = {x0} must lie {region}"
            )));
        }
        Ok(())
    }
}

/// Which transform was applied to the base coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symmetrization<T> {
    /// `σ̃(x) = σ(2K - x)`, `μ̃(x) = -μ(2K - x)` for `x ≤ K`.
    Single1D { barrier: T },
    /// `σ̃11(x, v) = -σ11(2K - x, v)`, `μ̃1(x, v) = -μ1(2K - x, v)` for `x < K`.
    SingleSv { barrier: T },
    /// Periodic folding onto `[K, K + K')`.
    Double { barrier: T, width: T },
}

/// Symmetrized price coefficients on top of an unchanged base set. The
/// variance equation, if any, is inherited from the base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizedCoefficients<T> {
    pub base: CoefficientSet<T>,
    pub transform: Symmetrization<T>,
}

/// Band index `floor((x - K) / K')`, adjusted so that band `m` is exactly
/// the half-open interval `[K + mK', K + (m+1)K')` as evaluated in floating
/// point.
#[inline(always)]
pub fn band_index<T: Real>(x: T, barrier: T, width: T) -> i64 {
    let mut m = ((x - barrier) / width).floor().to_i64().unwrap_or(0);
    while x < barrier + T::lit(m as f64) * width {
        m -= 1;
    }
    while x >= barrier + T::lit((m + 1) as f64) * width {
        m += 1;
    }
    m
}

/// Folds `x` onto the fundamental band. Returns the mapped argument and the
/// sign applied to the coefficient there.
#[inline(always)]
pub fn fold_argument<T: Real>(x: T, barrier: T, width: T) -> (T, T) {
    let m = band_index(x, barrier, width);
    if m.rem_euclid(2) == 0 {
        (x - T::lit(m as f64) * width, T::one())
    } else {
        (
            T::two() * barrier - (x - T::lit((m + 1) as f64) * width),
            -T::one(),
        )
    }
}

impl<T: Real> SymmetrizedCoefficients<T> {
    pub fn dimension(&self) -> Dimension {
        self.base.dimension()
    }

    /// Symmetrized price diffusion.
    #[inline(always)]
    pub fn sigma_x(&self, x: T, v: T) -> T {
        match self.transform {
            Symmetrization::Single1D { barrier } => {
                if x > barrier {
                    self.base.sigma_x(x, v)
                } else {
                    self.base.sigma_x(T::two() * barrier - x, v)
                }
            }
            Symmetrization::SingleSv { barrier } => {
                if x >= barrier {
                    self.base.sigma_x(x, v)
                } else {
                    -self.base.sigma_x(T::two() * barrier - x, v)
                }
            }
            Symmetrization::Double { barrier, width } => {
                let (y, sign) = fold_argument(x, barrier, width);
                sign * self.base.sigma_x(y, v)
            }
        }
    }

    /// Symmetrized price drift.
    #[inline(always)]
    pub fn mu_x(&self, x: T, v: T) -> T {
        match self.transform {
            Symmetrization::Single1D { barrier } => {
                if x > barrier {
                    self.base.mu_x(x, v)
                } else {
                    -self.base.mu_x(T::two() * barrier - x, v)
                }
            }
            Symmetrization::SingleSv { barrier } => {
                if x >= barrier {
                    self.base.mu_x(x, v)
                } else {
                    -self.base.mu_x(T::two() * barrier - x, v)
                }
            }
            Symmetrization::Double { barrier, width } => {
                let (y, sign) = fold_argument(x, barrier, width);
                sign * self.base.mu_x(y, v)
            }
        }
    }
}

fn expect_dim<T: Real>(c: &CoefficientSet<T>, expected: Dimension) -> Result<(), SymmetryError> {
    let found = c.dimension();
    if found == expected {
        Ok(())
    } else {
        Err(SymmetryError::DimensionMismatch { expected, found })
    }
}

pub fn symmetrize_single_1d<T: Real>(
    coeffs: CoefficientSet<T>,
    barrier: T,
) -> Result<SymmetrizedCoefficients<T>, SymmetryError> {
    expect_dim(&coeffs, Dimension::One)?;
    Ok(SymmetrizedCoefficients {
        base: coeffs,
        transform: Symmetrization::Single1D { barrier },
    })
}

pub fn symmetrize_single_sv<T: Real>(
    coeffs: CoefficientSet<T>,
    barrier: T,
) -> Result<SymmetrizedCoefficients<T>, SymmetryError> {
    expect_dim(&coeffs, Dimension::Two)?;
    Ok(SymmetrizedCoefficients {
        base: coeffs,
        transform: Symmetrization::SingleSv { barrier },
    })
}

/// Single-barrier symmetrization matching the dimension of `coeffs`.
pub fn symmetrize_single<T: Real>(
    coeffs: CoefficientSet<T>,
    barrier: T,
) -> SymmetrizedCoefficients<T> {
    let transform = match coeffs.dimension() {
        Dimension::One => Symmetrization::Single1D { barrier },
        Dimension::Two => Symmetrization::SingleSv { barrier },
    };
    SymmetrizedCoefficients {
        base: coeffs,
        transform,
    }
}

/// Folds the price coefficients for the corridor `(K, K + K')`. Evaluation
/// is the closed form of the infinite reflection series, with no truncation.
pub fn fold_double<T: Real>(
    coeffs: CoefficientSet<T>,
    barrier: T,
    width: T,
) -> Result<SymmetrizedCoefficients<T>, SymmetryError> {
    if !(width > T::zero()) || !width.is_finite() {
        return Err(SymmetryError::NonPositiveWidth(width.as_f64()));
    }
    Ok(SymmetrizedCoefficients {
        base: coeffs,
        transform: Symmetrization::Double { barrier, width },
    })
}

/// `f(x)·1{x > K} - f(2K - x)·1{x < K}`; zero at `x = K`.
#[inline(always)]
pub fn reflect_payoff_single<T: Real>(f: impl Fn(T) -> T, barrier: T, x: T) -> T {
    if x > barrier {
        f(x)
    } else if x < barrier {
        -f(T::two() * barrier - x)
    } else {
        T::zero()
    }
}

/// Terminal payoff of the folded process: `f(x - mK')` on even bands,
/// `-f(2K - (x - (m+1)K'))` on odd bands.
#[inline(always)]
pub fn unfold_payoff_double<T: Real>(f: impl Fn(T) -> T, barrier: T, width: T, x: T) -> T {
    let (y, sign) = fold_argument(x, barrier, width);
    sign * f(y)
}
