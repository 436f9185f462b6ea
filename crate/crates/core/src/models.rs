//! Drift and diffusion coefficients of the supported price models.
//!
//! One-dimensional models follow `dX = σ(X) dW + μ(X) dt`. Stochastic
//! volatility models follow the triangular two-factor form
//!
//! ```text
//! dX = σ11(X, V) dW + μ1(X, V) dt
//! dV = σ21(V) dW + σ22(V) dB + μ2(V) dt
//! ```
//!
//! with `W`, `B` independent. Negative arguments of fractional powers and
//! square roots are floored at zero so the coefficients stay real when an
//! Euler iterate crosses the origin.

use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

fn check<T: Real>(
    ok: bool,
    name: &'static str,
    value: T,
    constraint: &'static str,
) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value: value.as_f64(),
            constraint,
        })
    }
}

/// Family of a one-dimensional model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model1DKind<T> {
    BlackScholes,
    Cev { elasticity: T },
    /// `X = x0 + σW`. Satisfies put-call symmetry at every level; used as an
    /// analytic test oracle.
    ArithmeticBm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1D<T> {
    pub kind: Model1DKind<T>,
    pub rate: T,
    pub vol: T,
    pub x0: T,
}

impl<T: Real> Model1D<T> {
    pub fn black_scholes(x0: T, rate: T, vol: T) -> Result<Self, ModelError> {
        let m = Self {
            kind: Model1DKind::BlackScholes,
            rate,
            vol,
            x0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn cev(x0: T, rate: T, vol: T, elasticity: T) -> Result<Self, ModelError> {
        let m = Self {
            kind: Model1DKind::Cev { elasticity },
            rate,
            vol,
            x0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn arithmetic_bm(x0: T, vol: T) -> Result<Self, ModelError> {
        let m = Self {
            kind: Model1DKind::ArithmeticBm,
            rate: T::zero(),
            vol,
            x0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check(self.rate >= T::zero(), "rate", self.rate, "must be >= 0")?;
        check(self.vol >= T::zero(), "sigma", self.vol, "must be >= 0")?;
        check(true, "x0", self.x0, "must be finite")?;
        if let Model1DKind::Cev { elasticity } = self.kind {
            check(
                elasticity >= T::lit(0.5),
                "beta",
                elasticity,
                "CEV elasticity must be >= 1/2",
            )?;
        }
        if self.kind == Model1DKind::ArithmeticBm {
            check(
                self.rate == T::zero(),
                "rate",
                self.rate,
                "arithmetic Brownian motion has no drift",
            )?;
        }
        Ok(())
    }
}

/// Family of a stochastic volatility model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SvKind<T> {
    /// Variance follows a square-root process.
    Heston {
        mean_reversion: T,
        long_run: T,
        vol_of_vol: T,
        correlation: T,
    },
    /// Volatility follows a mean-reverting geometric process and enters the
    /// price diffusion as `V X^β`.
    LambdaSabr {
        mean_reversion: T,
        long_run: T,
        vol_of_vol: T,
        correlation: T,
        elasticity: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvModel<T> {
    pub kind: SvKind<T>,
    pub rate: T,
    pub x0: T,
    /// Initial variance (Heston) or volatility (λ-SABR).
    pub v0: T,
}

impl<T: Real> SvModel<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn heston(
        x0: T,
        v0: T,
        rate: T,
        mean_reversion: T,
        long_run: T,
        vol_of_vol: T,
        correlation: T,
    ) -> Result<Self, ModelError> {
        let m = Self {
            kind: SvKind::Heston {
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
            },
            rate,
            x0,
            v0,
        };
        m.validate()?;
        Ok(m)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn lambda_sabr(
        x0: T,
        v0: T,
        rate: T,
        mean_reversion: T,
        long_run: T,
        vol_of_vol: T,
        correlation: T,
        elasticity: T,
    ) -> Result<Self, ModelError> {
        let m = Self {
            kind: SvKind::LambdaSabr {
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
                elasticity,
            },
            rate,
            x0,
            v0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (kappa, theta, nu, rho) = match self.kind {
            SvKind::Heston {
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
            } => (mean_reversion, long_run, vol_of_vol, correlation),
            SvKind::LambdaSabr {
                mean_reversion,
                long_run,
                vol_of_vol,
                correlation,
                elasticity,
            } => {
                check(
                    elasticity >= T::lit(0.5),
                    "beta",
                    elasticity,
                    "elasticity must be >= 1/2",
                )?;
                (mean_reversion, long_run, vol_of_vol, correlation)
            }
        };
        check(kappa > T::zero(), "kappa", kappa, "mean reversion must be > 0")?;
        check(theta > T::zero(), "theta", theta, "long-run level must be > 0")?;
        check(nu > T::zero(), "nu", nu, "vol of vol must be > 0")?;
        check(
            rho.abs() <= T::one(),
            "rho",
            rho,
            "correlation must lie in [-1, 1]",
        )?;
        check(self.rate >= T::zero(), "rate", self.rate, "must be >= 0")?;
        check(self.v0 >= T::zero(), "v0", self.v0, "must be >= 0")?;
        check(true, "x0", self.x0, "must be finite")?;
        Ok(())
    }
}

/// Any supported model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec<T> {
    OneD(Model1D<T>),
    Sv(SvModel<T>),
}

impl<T: Real> ModelSpec<T> {
    pub fn x0(&self) -> T {
        match self {
            ModelSpec::OneD(m) => m.x0,
            ModelSpec::Sv(m) => m.x0,
        }
    }

    pub fn v0(&self) -> Option<T> {
        match self {
            ModelSpec::OneD(_) => None,
            ModelSpec::Sv(m) => Some(m.v0),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelSpec::OneD(m) => m.validate(),
            ModelSpec::Sv(m) => m.validate(),
        }
    }

    pub fn coefficients(&self) -> Result<CoefficientSet<T>, ModelError> {
        match self {
            ModelSpec::OneD(m) => coefficients_1d(m),
            ModelSpec::Sv(m) => coefficients_sv(m),
        }
    }
}

impl<T> From<Model1D<T>> for ModelSpec<T> {
    fn from(m: Model1D<T>) -> Self {
        ModelSpec::OneD(m)
    }
}

impl<T> From<SvModel<T>> for ModelSpec<T> {
    fn from(m: SvModel<T>) -> Self {
        ModelSpec::Sv(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    One,
    Two,
}

/// Elasticity with the two cheap special cases resolved up front.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Power<T> {
    Linear,
    Sqrt,
    General(T),
}

impl<T: Real> Power<T> {
    fn new(beta: T) -> Self {
        if beta == T::one() {
            Power::Linear
        } else if beta == T::lit(0.5) {
            Power::Sqrt
        } else {
            Power::General(beta)
        }
    }

    #[inline(always)]
    fn apply(self, x: T) -> T {
        let x = x.pos();
        match self {
            Power::Linear => x,
            Power::Sqrt => x.sqrt(),
            Power::General(b) => x.powf(b),
        }
    }
}

/// One-dimensional coefficients `σ(x) = vol·(x⁺)^β`, `μ(x) = rate·x`
/// (or `σ ≡ vol`, `μ ≡ 0` for arithmetic Brownian motion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs1D<T> {
    vol: T,
    rate: T,
    power: Option<Power<T>>,
}

impl<T: Real> Coeffs1D<T> {
    #[inline(always)]
    pub fn sigma(&self, x: T) -> T {
        match self.power {
            Some(p) => self.vol * p.apply(x),
            None => self.vol,
        }
    }

    #[inline(always)]
    pub fn mu(&self, x: T) -> T {
        self.rate * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SvFamily<T> {
    Heston,
    LambdaSabr(Power<T>),
}

/// Two-factor coefficients. Heston uses full truncation (`v⁺` inside every
/// variance-dependent term); λ-SABR uses the raw volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffsSv<T> {
    family: SvFamily<T>,
    rate: T,
    mean_reversion: T,
    long_run: T,
    /// `ν ρ`
    vol_w: T,
    /// `ν sqrt(1 - ρ²)`
    vol_b: T,
}

impl<T: Real> CoeffsSv<T> {
    /// Volatility factor as it enters the variance equation.
    #[inline(always)]
    fn vol_factor(&self, v: T) -> T {
        match self.family {
            SvFamily::Heston => v.pos().sqrt(),
            SvFamily::LambdaSabr(_) => v,
        }
    }

    #[inline(always)]
    pub fn sigma11(&self, x: T, v: T) -> T {
        match self.family {
            SvFamily::Heston => v.pos().sqrt() * x,
            SvFamily::LambdaSabr(p) => v * p.apply(x),
        }
    }

    #[inline(always)]
    pub fn mu1(&self, x: T, _v: T) -> T {
        self.rate * x
    }

    #[inline(always)]
    pub fn sigma21(&self, v: T) -> T {
        self.vol_w * self.vol_factor(v)
    }

    #[inline(always)]
    pub fn sigma22(&self, v: T) -> T {
        self.vol_b * self.vol_factor(v)
    }

    #[inline(always)]
    pub fn mu2(&self, v: T) -> T {
        match self.family {
            SvFamily::Heston => self.mean_reversion * (self.long_run - v.pos()),
            SvFamily::LambdaSabr(_) => self.mean_reversion * (self.long_run - v),
        }
    }
}

/// Coefficients of a model, ready for evaluation. Immutable and `Sync`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientSet<T> {
    OneD(Coeffs1D<T>),
    Sv(CoeffsSv<T>),
}

impl<T: Real> CoefficientSet<T> {
    pub fn dimension(&self) -> Dimension {
        match self {
            CoefficientSet::OneD(_) => Dimension::One,
            CoefficientSet::Sv(_) => Dimension::Two,
        }
    }

    /// Coefficients with `σ ≡ 0` and `μ ≡ 0`.
    pub fn degenerate() -> Self {
        CoefficientSet::OneD(Coeffs1D {
            vol: T::zero(),
            rate: T::zero(),
            power: None,
        })
    }

    /// Price diffusion `σ(x)` or `σ11(x, v)`.
    #[inline(always)]
    pub fn sigma_x(&self, x: T, v: T) -> T {
        match self {
            CoefficientSet::OneD(c) => c.sigma(x),
            CoefficientSet::Sv(c) => c.sigma11(x, v),
        }
    }

    /// Price drift `μ(x)` or `μ1(x, v)`.
    #[inline(always)]
    pub fn mu_x(&self, x: T, v: T) -> T {
        match self {
            CoefficientSet::OneD(c) => c.mu(x),
            CoefficientSet::Sv(c) => c.mu1(x, v),
        }
    }

    pub fn as_1d(&self) -> Option<&Coeffs1D<T>> {
        match self {
            CoefficientSet::OneD(c) => Some(c),
            CoefficientSet::Sv(_) => None,
        }
    }

    pub fn as_sv(&self) -> Option<&CoeffsSv<T>> {
        match self {
            CoefficientSet::OneD(_) => None,
            CoefficientSet::Sv(c) => Some(c),
        }
    }
}

pub fn coefficients_1d<T: Real>(model: &Model1D<T>) -> Result<CoefficientSet<T>, ModelError> {
    model.validate()?;
    let (rate, power) = match model.kind {
        Model1DKind::BlackScholes => (model.rate, Some(Power::Linear)),
        Model1DKind::Cev { elasticity } => (model.rate, Some(Power::new(elasticity))),
        Model1DKind::ArithmeticBm => (T::zero(), None),
    };
    Ok(CoefficientSet::OneD(Coeffs1D {
        vol: model.vol,
        rate,
        power,
    }))
}

pub fn coefficients_sv<T: Real>(model: &SvModel<T>) -> Result<CoefficientSet<T>, ModelError> {
    model.validate()?;
    let (family, kappa, theta, nu, rho) = match model.kind {
        SvKind::Heston {
            mean_reversion,
            long_run,
            vol_of_vol,
            correlation,
        } => (
            SvFamily::Heston,
            mean_reversion,
            long_run,
            vol_of_vol,
            correlation,
        ),
        SvKind::LambdaSabr {
            mean_reversion,
            long_run,
            vol_of_vol,
            correlation,
            elasticity,
        } => (
            SvFamily::LambdaSabr(Power::new(elasticity)),
            mean_reversion,
            long_run,
            vol_of_vol,
            correlation,
        ),
    };
    let rho_bar = (T::one() - rho * rho).pos().sqrt();
    Ok(CoefficientSet::Sv(CoeffsSv {
        family,
        rate: model.rate,
        mean_reversion: kappa,
        long_run: theta,
        vol_w: nu * rho,
        vol_b: nu * rho_bar,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn heston(nu: f64, rho: f64) -> CoeffsSv<f64> {
        let m = SvModel::heston(100.0, 0.03, 0.0, 1.0, 0.03, nu, rho).unwrap();
        *coefficients_sv(&m).unwrap().as_sv().unwrap()
    }

    fn sabr(nu: f64, rho: f64, beta: f64) -> CoeffsSv<f64> {
        let m = SvModel::lambda_sabr(100.0, 0.5, 0.0, 1.0, 0.03, nu, rho, beta).unwrap();
        *coefficients_sv(&m).unwrap().as_sv().unwrap()
    }

    #[test]
    fn black_scholes_values() {
        let c = coefficients_1d(&Model1D::black_scholes(100.0, 0.0, 0.2).unwrap()).unwrap();
        let c = c.as_1d().unwrap();
        assert_eq!(c.sigma(100.0), 20.0);
        assert_eq!(c.mu(100.0), 0.0);
    }

    #[test]
    fn cev_values() {
        let c = coefficients_1d(&Model1D::cev(100.0f64, 0.02, 0.45, 0.75).unwrap()).unwrap();
        let c = c.as_1d().unwrap();
        assert_eq!(c.mu(100.0), 2.0);
        // 0.45 * 100^0.75, mpmath at 40 digits
        assert!((c.sigma(100.0) - 14.230249470757706994).abs() < 1e-12);
        assert_eq!(c.sigma(-5.0), 0.0);
    }

    #[test]
    fn arithmetic_bm_values() {
        let c = coefficients_1d(&Model1D::arithmetic_bm(100.0, 10.0).unwrap()).unwrap();
        let c = c.as_1d().unwrap();
        assert_eq!(c.sigma(-3.0), 10.0);
        assert_eq!(c.mu(1234.0), 0.0);
    }

    #[test]
    fn heston_values() {
        let c = heston(0.03, -0.7);
        assert!((c.sigma21(0.04) - (-0.0042)).abs() < 1e-15);
        for x in [-50.0, 0.0, 90.0, 1e6] {
            assert_eq!(c.sigma11(x, 0.0), 0.0);
        }
        assert_eq!(c.sigma11(100.0, 0.04), 20.0);
        // full truncation
        assert_eq!(c.sigma11(100.0, -0.01), 0.0);
        assert_eq!(c.mu2(-0.01), 1.0 * 0.03);
    }

    #[test]
    fn lambda_sabr_values() {
        let c = sabr(0.3, -0.7, 0.75);
        // 0.3 * sqrt(0.51) * 0.5, mpmath at 40 digits
        assert!((c.sigma22(0.5) - 0.10712142642814274997).abs() < 1e-15);
        // raw volatility, no flooring
        assert!(c.sigma21(-0.2) > 0.0);
        assert!((c.sigma11(100.0, 0.5) - 15.81138830084189666).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Model1D::cev(100.0, 0.0, 0.45, 0.4).is_err());
        assert!(Model1D::black_scholes(100.0, -0.01, 0.2).is_err());
        assert!(Model1D::black_scholes(100.0, 0.0, -0.2).is_err());
        let err = SvModel::heston(100.0, 0.03, 0.0, 1.0, 0.03, 0.03, 1.5).unwrap_err();
        assert!(err.to_string().contains("rho"));
        assert!(SvModel::heston(100.0, -0.1, 0.0, 1.0, 0.03, 0.03, 0.0).is_err());
        assert!(SvModel::lambda_sabr(100.0, 0.5, 0.0, 0.0, 0.03, 0.3, 0.0, 0.75).is_err());
        assert!(SvModel::lambda_sabr(100.0, 0.5, 0.0, 1.0, 0.03, 0.3, 0.0, 0.3).is_err());
    }

    #[test]
    fn black_scholes_matches_unit_elasticity_cev_bitwise() {
        let bs = coefficients_1d(&Model1D::black_scholes(100.0, 0.02, 0.3).unwrap()).unwrap();
        let cev = coefficients_1d(&Model1D::cev(100.0, 0.02, 0.3, 1.0).unwrap()).unwrap();
        let mut x = 0.37_f64;
        for _ in 0..100_000 {
            x = (x * 7919.0 + 0.123).fract();
            let s = x * 500.0 + 1e-9;
            assert_eq!(bs.sigma_x(s, 0.0).to_bits(), cev.sigma_x(s, 0.0).to_bits());
            assert_eq!(bs.mu_x(s, 0.0).to_bits(), cev.mu_x(s, 0.0).to_bits());
        }
    }

    proptest! {
        #[test]
        fn heston_correlation_decomposition(v in 0.0f64..5.0, nu in 0.01f64..2.0, rho in -1.0f64..=1.0) {
            let c = heston(nu, rho);
            let lhs = c.sigma21(v).powi(2) + c.sigma22(v).powi(2);
            let rhs = nu * nu * v;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn evaluation_is_deterministic(x in -50.0f64..400.0, v in -1.0f64..5.0) {
            for c in [
                CoefficientSet::Sv(heston(0.03, -0.7)),
                CoefficientSet::Sv(sabr(0.3, -0.7, 0.75)),
                coefficients_1d(&Model1D::cev(100.0, 0.02, 0.45, 0.75).unwrap()).unwrap(),
            ] {
                prop_assert_eq!(c.sigma_x(x, v).to_bits(), c.sigma_x(x, v).to_bits());
                prop_assert_eq!(c.mu_x(x, v).to_bits(), c.mu_x(x, v).to_bits());
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let c = coefficients_1d(&Model1D::cev(100.0f32, 0.02, 0.45, 0.75).unwrap()).unwrap();
        assert!((c.sigma_x(100.0, 0.0) - 14.230249).abs() < 1e-4);
    }
}
