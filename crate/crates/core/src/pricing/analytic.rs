//! Closed-form prices used as truth in tests and tables.
//!
//! All prices are undiscounted expectations: the rate enters only through
//! the drift of the underlying.

use super::PricingError;
use crate::num::Real;

/// Standard normal distribution function.
pub fn norm_cdf<T: Real>(z: T) -> T {
    T::lit(0.5 * libm::erfc(-z.as_f64() / std::f64::consts::SQRT_2))
}

pub fn norm_pdf<T: Real>(z: T) -> T {
    let z = z.as_f64();
    T::lit((-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt())
}

fn domain<T: Real>(ok: bool, what: &str, values: &[T]) -> Result<(), PricingError> {
    if ok && values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(PricingError::Domain(what.to_string()))
    }
}

/// `E[(X_T - S)⁺]` for geometric Brownian motion started at `x`.
pub fn bs_call_undiscounted<T: Real>(x: T, strike: T, vol: T, rate: T, maturity: T) -> T {
    let sd = vol * maturity.sqrt();
    let half = vol * vol / T::two();
    let d_plus = ((strike / x).ln() - (rate + half) * maturity) / sd;
    let d_minus = ((strike / x).ln() - (rate - half) * maturity) / sd;
    x * (rate * maturity).exp() * norm_cdf(-d_plus) - strike * norm_cdf(-d_minus)
}

/// Down-and-out call under Black-Scholes, via the reflection principle:
/// `V(x0) - (K/x0)^(2r/σ² - 1) V(K²/x0)`.
pub fn bs_barrier_exact<T: Real>(
    x0: T,
    strike: T,
    barrier: T,
    vol: T,
    rate: T,
    maturity: T,
) -> Result<T, PricingError> {
    domain(
        x0 > barrier && barrier > T::zero() && vol > T::zero() && maturity > T::zero(),
        "Black-Scholes barrier price needs x0 > K > 0, sigma > 0, T > 0",
        &[x0, strike, barrier, vol, rate, maturity],
    )?;
    let v = |x| bs_call_undiscounted(x, strike, vol, rate, maturity);
    let exponent = T::two() * rate / (vol * vol) - T::one();
    Ok(v(x0) - (barrier / x0).powf(exponent) * v(barrier * barrier / x0))
}

/// `E[(Y - S) 1{Y > level}]` for `Y ~ N(mean, sd²)`.
fn gaussian_partial<T: Real>(mean: T, sd: T, strike: T, level: T) -> T {
    let d = (mean - level) / sd;
    (mean - strike) * norm_cdf(d) + sd * norm_pdf(d)
}

/// Undiscounted call on `x + σW_T`.
pub fn bachelier_call<T: Real>(x: T, strike: T, vol: T, maturity: T) -> T {
    let sd = vol * maturity.sqrt();
    if sd == T::zero() {
        return (x - strike).pos();
    }
    gaussian_partial(x, sd, strike, strike)
}

/// Down-and-out call on arithmetic Brownian motion. For `S ≥ K` this is
/// `C(x0) - C(2K - x0)` with `C` the Bachelier call.
pub fn bachelier_barrier_exact<T: Real>(
    x0: T,
    strike: T,
    barrier: T,
    vol: T,
    maturity: T,
) -> Result<T, PricingError> {
    domain(
        x0 > barrier && vol >= T::zero() && maturity > T::zero(),
        "Bachelier barrier price needs x0 > K, sigma >= 0, T > 0",
        &[x0, strike, barrier, vol, maturity],
    )?;
    let sd = vol * maturity.sqrt();
    if sd == T::zero() {
        return Ok((x0 - strike).pos());
    }
    let level = strike.max(barrier);
    let mirror = T::two() * barrier - x0;
    Ok(gaussian_partial(x0, sd, strike, level) - gaussian_partial(mirror, sd, strike, level))
}

/// `|estimate - truth| / |truth|`.
pub fn relative_error<T: Real>(estimate: T, truth: T) -> Result<T, PricingError> {
    if truth == T::zero() {
        return Err(PricingError::ZeroTruth);
    }
    Ok((estimate - truth).abs() / truth.abs())
}
