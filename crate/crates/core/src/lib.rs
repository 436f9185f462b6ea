//! Monte-Carlo pricing of knock-out barrier options by two estimators:
//!
//! * path-wise Euler-Maruyama with barrier monitoring on the time grid, and
//! * put-call symmetrization, which replaces the barrier contract by
//!   path-independent terminal payoffs of a reflected (single barrier) or
//!   folded (corridor) process.
//!
//! Models, transforms and estimators are generic over the scalar type
//! ([`Real`]); the aliases below fix it to `f64` (and `f32`).

pub mod cli;
pub mod engine;
pub mod harness;
pub mod models;
pub mod num;
pub mod pricing;
pub mod symmetry;

pub use num::Real;

pub type Model1DF64 = models::Model1D<f64>;
pub type SvModelF64 = models::SvModel<f64>;
pub type ModelSpecF64 = models::ModelSpec<f64>;
pub type CoefficientSetF64 = models::CoefficientSet<f64>;
pub type BarrierContractF64 = symmetry::BarrierContract<f64>;
pub type SymmetrizedCoefficientsF64 = symmetry::SymmetrizedCoefficients<f64>;
pub type PriceEstimateF64 = pricing::PriceEstimate<f64>;
pub type ExperimentF64 = harness::Experiment<f64>;
pub type TableRowF64 = harness::TableRow<f64>;

pub type Model1DF32 = models::Model1D<f32>;
pub type SvModelF32 = models::SvModel<f32>;
pub type ModelSpecF32 = models::ModelSpec<f32>;
pub type BarrierContractF32 = symmetry::BarrierContract<f32>;
pub type PriceEstimateF32 = pricing::PriceEstimate<f32>;
