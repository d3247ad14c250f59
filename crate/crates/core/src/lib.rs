//! Limit measures, Laplace asymptotics and Wasserstein convergence rates for
//! Gibbs families `μₙ ∝ e^{−nℓ}π₀` that concentrate on finitely many points
//! or spheres.
//!
//! Everything is generic over the scalar (`f32` or `f64`) through [`Real`];
//! the aliases below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiments;
pub mod laplace;
pub mod limit;
pub mod linalg;
pub mod problem;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GibbsFamily = problem::GibbsFamily<f64>;
pub type Component = problem::Component<f64>;
pub type ScalarField = problem::ScalarField<f64>;
pub type TubularFrame = laplace::TubularFrame<f64>;
pub type LimitMeasure = limit::LimitMeasure<f64>;
pub type GaussianProxy = limit::GaussianProxy<f64>;
pub type SampleBatch = sampling::SampleBatch<f64>;
pub type TransportEstimate = transport::TransportEstimate<f64>;
pub type TransportPlan = transport::TransportPlan<f64>;
