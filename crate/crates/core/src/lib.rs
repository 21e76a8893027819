//! Bell-INGARCH models for overdispersed count time series.
//!
//! The crate covers the Bell distribution ([`bell`]), the INGARCH intensity
//! recursions and simulation ([`model`]), conditional maximum likelihood
//! ([`likelihood`], [`estimation`]), Poisson and negative-binomial comparators
//! ([`baselines`]), residual diagnostics ([`diagnostics`]) and a Monte Carlo
//! study driver ([`montecarlo`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the estimation
//! routines are tuned for.

pub mod baselines;
pub mod bell;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod likelihood;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod optim;
pub mod scalar;

pub use error::{Error, Result};
pub use likelihood::Family;
pub use model::{CountSeries, IngarchSpec, IntensityPath, Link};
pub use scalar::Scalar;

/// Observations discarded before a simulated path is recorded.
pub const DEFAULT_BURN_IN: usize = 500;

pub type BellParams64 = bell::BellParams<f64>;
pub type BellParams32 = bell::BellParams<f32>;
pub type IngarchSpec64 = model::IngarchSpec<f64>;
pub type IngarchSpec32 = model::IngarchSpec<f32>;
pub type IntensityPath64 = model::IntensityPath<f64>;
pub type FitResult64 = estimation::FitResult<f64>;
pub type FitOptions64 = estimation::FitOptions<f64>;
pub type NbFit64 = baselines::NbFit<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type DiagnosticsReport64 = diagnostics::DiagnosticsReport<f64>;
