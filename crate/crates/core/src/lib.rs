//! Moment-based estimation for the Barndorff-Nielsen-Shephard stochastic
//! volatility model observed at equidistant times.
//!
//! - [`model`]: parameters, stationary laws and their cumulants
//! - [`moments`]: exact joint moments of returns and variance
//! - [`simulate`]: sample paths for Gamma-OU and IG-OU
//! - [`estimator`]: closed-form solution of the estimating equations
//! - [`asymptotics`]: sandwich covariance of the estimator
//! - [`mc`]: Monte Carlo experiments
//! - [`config`]: JSON run configuration

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod estimator;
pub mod mc;
pub mod model;
pub mod moments;
pub mod series;
pub mod simulate;

pub use error::{Error, Result};
pub use estimator::{estimate, EstimateResult, EstimateStatus, GateFailure, MomentSummary};
pub use model::{
    CumulantSpec, GammaOuParams, IgOuParams, Model, ModelKind, ModelParams, StationaryLaw,
};
pub use moments::MomentEngine;
pub use series::ObservationSeries;
pub use simulate::{simulate, SimConfig, Simulator};
