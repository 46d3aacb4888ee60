//! Retrospective uncertainty estimates for feedforward regression models.
//!
//! The crate couples a trained network's last-hidden-layer embeddings with the
//! target variable through a vine copula. Epistemic confidence intervals come
//! from copula-bootstrapped prediction heads scaled by a simultaneous critical
//! value; aleatoric prediction intervals come from copula-weighted conditional
//! quantiles. The [`eval`] module scores interval quality (PICP/MPIW,
//! error-retention and calibration curves) and [`data`] generates the toy
//! regression/classification datasets used by the demos.

pub mod data;
pub mod error;
pub mod eval;
pub mod marginals;
pub mod matrix;
pub mod net;
pub mod paircop;
pub mod rng;
pub mod vcnn;
pub mod vine;

pub use error::{Error, Result};
pub use matrix::Matrix;
