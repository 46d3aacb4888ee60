//! Standard normal helpers used by the Gaussian family and the
//! normal-scale kernel estimator.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::sync::OnceLock;

fn standard() -> &'static Normal {
    static NORMAL: OnceLock<Normal> = OnceLock::new();
    NORMAL.get_or_init(|| Normal::new(0.0, 1.0).unwrap())
}

pub fn pnorm(x: f64) -> f64 {
    standard().cdf(x)
}

pub fn qnorm(p: f64) -> f64 {
    standard().inverse_cdf(p)
}

pub fn dnorm(x: f64) -> f64 {
    standard().pdf(x)
}
