//! Risk analysis for Stein-type shrinkage estimators of a multivariate normal
//! mean when the scale is unknown.
//!
//! The estimators studied here have the form `(1 - phi(W)/W) X` with
//! `W = |X|^2 / S`. The crate provides
//!
//! * the unbiased risk estimate and the risk-difference functionals
//!   ([`sure`]),
//! * concrete shrinkage functions, including generalized Bayes rules computed
//!   by endpoint-singular quadrature ([`phi`]),
//! * the quasi-admissibility classifier and the constructive dominating
//!   perturbation ([`boundary`]),
//! * the known-variance companion results ([`known_variance`]),
//! * reproducible Monte Carlo risk simulation ([`montecarlo`]).

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod known_variance;
pub mod montecarlo;
pub mod phi;
pub mod sure;

pub use error::{Error, Result};
pub use phi::quadrature::{integrate_loglambda, QuadratureConfig};
pub use phi::{Phi, PhiSpec, Shrinkage};
pub use sure::{Constants, ProblemDims};

/// Log-spaced grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2, "invalid log grid");
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + step * i as f64).exp()
            }
        })
        .collect()
}
