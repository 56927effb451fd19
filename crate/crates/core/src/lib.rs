//! Binary-choice and linear panel models with individual and time fixed
//! effects: estimation by alternating-projections Fisher scoring, analytical
//! and split-panel-jackknife corrections of the incidental-parameter bias for
//! coefficients and average partial effects, and a Monte Carlo lab for the
//! dynamic designs those corrections are usually evaluated on.
//!
//! Module map:
//! - [`panel`] — validated panel data with dense factor indices.
//! - [`family`] — logit/probit/cloglog distributions and derivatives.
//! - [`centering`] — the weighted two-way within transformation.
//! - [`feglm`] — Fisher scoring with the fixed effects concentrated out,
//!   plus the offset re-fit.
//! - [`bias`] — analytical (ABC1-4) and jackknife (SPJ1/2) corrections of β̂.
//! - [`ape`] — partial effects, the APE correction, covariance estimators.
//! - [`lpm`] — the bias-corrected linear probability model.
//! - [`sim`] — data-generating processes and the Monte Carlo engine.

pub mod ape;
pub mod bias;
pub mod centering;
pub mod error;
pub mod family;
pub mod feglm;
pub mod linalg;
pub mod lpm;
pub mod panel;
pub mod sim;

pub use error::{Error, Result};
