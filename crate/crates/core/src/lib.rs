//! Simulation lab for parental health shocks and household labor supply.
//!
//! The crate couples a structural model of a cooperative couple deciding
//! between work and eldercare with a set of staggered difference-in-differences
//! estimators, so that estimator behaviour can be checked against known
//! ground-truth effects.
//!
//! - [`model`]: static household problem, return-to-work decomposition, worker
//!   types and the wealth/wage comparative statics.
//! - [`dynamic`]: finite-horizon Bellman recursion with Mincer wages,
//!   experience accumulation and a persistent health Markov chain.
//! - [`panel`]: synthetic staggered-event panels (structural or reduced form).
//! - [`estimators`]: two-way fixed effects, event study, group-time ATT,
//!   cluster-robust inference, Wald ratio and winsorization.
//! - [`harness`]: configuration, pipelines and the Monte Carlo runner behind
//!   the `carelab` binary.

// Negated comparisons are used on purpose so that NaN parameters fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamic;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod panel;

pub use error::{Error, Result};
