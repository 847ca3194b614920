//! Interval estimation for a binomial success rate when some binary
//! outcomes are missing, aimed at small single-arm trials with success
//! rates near one.
//!
//! * [`dist`]: special functions, quantiles and samplers.
//! * [`intervals`]: closed-form intervals on complete data.
//! * [`rubin`]: combining rules for multiple imputation.
//! * [`methods`]: the eleven estimators and their configuration.
//! * [`simulation`]: the Monte Carlo coverage study.
//! * [`application`]: the CIT-07 case study.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod application;
pub mod dist;
pub mod error;
pub mod intervals;
pub mod io;
pub mod methods;
pub mod rubin;
pub mod simulation;

pub use error::{Error, Result};
pub use intervals::IntervalEstimate;
pub use methods::{Estimator, MethodId, PriorSpec, RunConfig, TrialData};
