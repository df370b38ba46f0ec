//! Market fluctuation toolkit: fat-tailed noise, firm coalescence kinetics,
//! bivariate return densities, a multiscale volatility cascade and estimators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod coalescence;
pub mod error;
pub mod estimators;
pub mod numerics;
pub mod pdf;
pub mod stochastic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
