//! Quadrature, special functions and series helpers.

pub mod quad;
pub mod series;
pub mod special;
