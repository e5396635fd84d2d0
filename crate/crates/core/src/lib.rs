#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod estimates;
pub mod gamma;
pub mod hypergeom;
pub mod kernel;
pub mod quadrature;
pub mod sphere;
pub mod suite;

pub use error::{Error, Result};
