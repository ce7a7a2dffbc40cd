//! Numerical laboratory for remainder terms of magnetic `L^p`-Hardy
//! inequalities in the range `1 < p < 2`.

pub mod cli;
pub mod constants;
pub mod cylindrical;
pub mod error;
pub mod fields;
pub mod functionals;
pub mod integrate;
pub mod kernel;

pub use error::{Error, Result};
pub use kernel::{CVec, Params};
