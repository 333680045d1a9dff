#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod kernels;
pub mod model;
pub mod characteristics;
pub mod density;
pub mod oracle;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};
