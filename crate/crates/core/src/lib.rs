#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bcf;
pub mod cli;
pub mod error;
pub mod fit;
pub mod influence;
pub mod model;
pub mod pade;
pub mod quadrature;
pub mod special;
pub mod tridiag;

pub use error::{Error, Result};
