#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod attractor;
pub mod dynamics;
pub mod ergodics;
pub mod error;
pub mod export;
pub mod measures;
pub mod quad;
pub mod randgen;
pub mod special;
pub mod stattests;

pub use error::{Error, Result};
