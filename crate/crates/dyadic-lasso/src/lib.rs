//! L1-penalized least squares over dyadic dictionary truncations,
//! with a Monte Carlo harness checking the associated oracle
//! inequalities, convergence rates and combinatorial lemmas.

// validation guards use `!(x > 0.0)` on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed loops are the clearer idiom in the dense linear-algebra kernels
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod dictionaries;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod report;
pub mod rng;
pub mod selection;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
