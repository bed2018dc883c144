//! Large-average-submatrix toolkit.
//!
//! The crate is organized around four layers:
//!
//! - [`matrix`]: seeded Gaussian matrices, submatrix arithmetic and the
//!   ANOVA decomposition,
//! - [`search`]: the LAS alternating search, local/global optimality
//!   predicates and exhaustive desk-scale oracles,
//! - [`asymptotics`]: scaling constants, special functions, limit-law
//!   samplers and the Gaussian comparison bound,
//! - [`stats`]: empirical-distribution utilities (ECDF, KS, Wasserstein,
//!   QQ data),
//! - [`experiments`]: the named experiments E1-E7 behind the `submx` CLI.

pub mod asymptotics;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod rng;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
