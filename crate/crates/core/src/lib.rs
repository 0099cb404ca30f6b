//! Patrol planning for data mules collecting from path-constrained mobile
//! sensors.
//!
//! Road segments are joined into minimum spanning forests of every size,
//! each tree is walked as a doubled Euler path, and the cheapest round is
//! cut into equal pieces swept by pairs of mules. The [`deploy`] module
//! checks point coverage analytically and [`sim`] replays the plan against
//! moving sensors.

// NaN-rejecting checks read best as `!(x > 0.0)`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod deploy;
pub mod error;
pub mod euler;
pub mod forest;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
