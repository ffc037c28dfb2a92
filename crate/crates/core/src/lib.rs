//! Simulation, bounds and an index-based erasure codec for the channel that
//! stores `M` binary molecules of length `L` and reads back `N = cM`
//! molecules sampled uniformly with replacement, in no particular order.
//!
//! Capacity at `L = beta log2 M` is `(1 - e^-c)(1 - 1/beta)`; see
//! [`bounds::capacity`]. [`codec`] reaches it constructively with in-band
//! indices plus an MDS code across molecules.

pub mod bounds;
pub mod codec;
pub mod coupon;
pub mod error;
pub mod experiments;
pub mod genie;
pub mod model;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
