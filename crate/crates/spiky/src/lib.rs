//! Randomized spiky-ball convex bodies with certified illumination-number
//! bounds.
//!
//! The library builds the body K = conv({±X_i} ∪ (1/D)·B) from uniform
//! random unit spikes, checks the two bad events (spikes too close; some
//! direction sees too many spikes) against a delta-net, and emits
//! certificates for the resulting lower bound on the illumination number.
//! Around that core sit exact cap-measure calculus, a support-function
//! geometry oracle for desk-scale validation, the covering-based upper
//! bound, and a deterministic parallel Monte Carlo harness.

pub mod body;
pub mod bounds;
pub mod cap;
pub mod error;
pub mod harness;
pub mod hexfloat;
pub mod oracle;
pub mod sphere;

pub use error::{Error, Result};

/// Library version string, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
