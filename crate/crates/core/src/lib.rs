//! Capacity of branching random walk ranges.

pub mod capacity;
pub mod constants;
pub mod forest;
pub mod green;
pub mod harness;
pub mod laws;
mod par;
pub mod point;
pub mod seeds;
pub mod stats;
pub mod trees;

pub use laws::{LawError, OffspringLaw, StepLaw};
pub use point::{Point, MAX_DIM};
