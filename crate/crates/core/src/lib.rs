//! Coherent states on the circle of spatial frequencies `|p| = Ω`, their
//! planar anti-transforms, and orientation preference maps assembled from
//! them.
//!
//! Fields are sampled on periodic grids and all sums run in a fixed order,
//! so every output is reproducible bit for bit on one platform regardless of
//! the rayon worker count.

pub mod angular;
pub mod coherent;
pub mod error;
pub mod pinwheel;
pub mod pipeline;
pub mod se2;
pub mod special;
pub mod spectrum;
pub mod synthesis;
pub mod validation;

pub use error::{Error, Result};
