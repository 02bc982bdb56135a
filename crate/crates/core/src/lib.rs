//! ℓ0-isoperimetry on the unit cube and the hypercube: exact small-grid
//! brute force, extremal constructions, binomial and Hamming-ball numerics,
//! shaking transforms, splitting-plane certificates for balanced weights, and
//! coordinate hit-and-run sampling.

pub mod binomial;
pub mod bits;
pub mod error;
pub mod gridset;
pub mod hit_and_run;
pub mod hypercube;
pub mod splitting;

pub use error::{Error, Result};
pub use gridset::{Direction, GridSet, GridSpec};
pub use hypercube::{BitVector, VertexSet};
