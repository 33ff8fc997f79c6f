//! Critical multitype Bienaymé trees.
//!
//! The crate is organised in layers:
//!
//! * [`kernel`]: offspring families, mean matrices, Perron vectors, scaling
//!   constants and exponential tilting.
//! * [`tree`]: plane and multitype trees in DFS order, encodings, blobs,
//!   reduction, flattening and blow-up.
//! * [`sampler`]: unconditioned, size-conditioned (rejection and exact),
//!   by-type, degree-sequence and spine samplers.
//! * [`analysis`]: feasibility lattices and the statistical checks run on
//!   sampled batches.
//!
//! Types are 0-based everywhere in the API. The JSON, text and binary formats
//! use 1-based type labels, and conversions happen at those boundaries.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod sampler;
pub mod tree;

pub use error::{Error, Result};
