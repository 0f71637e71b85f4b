//! Invertible regression of planar maps on `[-1,1]^2`.
//!
//! A k-NN pilot is turned into a homeomorphism: a coherent rotation fixes
//! the corners, the boundary is projected onto the square, and a centre-fan
//! triangle mesh interpolates the rest. The mesh is inverted exactly.
//!
//! Runnable examples live in `examples/`; start with `invertible_estimator`.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod geom;
pub mod heatmap;
pub mod maps;
pub mod minimax;
pub mod pilot;
pub mod risk;
pub mod rng;
pub mod rotation;
pub mod synth;

pub use error::{Error, Result};
pub use geom::Point2;
