//! Relational-reasoning text detection at the text-component level.
//!
//! The pipeline represents each text instance as a chain of small rotated
//! rectangles, builds pivot-centered local graphs over them, classifies
//! pivot-neighbor linkage with a trainable spectral graph-convolution
//! network, and merges linked components into ordered instances with
//! polygon boundaries. A synthetic scene generator and a metric harness
//! make the whole pipeline testable end to end.

pub mod error;
pub mod eval;
pub mod features;
pub mod gcn;
pub mod geometry;
pub mod inference;
pub mod linalg;
pub mod local_graph;
pub mod polygon;
pub mod render;
pub mod synth;

pub use error::{DrrgError, Result};
pub use geometry::{Point, TextComponent};
