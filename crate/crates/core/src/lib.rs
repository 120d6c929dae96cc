//! Exemplar selection for fixed-size, class-balanced replay buffers in
//! class-incremental learning.
//!
//! The core math ([`geometry`], [`clustering`], [`selection`], [`memory`]) is
//! generic over the floating point type through [`Scalar`]. The simulator in
//! [`sim`] and the file formats in [`io`] work in `f64` and `f32` respectively.

pub mod clustering;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod memory;
pub mod scalar;
pub mod selection;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{ClassId, ExemplarId};
pub use scalar::Scalar;
pub use selection::{CoverMode, PaceSchedule, PriorityList, SelectionParams, Strategy};

pub type EmbeddingF32 = geometry::Embedding<f32>;
pub type EmbeddingF64 = geometry::Embedding<f64>;
pub type ClassDatasetF32 = geometry::ClassDataset<f32>;
pub type ClassDatasetF64 = geometry::ClassDataset<f64>;
pub type ClusteringF64 = clustering::Clustering<f64>;
pub type MemoryBufferF32 = memory::MemoryBuffer<f32>;
pub type MemoryBufferF64 = memory::MemoryBuffer<f64>;
