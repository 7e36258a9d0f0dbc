//! Turns a corpus of relational databases into a weighted inter-database
//! relationship graph with profiled node and edge properties.
//!
//! Pipeline: [`corpus`] loading, [`serializer`] abstracts, [`pairs`] for
//! topic-id supervision, [`embeddings`] similarity join, [`graph`] analytics
//! and [`profiler`] properties.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod ged;
pub mod graph;
pub mod metrics;
pub mod pairs;
pub mod profiler;
pub mod scalar;
pub mod serializer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Embedding store precision.
pub type EmbeddingMatrixF32 = embeddings::EmbeddingMatrix<f32>;
pub type EmbeddingMatrixF64 = embeddings::EmbeddingMatrix<f64>;
/// Similarity-weighted database graph.
pub type SimilarityGraph = graph::Graph<f64>;
