//! Link prediction on social networks.
//!
//! The pipeline splits a graph's edges into train and test sets while keeping
//! every node in the training graph, samples far-apart node pairs as
//! negatives, describes each candidate edge with 56 topological heuristics
//! and/or a Hadamard product of random-walk node embeddings, and classifies
//! edges with configurable multi-tower feed-forward networks.

pub mod artifact;
pub mod config;
pub mod embeddings;
pub mod error;
pub mod features;
pub mod graph;
pub mod heuristics;
pub mod model;
pub mod pipeline;
pub mod sampling;

pub use error::{Error, Result};
