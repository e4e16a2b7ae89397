//! Quotient summaries of multi-view RDF graphs and their merging.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod graph;
pub mod merge;
pub mod multi_merge;
pub mod rdf_io;
pub mod summary;

pub use error::{Error, Result};
