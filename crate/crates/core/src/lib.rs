//! Core of the citilink minutes platform.
//!
//! Raw council minutes go through a three-layer extraction (metadata,
//! subjects of discussion, votes), are cross-referenced against registries,
//! curated through a back-office lifecycle and finally published into an
//! immutable BM25 index with multi-select facets. The [`eval`] module scores
//! extractor output against gold annotations.

pub mod eval;
pub mod exec;
pub mod extraction;
pub mod model;
pub mod newsletter;
pub mod resolve;
pub mod search;
pub mod service;
pub mod store;
pub mod text;
pub mod votes;

pub use model::*;
