//! Hierarchical planning for multi-label classification pipelines.
//!
//! The crate bundles native single- and multi-label learners, the layered
//! pipeline space they form, a best-first search over that space with
//! random-completion evaluation and two-phase selection, a random-search
//! baseline, and the experiment harness that runs and summarizes both.

pub mod dataset;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod rng;
pub mod search;
pub mod space;
pub mod stats;
