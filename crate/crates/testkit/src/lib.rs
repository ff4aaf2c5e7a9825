//! Test support: deterministic fixture corpus, naive reference
//! implementations of the pipeline kernels, and directory snapshots.
//!
//! Nothing here depends on the main crate; the references are written
//! against the documented contracts so oracle tests compare two
//! independent implementations.

pub mod compare;
pub mod fixtures;
pub mod reference;
