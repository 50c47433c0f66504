//! One-shot secure aggregation over regular graphs.
//!
//! Every user of a graph holds one input symbol and one key symbol, broadcasts
//! their sum to its neighbors, and recovers the sum of its neighbors' inputs
//! while learning nothing else about them. Keys are linear images `Z = H N` of
//! a `d`-symbol source key, with `H` taken from the kernel of
//! `diag(alpha) + A`.
//!
//! - [`gf`]: prime fields and quadratic extensions.
//! - [`topology`]: ring, prism, complete and custom graphs.
//! - [`matrix`]: exact dense linear algebra (rref, rank, kernel).
//! - [`scheme`]: the named constructions, kernel-based construction,
//!   verification and modulation search.
//! - [`engine`]: seeded protocol rounds.
//! - [`audit`]: exhaustive mutual-information and entropy audits.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod audit;
pub mod engine;
pub mod gf;
pub mod matrix;
pub mod scheme;
pub mod topology;

pub use gf::{FieldElement, FieldSpec};
pub use matrix::FieldMatrix;
pub use scheme::Scheme;
pub use topology::Topology;
