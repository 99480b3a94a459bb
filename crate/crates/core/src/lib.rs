//! Path queries on trees whose nodes carry multidimensional weight vectors.
//!
//! The structures here answer, for a query path between two nodes x and y,
//! questions about the weight vectors found along it: how many fall in a
//! given orthogonal range (counting), which ones do (reporting), which
//! vectors dominate a query point (dominance), and what the smallest
//! first-coordinate value above a threshold is subject to a constraint on
//! the second (successor). Everything is built on ordinal trees addressed
//! by preorder rank, layered range hierarchies over the weight axes, and a
//! small set of shared path primitives.
//!
//! The `oracle` module holds deliberately naive reimplementations of every
//! query used to cross-check the real structures.

pub mod aggregates;
pub mod counting;
pub mod dominance;
pub mod reporting;
pub mod successor;
pub mod error;
pub mod extract;
pub mod framework;
pub mod hierarchy;
pub mod labeled;
pub mod oracle;
pub mod stats;
pub mod tree;
pub mod weighted;

pub use error::Error;
pub use tree::{NodeId, OrdinalTree, NONE};
