//! Dynamic set-intersection data structures built on word-level parallelism.
//!
//! The crate provides four related structures plus a triangle enumerator:
//!
//! * [`packed_sets::PackedFamily`] — a family of sets with an a-priori size
//!   cap, storing fingerprints packed several to a machine word so that
//!   intersection queries run on whole words instead of single elements.
//! * [`triangle::enumerate_triangles`] — lists all triangles of an undirected
//!   graph by intersecting packed out-neighborhoods under a low-out-degree
//!   acyclic orientation.
//! * [`emptiness::EmptinessStructure`] — fully dynamic disjointness queries
//!   with pairwise intersection-size tables among large sets.
//! * [`witness::WitnessStructure`] — insert-only witness queries combining
//!   packed stashes with witness tables.
//! * [`tree::IntersectionTree`] — fully dynamic reporting/witness queries via
//!   a binary tree over the key universe with shortcut pointers.
//!
//! Everything is deterministic given a seed: hash functions, permutations and
//! internal containers all derive from the seed passed at construction, so
//! identical inputs reproduce identical runs byte for byte.
//!
//! [`oracle`] holds deliberately slow reference implementations used as
//! ground truth by the test suites, and [`counters`] exposes the operation
//! counters behind the empirical scaling checks.

pub mod counters;
pub mod emptiness;
pub mod error;
pub mod graph;
pub mod hashing;
pub mod oracle;
pub mod packed_sets;
pub mod tree;
pub mod triangle;
pub mod witness;
pub mod word_ops;

mod det;

pub use error::{Error, Result};

/// Nearest power of two (ties toward the smaller), used when re-anchoring
/// the size estimate `N'` during rebuilds.
pub(crate) fn round_pow2_nearest(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let hi = n.next_power_of_two();
    let lo = hi / 2;
    if n - lo <= hi - n {
        lo
    } else {
        hi
    }
}

/// Identifier of a set within a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetId(pub u64);

/// Identifier of a universe element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementKey(pub u64);

impl std::fmt::Display for SetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S{}", self.0)
    }
}

impl std::fmt::Display for ElementKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
