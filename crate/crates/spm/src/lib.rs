//! Sand pile lattices: the single-grain fall dynamics on partitions, the
//! lattices it generates, their incremental and infinite-column
//! constructions, the self-similar tree coding, and the counting
//! recurrences — each route cross-checked against brute force.
//!
//! The crate is organized by construction route:
//!
//! - [`partition`]: pile states, the fall rule, closed-form membership and
//!   fixed points.
//! - [`diagram`]: labelled covering-relation diagrams, breadth-first
//!   construction, order operations and exhaustive lattice verification,
//!   deterministic DOT/JSON export.
//! - [`incremental`]: the stratum-by-stratum step from `n` to `n + 1`
//!   grains, stair strata, generating partitions, and the multiset
//!   evaluation of the stratum decomposition.
//! - [`infinite`]: the infinite-column model, shot vectors, embeddings,
//!   and the stacked filter of all lattices up to a bound.
//! - [`sptree`]: the grain-addition tree, its self-similar subtree
//!   families, chain decomposition, and successor labels from membership.
//! - [`counting`]: printed and structure-derived cardinality recurrences
//!   with the reconciliation report.
//! - [`verify`]: the named invariant suites behind the CLI `verify`
//!   command.

pub mod counting;
pub mod diagram;
pub mod incremental;
pub mod infinite;
pub mod partition;
pub mod sptree;
pub mod verify;

pub use diagram::{
    build_bfs, check_lattice, compare, infimum, supremum, Coords, Diagram, DiagramError,
    DiagramKind, OrderRel,
};
pub use partition::{all_partitions, HeightClass, Partition, PartitionError};
