//! Rainbow matchings in properly edge-colored graphs and short-cycle-free
//! partial transversals of Latin squares.
//!
//! Three constructive solvers live here:
//!
//! * [`delta`] finds a rainbow matching of size `δ(G)` whenever the graph
//!   has at least `4δ(G) - 3` vertices, by growing "good configurations"
//!   and rotating chains.
//! * [`layered`] finds a rainbow matching of size at least
//!   `δ - 2δ^(2/3)` on graphs with at least `2δ` vertices, by layering the
//!   current matching and tracing exchanges back to unused colors.
//! * [`transversal`] builds a partial transversal of a Latin square with no
//!   cycle of length at most `k` and at least `n - 6n^((k-1)/k)` cells, and
//!   a fully cycle-free variant on top of it.
//!
//! [`oracle`] holds exhaustive solvers for small instances, [`generators`]
//! the fixtures and seeded instances, and [`sweep`] the experiment harness.

pub mod delta;
pub mod error;
pub mod generators;
pub mod graph;
pub mod latin;
pub mod layered;
pub mod oracle;
pub mod sweep;
pub mod transversal;

pub use error::SolverError;
pub use graph::{ColoredGraph, Edge, RainbowMatching};
pub use latin::{Cell, ForbiddenCycles, LatinSquare, PartialTransversal};
