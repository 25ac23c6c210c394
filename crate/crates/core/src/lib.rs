//! Cost-distance Steiner trees with bifurcation delay penalties.
//!
//! The solver joins terminals pairwise, driven by simultaneous shortest path
//! searches from all unconnected terminals, and yields an embedded
//! arborescence in a routing graph. Baseline topology heuristics, an exact
//! reference solver for small nets and a grid instance generator are
//! provided for comparison.

pub mod dijkstra;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod penalty;
pub mod search;
pub mod solver;
pub mod topology;
pub mod baselines;
pub mod oracle;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, NetInstance, RoutingGraph, Sink, Vertex, VertexId};
pub use tree::{CostBreakdown, EmbeddedTree, NodeRole, TreeArc, TreeNode};
