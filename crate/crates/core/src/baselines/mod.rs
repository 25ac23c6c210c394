//! Comparison algorithms: a planar topology is built first and then
//! embedded optimally into the routing graph.

mod embed;
mod l1;
mod prim_dijkstra;
mod shallow_light;

pub use embed::{embed_topology, embed_topology_optimal};
pub use l1::l1_topology;
pub use prim_dijkstra::prim_dijkstra_topology;
pub use shallow_light::shallow_light_topology;

use crate::error::Result;
use crate::graph::{NetInstance, RoutingGraph};
use crate::topology::Topology;
use crate::tree::EmbeddedTree;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Baseline {
    L1,
    ShallowLight { epsilon: f64 },
    PrimDijkstra { gamma: f64 },
}

impl Baseline {
    pub fn topology(&self, graph: &RoutingGraph, net: &NetInstance) -> Result<Topology> {
        match *self {
            Baseline::L1 => Ok(l1_topology(graph, net)),
            Baseline::ShallowLight { epsilon } => shallow_light_topology(graph, net, epsilon),
            Baseline::PrimDijkstra { gamma } => prim_dijkstra_topology(graph, net, gamma),
        }
    }

    /// Builds the topology and embeds it.
    pub fn run(&self, graph: &RoutingGraph, net: &NetInstance) -> Result<EmbeddedTree> {
        embed_topology_optimal(graph, net, &self.topology(graph, net)?)
    }
}
