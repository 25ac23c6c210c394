//! Plain multi-seeded Dijkstra, shared by the embedding DP, the exact oracle,
//! landmark preprocessing and test references.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::graph::{Edge, EdgeId, RoutingGraph, VertexId};

pub const NO_EDGE: usize = usize::MAX;

/// Totally ordered `f64` for heap keys.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Key(pub f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// Edge through which each vertex was reached, `NO_EDGE` at seeds and
    /// unreached vertices.
    pub parent_edge: Vec<EdgeId>,
    pub scanned: usize,
}

impl ShortestPaths {
    /// Edges from the originating seed to `v`, in travel order.
    pub fn path_to(&self, graph: &RoutingGraph, v: VertexId) -> Vec<EdgeId> {
        let mut walk = Vec::new();
        let mut at = v;
        while self.parent_edge[at] != NO_EDGE {
            let e = self.parent_edge[at];
            walk.push(e);
            at = graph.edge(e).other(at);
        }
        walk.reverse();
        walk
    }

    /// The seed a shortest path to `v` starts from.
    pub fn origin(&self, graph: &RoutingGraph, v: VertexId) -> VertexId {
        let mut at = v;
        while self.parent_edge[at] != NO_EDGE {
            at = graph.edge(self.parent_edge[at]).other(at);
        }
        at
    }
}

/// Dijkstra from several seeds, each with its own initial distance. Ties are
/// settled in ascending vertex order.
pub fn dijkstra<F>(graph: &RoutingGraph, seeds: &[(VertexId, f64)], length: F) -> ShortestPaths
where
    F: Fn(&Edge) -> f64,
{
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_edge = vec![NO_EDGE; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(v, d) in seeds {
        if d < dist[v] {
            dist[v] = d;
            heap.push(Reverse((Key(d), v)));
        }
    }
    let mut scanned = 0;
    while let Some(Reverse((Key(d), v))) = heap.pop() {
        if done[v] || d > dist[v] {
            continue;
        }
        done[v] = true;
        scanned += 1;
        for &(w, e) in graph.incident(v) {
            let nd = d + length(graph.edge(e));
            if nd < dist[w] {
                dist[w] = nd;
                parent_edge[w] = e;
                heap.push(Reverse((Key(nd), w)));
            }
        }
    }
    ShortestPaths {
        dist,
        parent_edge,
        scanned,
    }
}

/// Single-source distances w.r.t. `c + weight * d`.
pub fn cost_distance_sssp(graph: &RoutingGraph, source: VertexId, weight: f64) -> ShortestPaths {
    dijkstra(graph, &[(source, 0.0)], |e| e.cost + weight * e.delay)
}
