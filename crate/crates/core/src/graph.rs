//! Routing graph and net instance data model.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// A global-routing tile on a given metal layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
    pub layer: u32,
}

impl Vertex {
    pub fn new(x: i32, y: i32, layer: u32) -> Self {
        Self { x, y, layer }
    }

    /// Planar L1 distance, ignoring layers.
    pub fn l1(&self, other: &Vertex) -> i64 {
        (self.x as i64 - other.x as i64).abs() + (self.y as i64 - other.y as i64).abs()
    }
}

/// An undirected graph edge with congestion cost and delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cost: f64,
    pub delay: f64,
    pub wire_type: u32,
}

impl Edge {
    /// The endpoint opposite to `from`.
    #[inline]
    pub fn other(&self, from: VertexId) -> VertexId {
        if self.u == from {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected, connected routing graph. Parallel edges are allowed and are
/// told apart by their index. Adjacency is stored in CSR form, each vertex's
/// incident edges in ascending edge index order.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adj_offsets: Vec<usize>,
    adj: Vec<(VertexId, EdgeId)>,
}

impl RoutingGraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInstance("graph has no vertices".into()));
        }
        let n = vertices.len();
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge {i}: endpoint out of range ({}, {}) with {n} vertices",
                    e.u, e.v
                )));
            }
            if !(e.cost.is_finite() && e.cost >= 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "edge {i}: cost must be a nonnegative finite number, got {}",
                    e.cost
                )));
            }
            if !(e.delay.is_finite() && e.delay >= 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "edge {i}: delay must be a nonnegative finite number, got {}",
                    e.delay
                )));
            }
        }

        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u] += 1;
            if e.v != e.u {
                degree[e.v] += 1;
            }
        }
        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for d in &degree[..n] {
            adj_offsets.push(acc);
            acc += d;
        }
        adj_offsets.push(acc);
        let mut fill = adj_offsets.clone();
        let mut adj = vec![(0, 0); acc];
        for (i, e) in edges.iter().enumerate() {
            adj[fill[e.u]] = (e.v, i);
            fill[e.u] += 1;
            if e.v != e.u {
                adj[fill[e.v]] = (e.u, i);
                fill[e.v] += 1;
            }
        }

        let graph = Self {
            vertices,
            edges,
            adj_offsets,
            adj,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidInstance("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn vertex(&self, v: VertexId) -> Vertex {
        self.vertices[v]
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// `(neighbor, edge)` pairs incident to `v`.
    #[inline]
    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[self.adj_offsets[v]..self.adj_offsets[v + 1]]
    }

    /// Planar L1 length spanned by an edge (0 for vias).
    pub fn planar_length(&self, e: EdgeId) -> i64 {
        let edge = &self.edges[e];
        self.vertices[edge.u].l1(&self.vertices[edge.v])
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in self.incident(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertices.len()
    }

    /// Follows `walk` from `start` and returns the vertex it ends at, or
    /// `None` if consecutive edges are not incident.
    pub fn walk_end(&self, start: VertexId, walk: &[EdgeId]) -> Option<VertexId> {
        let mut at = start;
        for &e in walk {
            let edge = self.edges.get(e)?;
            if edge.u == at {
                at = edge.v;
            } else if edge.v == at {
                at = edge.u;
            } else {
                return None;
            }
        }
        Some(at)
    }

    /// The vertex sequence visited by `walk` starting at `start`
    /// (length `walk.len() + 1`). Panics on a broken walk.
    pub fn walk_vertices(&self, start: VertexId, walk: &[EdgeId]) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(walk.len() + 1);
        let mut at = start;
        out.push(at);
        for &e in walk {
            let edge = &self.edges[e];
            assert!(edge.u == at || edge.v == at, "edge {e} not incident to {at}");
            at = edge.other(at);
            out.push(at);
        }
        out
    }

    pub fn walk_cost(&self, walk: &[EdgeId]) -> f64 {
        walk.iter().map(|&e| self.edges[e].cost).sum()
    }

    pub fn walk_delay(&self, walk: &[EdgeId]) -> f64 {
        walk.iter().map(|&e| self.edges[e].delay).sum()
    }
}

/// A sink terminal with its delay weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sink {
    pub vertex: VertexId,
    pub weight: f64,
}

/// A net: root, weighted sinks and the bifurcation penalty parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct NetInstance {
    pub root: VertexId,
    pub sinks: Vec<Sink>,
    /// Total delay penalty per bifurcation, shared between both branches.
    pub d_bif: f64,
    /// Lower limit on each branch's share of `d_bif`, in `[0, 1/2]`.
    pub eta: f64,
}

impl NetInstance {
    pub fn validate(&self, graph: &RoutingGraph) -> Result<()> {
        let n = graph.vertex_count();
        if self.root >= n {
            return Err(Error::InvalidInstance(format!(
                "root vertex {} out of range",
                self.root
            )));
        }
        for (i, s) in self.sinks.iter().enumerate() {
            if s.vertex >= n {
                return Err(Error::InvalidInstance(format!(
                    "sink {i}: vertex {} out of range",
                    s.vertex
                )));
            }
            if !(s.weight.is_finite() && s.weight > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "sink {i}: weight must be positive, got {}",
                    s.weight
                )));
            }
        }
        if !(self.d_bif.is_finite() && self.d_bif >= 0.0) {
            return Err(Error::InvalidInstance(format!(
                "d_bif must be nonnegative, got {}",
                self.d_bif
            )));
        }
        check_eta(self.eta)?;
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.sinks.iter().map(|s| s.weight).sum()
    }

    /// Number of terminals including the root.
    pub fn terminal_count(&self) -> usize {
        self.sinks.len() + 1
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=0.5).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidInstance(format!(
            "eta out of [0, 1/2]: {eta}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> RoutingGraph {
        let vertices = vec![Vertex::new(0, 0, 0), Vertex::new(1, 0, 0), Vertex::new(2, 0, 0)];
        let e = |u, v| Edge { u, v, cost: 1.0, delay: 2.0, wire_type: 0 };
        RoutingGraph::new(vertices, vec![e(0, 1), e(1, 2)]).unwrap()
    }

    #[test]
    fn incident_lists_are_sorted_by_edge() {
        let g = path3();
        assert_eq!(g.incident(1), &[(0, 0), (2, 1)]);
        assert_eq!(g.walk_end(0, &[0, 1]), Some(2));
        assert_eq!(g.walk_end(0, &[1]), None);
        assert_eq!(g.walk_vertices(2, &[1, 0]), vec![2, 1, 0]);
    }

    #[test]
    fn rejects_disconnected_and_negative() {
        let vertices = vec![Vertex::new(0, 0, 0), Vertex::new(1, 0, 0)];
        assert!(RoutingGraph::new(vertices.clone(), vec![]).is_err());
        let bad = Edge { u: 0, v: 1, cost: -1.0, delay: 0.0, wire_type: 0 };
        let err = RoutingGraph::new(vertices, vec![bad]).unwrap_err();
        assert!(err.to_string().contains("edge 0"));
    }

    #[test]
    fn instance_validation() {
        let g = path3();
        let mut net = NetInstance {
            root: 0,
            sinks: vec![Sink { vertex: 2, weight: 1.0 }, Sink { vertex: 0, weight: 2.0 }],
            d_bif: 1.0,
            eta: 0.25,
        };
        net.validate(&g).unwrap();
        net.eta = 0.7;
        assert!(net.validate(&g).unwrap_err().to_string().contains("eta out of [0, 1/2]"));
        net.eta = 0.5;
        net.sinks[0].weight = 0.0;
        assert!(net.validate(&g).is_err());
    }
}
