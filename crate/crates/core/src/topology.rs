//! Abstract Steiner topologies in the plane.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NetInstance, RoutingGraph};
use crate::penalty::optimal_lambda;
use crate::tree::{EmbeddedTree, NodeRole};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TopoKind {
    Root,
    /// Index into `NetInstance::sinks`.
    Sink(usize),
    Steiner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TopoNode {
    pub id: usize,
    pub x: i32,
    pub y: i32,
    pub kind: TopoKind,
}

/// A rooted tree over the terminals and abstract Steiner points. Edges are
/// `(parent, child)` node indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Topology {
    pub nodes: Vec<TopoNode>,
    pub edges: Vec<(usize, usize)>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidTopology(msg.into())
}

fn l1(a: (i32, i32), b: (i32, i32)) -> i64 {
    (i64::from(a.0) - i64::from(b.0)).abs() + (i64::from(a.1) - i64::from(b.1)).abs()
}

impl Topology {
    pub fn root(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == TopoKind::Root)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for &(p, c) in &self.edges {
            out[p].push(c);
        }
        out
    }

    /// Nodes ordered parents first, starting at the root.
    pub fn order(&self) -> Vec<usize> {
        let children = self.children();
        let Some(root) = self.root() else {
            return Vec::new();
        };
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend(children[v].iter().copied());
        }
        order
    }

    /// Checks that this is a bifurcation-compatible arborescence containing
    /// every terminal of `net` exactly once.
    pub fn validate(&self, net: &NetInstance) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(invalid(format!("node {i} carries id {}", n.id)));
            }
        }
        let roots = self.nodes.iter().filter(|n| n.kind == TopoKind::Root).count();
        if roots != 1 {
            return Err(invalid(format!("expected one root node, found {roots}")));
        }
        let mut seen = vec![false; net.sinks.len()];
        for n in &self.nodes {
            if let TopoKind::Sink(s) = n.kind {
                if s >= seen.len() || std::mem::replace(&mut seen[s], true) {
                    return Err(invalid(format!("sink {s} unknown or repeated")));
                }
            }
        }
        if let Some(s) = seen.iter().position(|&b| !b) {
            return Err(invalid(format!("sink {s} missing")));
        }
        if self.edges.len() + 1 != self.nodes.len() {
            return Err(invalid("edge count must be node count - 1"));
        }
        let mut has_parent = vec![false; self.nodes.len()];
        for &(p, c) in &self.edges {
            if p >= self.nodes.len() || c >= self.nodes.len() {
                return Err(invalid("edge endpoint out of range"));
            }
            if std::mem::replace(&mut has_parent[c], true) {
                return Err(invalid(format!("node {c} has two parents")));
            }
        }
        if self.order().len() != self.nodes.len() {
            return Err(invalid("not every node is reachable from the root"));
        }
        let children = self.children();
        for (i, n) in self.nodes.iter().enumerate() {
            let out = children[i].len();
            let ok = match n.kind {
                TopoKind::Root => out == usize::from(!net.sinks.is_empty()),
                TopoKind::Sink(_) => out == 0,
                TopoKind::Steiner => (1..=2).contains(&out),
            };
            if !ok {
                return Err(invalid(format!("node {i} ({:?}) has out-degree {out}", n.kind)));
            }
        }
        Ok(())
    }

    fn pos(&self, i: usize) -> (i32, i32) {
        (self.nodes[i].x, self.nodes[i].y)
    }

    /// Total L1 length of all edges.
    pub fn planar_length(&self) -> i64 {
        self.edges.iter().map(|&(p, c)| l1(self.pos(p), self.pos(c))).sum()
    }

    /// Planar root-to-sink path length per sink index.
    pub fn sink_path_lengths(&self, net: &NetInstance) -> Vec<i64> {
        let children = self.children();
        let mut dist = vec![0i64; self.nodes.len()];
        let mut out = vec![0; net.sinks.len()];
        for v in self.order() {
            for &c in &children[v] {
                dist[c] = dist[v] + l1(self.pos(v), self.pos(c));
            }
            if let TopoKind::Sink(s) = self.nodes[v].kind {
                out[s] = dist[v];
            }
        }
        out
    }

    /// Total sink weight below every node.
    pub fn subtree_weights(&self, net: &NetInstance) -> Vec<f64> {
        let children = self.children();
        let mut w = vec![0.0; self.nodes.len()];
        for &v in self.order().iter().rev() {
            let own = match self.nodes[v].kind {
                TopoKind::Sink(s) => net.sinks[s].weight,
                _ => 0.0,
            };
            w[v] = own + children[v].iter().map(|&c| w[c]).sum::<f64>();
        }
        w
    }

    /// The topology underlying an embedded tree, nodes at their planar
    /// positions.
    pub fn from_tree(graph: &RoutingGraph, tree: &EmbeddedTree) -> Self {
        let nodes = tree
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let v = graph.vertex(n.position);
                let kind = match n.role {
                    NodeRole::Root => TopoKind::Root,
                    NodeRole::Sink(s) => TopoKind::Sink(s),
                    NodeRole::Steiner => TopoKind::Steiner,
                };
                TopoNode { id, x: v.x, y: v.y, kind }
            })
            .collect();
        let edges = tree.arcs.iter().map(|a| (a.parent, a.child)).collect();
        Self { nodes, edges }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("topology serializes")
    }
}

/// Smallest delay per unit of planar length over all planar edges, or 0 if
/// the graph has none.
pub fn min_delay_per_unit(graph: &RoutingGraph) -> f64 {
    (0..graph.edge_count())
        .filter_map(|e| {
            let len = graph.planar_length(e);
            (len > 0).then(|| graph.edge(e).delay / len as f64)
        })
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
        .unwrap_or(0.0)
}

/// Bifurcation delay expressed as planar length on the fastest wiring.
pub fn penalty_length(graph: &RoutingGraph, net: &NetInstance) -> f64 {
    let per_unit = min_delay_per_unit(graph);
    if per_unit > 0.0 {
        net.d_bif / per_unit
    } else {
        0.0
    }
}

/// Branch order used when a node with several branches is expanded into a
/// chain of bifurcations: heaviest first, stable for equal weights.
pub(crate) fn chain_order(weights: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).collect();
    idx.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    idx
}

/// Accumulated penalty share of each branch when `weights.len()` branches
/// leave one point through a chain of bifurcations built in `chain_order`.
pub(crate) fn chain_shares(weights: &[f64], eta: f64) -> Vec<f64> {
    let m = weights.len();
    let mut share = vec![0.0; m];
    if m < 2 {
        return share;
    }
    let order = chain_order(weights);
    let mut above = 0.0;
    for (level, &b) in order.iter().enumerate() {
        if level + 1 == m {
            share[b] = above;
            break;
        }
        let rest: f64 = order[level + 1..].iter().map(|&i| weights[i]).sum();
        let (mine, others) = optimal_lambda(weights[b], rest, eta).expect("eta validated with the instance");
        share[b] = above + mine;
        above += others;
    }
    share
}

/// An undirected planar tree under construction by the baselines.
#[derive(Clone, Debug)]
pub(crate) struct PlanarTree {
    pub pos: Vec<(i32, i32)>,
    pub kind: Vec<TopoKind>,
    pub adj: Vec<Vec<usize>>,
}

impl PlanarTree {
    /// Root as node 0, sinks as nodes `1..=k`, no edges.
    pub fn terminals(graph: &RoutingGraph, net: &NetInstance) -> Self {
        let mut t = Self { pos: Vec::new(), kind: Vec::new(), adj: Vec::new() };
        let p = |v| {
            let vx = graph.vertex(v);
            (vx.x, vx.y)
        };
        t.add(p(net.root), TopoKind::Root);
        for (i, s) in net.sinks.iter().enumerate() {
            t.add(p(s.vertex), TopoKind::Sink(i));
        }
        t
    }

    pub fn add(&mut self, pos: (i32, i32), kind: TopoKind) -> usize {
        self.pos.push(pos);
        self.kind.push(kind);
        self.adj.push(Vec::new());
        self.pos.len() - 1
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn link(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    pub fn unlink(&mut self, a: usize, b: usize) {
        self.adj[a].retain(|&x| x != b);
        self.adj[b].retain(|&x| x != a);
    }

    pub fn dist(&self, a: usize, b: usize) -> i64 {
        l1(self.pos[a], self.pos[b])
    }

    #[cfg(test)]
    pub fn length(&self) -> i64 {
        (0..self.len())
            .flat_map(|a| self.adj[a].iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a < b)
            .map(|(a, b)| self.dist(a, b))
            .sum()
    }

    /// Parent pointers and BFS order from node 0, children visited in
    /// ascending id order.
    pub fn rooted(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut parent = vec![usize::MAX; n];
        let mut order = vec![0];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut nb = self.adj[v].clone();
            nb.sort_unstable();
            for w in nb {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    order.push(w);
                }
            }
        }
        (parent, order)
    }

    /// Converts to a bifurcation-compatible topology rooted at node 0.
    /// Terminals with children and nodes with more than two children are
    /// expanded into chains of co-located Steiner nodes.
    pub fn normalize(&self, net: &NetInstance) -> Topology {
        let (parent, order) = self.rooted();
        let n = self.len();
        let mut children = vec![Vec::new(); n];
        for &v in &order[1..] {
            children[parent[v]].push(v);
        }
        let mut weight = vec![0.0; n];
        for &v in order.iter().rev() {
            let own = match self.kind[v] {
                TopoKind::Sink(s) => net.sinks[s].weight,
                _ => 0.0,
            };
            weight[v] = own + children[v].iter().map(|&c| weight[c]).sum::<f64>();
        }
        let mut out = Builder::default();
        let root = out.node(self.pos[0], TopoKind::Root);
        let branches = self.emit_children(0, &children, &weight, net, &mut out);
        if let Some(head) = out.chain(self.pos[0], branches) {
            out.edges.push((root, head));
        }
        Topology { nodes: out.nodes, edges: out.edges }
    }

    fn emit_children(
        &self,
        v: usize,
        children: &[Vec<usize>],
        weight: &[f64],
        net: &NetInstance,
        out: &mut Builder,
    ) -> Vec<(usize, f64)> {
        children[v]
            .iter()
            .filter_map(|&c| self.emit(c, children, weight, net, out).map(|h| (h, weight[c])))
            .collect()
    }

    /// Emits the subtree of `v`; returns its head node, or `None` if it
    /// holds no terminal.
    fn emit(
        &self,
        v: usize,
        children: &[Vec<usize>],
        weight: &[f64],
        net: &NetInstance,
        out: &mut Builder,
    ) -> Option<usize> {
        let mut branches = self.emit_children(v, children, weight, net, out);
        if let TopoKind::Sink(s) = self.kind[v] {
            let leaf = out.node(self.pos[v], self.kind[v]);
            branches.push((leaf, net.sinks[s].weight));
        }
        out.chain(self.pos[v], branches)
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<TopoNode>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn node(&mut self, pos: (i32, i32), kind: TopoKind) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TopoNode { id, x: pos.0, y: pos.1, kind });
        id
    }

    /// Joins the branches at `pos` by a chain of bifurcations, heaviest
    /// branch split off first.
    fn chain(&mut self, pos: (i32, i32), branches: Vec<(usize, f64)>) -> Option<usize> {
        let weights: Vec<f64> = branches.iter().map(|b| b.1).collect();
        let ordered: Vec<usize> = chain_order(&weights).into_iter().map(|i| branches[i].0).collect();
        let mut head = *ordered.last()?;
        for &b in ordered.iter().rev().skip(1) {
            let s = self.node(pos, TopoKind::Steiner);
            self.edges.push((s, b));
            self.edges.push((s, head));
            head = s;
        }
        Some(head)
    }
}

/// Penalty share accumulated from the root down to every node of a planar
/// tree, under the chain expansion `normalize` applies. For a sink with
/// children the value excludes the share of the sink's own leaf branch,
/// which is returned separately.
pub(crate) fn path_shares(tree: &PlanarTree, net: &NetInstance) -> (Vec<f64>, Vec<f64>) {
    let (parent, order) = tree.rooted();
    let n = tree.len();
    let mut children = vec![Vec::new(); n];
    for &v in &order[1..] {
        children[parent[v]].push(v);
    }
    let mut weight = vec![0.0; n];
    for &v in order.iter().rev() {
        let own = match tree.kind[v] {
            TopoKind::Sink(s) => net.sinks[s].weight,
            _ => 0.0,
        };
        weight[v] = own + children[v].iter().map(|&c| weight[c]).sum::<f64>();
    }
    let mut share = vec![0.0; n];
    let mut leaf = vec![0.0; n];
    for &v in &order {
        // subtrees without terminals vanish in `normalize`
        let kids: Vec<usize> = children[v].iter().copied().filter(|&c| weight[c] > 0.0).collect();
        let mut ws: Vec<f64> = kids.iter().map(|&c| weight[c]).collect();
        let sink_w = match tree.kind[v] {
            TopoKind::Sink(s) if !kids.is_empty() => Some(net.sinks[s].weight),
            _ => None,
        };
        if let Some(w) = sink_w {
            ws.push(w);
        }
        let shares = chain_shares(&ws, net.eta);
        for (i, &c) in kids.iter().enumerate() {
            share[c] = share[v] + shares[i];
        }
        leaf[v] = share[v] + if sink_w.is_some() { shares[ws.len() - 1] } else { 0.0 };
    }
    (share, leaf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sink;

    fn net(weights: &[f64]) -> NetInstance {
        NetInstance {
            root: 0,
            sinks: weights.iter().map(|&w| Sink { vertex: 0, weight: w }).collect(),
            d_bif: 1.0,
            eta: 0.25,
        }
    }

    #[test]
    fn chain_shares_sum_like_nested_bifurcations() {
        assert_eq!(chain_shares(&[3.0], 0.25), vec![0.0]);
        assert_eq!(chain_shares(&[1.0, 3.0], 0.25), vec![0.75, 0.25]);
        // heaviest (5) splits first against 1+1, then the two equal ones
        assert_eq!(chain_shares(&[1.0, 5.0, 1.0], 0.25), vec![0.75 + 0.5, 0.25, 0.75 + 0.5]);
    }

    #[test]
    fn normalization_expands_high_degree_nodes() {
        let n = net(&[1.0, 2.0, 3.0]);
        let mut t = PlanarTree { pos: vec![(0, 0), (1, 0), (0, 1), (2, 2)], kind: vec![], adj: vec![vec![]; 4] };
        t.kind = vec![TopoKind::Root, TopoKind::Sink(0), TopoKind::Sink(1), TopoKind::Sink(2)];
        t.link(0, 1);
        t.link(0, 2);
        t.link(1, 3);
        let topo = t.normalize(&n);
        topo.validate(&n).unwrap();
        assert_eq!(topo.planar_length(), t.length());
        assert_eq!(topo.sink_path_lengths(&n), vec![1, 1, 4]);
        let w = topo.subtree_weights(&n);
        assert_eq!(w[topo.root().unwrap()], 6.0);
    }

    #[test]
    fn validation_names_the_problem() {
        let n = net(&[1.0, 1.0]);
        let node = |id, kind| TopoNode { id, x: 0, y: 0, kind };
        let mut topo = Topology {
            nodes: vec![node(0, TopoKind::Root), node(1, TopoKind::Sink(0)), node(2, TopoKind::Sink(1))],
            edges: vec![(0, 1), (0, 2)],
        };
        assert!(topo.validate(&n).unwrap_err().to_string().contains("out-degree"));
        topo.edges = vec![(1, 0), (0, 2)];
        assert!(topo.validate(&n).unwrap_err().to_string().contains("reachable"));
        let json = topo.to_json();
        assert!(json.contains("\"kind\":\"root\"") && json.contains("{\"sink\":0}"));
    }
}
