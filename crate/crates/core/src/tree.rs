//! Embedded Steiner arborescences and the cost-distance objective.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NetInstance, RoutingGraph, VertexId};
use crate::penalty::optimal_lambda;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeRole {
    Root,
    /// Index into `NetInstance::sinks`.
    Sink(usize),
    Steiner,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub role: NodeRole,
    pub position: VertexId,
    /// Total sink weight of the subtree below (and including) this node.
    pub weight: f64,
}

/// A parent-to-child tree arc embedded as a walk in the routing graph,
/// starting at the parent's position.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeArc {
    pub parent: usize,
    pub child: usize,
    pub walk: Vec<EdgeId>,
    /// Share of `d_bif` charged on this arc.
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub connection_cost: f64,
    pub weighted_wire_delay: f64,
    pub weighted_bif_penalty: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddedTree {
    pub nodes: Vec<TreeNode>,
    pub arcs: Vec<TreeArc>,
    pub root: usize,
    pub cost: CostBreakdown,
}

/// Structural facts derived while validating a tree.
struct Shape {
    /// Node order with every parent before its children.
    order: Vec<usize>,
    /// Incoming arc of each node (`usize::MAX` for the root).
    parent_arc: Vec<usize>,
    children: Vec<Vec<usize>>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidTree(msg.into())
}

fn check_shape(
    graph: &RoutingGraph,
    net: &NetInstance,
    nodes: &[TreeNode],
    arcs: &[TreeArc],
) -> Result<Shape> {
    let n = graph.vertex_count();
    let mut root = None;
    let mut seen_sink = vec![false; net.sinks.len()];
    for (i, node) in nodes.iter().enumerate() {
        if node.position >= n {
            return Err(invalid(format!("node {i}: position {} out of range", node.position)));
        }
        match node.role {
            NodeRole::Root => {
                if root.replace(i).is_some() {
                    return Err(invalid("more than one root node"));
                }
                if node.position != net.root {
                    return Err(invalid("root node is not at the root position"));
                }
            }
            NodeRole::Sink(s) => {
                if s >= net.sinks.len() || std::mem::replace(&mut seen_sink[s], true) {
                    return Err(invalid(format!("node {i}: sink {s} unknown or repeated")));
                }
                if node.position != net.sinks[s].vertex {
                    return Err(invalid(format!("node {i}: sink {s} is not at its position")));
                }
            }
            NodeRole::Steiner => {}
        }
    }
    let root = root.ok_or_else(|| invalid("no root node"))?;
    if let Some(s) = seen_sink.iter().position(|&b| !b) {
        return Err(invalid(format!("sink {s} missing from the tree")));
    }
    if arcs.len() + 1 != nodes.len() {
        return Err(invalid("arborescence: arc count must be node count - 1"));
    }

    let mut parent_arc = vec![usize::MAX; nodes.len()];
    let mut children = vec![Vec::new(); nodes.len()];
    for (a, arc) in arcs.iter().enumerate() {
        if arc.parent >= nodes.len() || arc.child >= nodes.len() {
            return Err(invalid(format!("arc {a}: endpoint out of range")));
        }
        if arc.child == root || parent_arc[arc.child] != usize::MAX {
            return Err(invalid(format!("arborescence: node {} has two parents", arc.child)));
        }
        parent_arc[arc.child] = a;
        children[arc.parent].push(arc.child);
        let from = nodes[arc.parent].position;
        let to = nodes[arc.child].position;
        if graph.walk_end(from, &arc.walk) != Some(to) {
            return Err(invalid(format!(
                "arc {a}: walk does not lead from vertex {from} to vertex {to}"
            )));
        }
    }

    let mut order = Vec::with_capacity(nodes.len());
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        order.extend(children[v].iter().copied());
    }
    if order.len() != nodes.len() {
        return Err(invalid("arborescence: not every node is reachable from the root"));
    }

    for (i, node) in nodes.iter().enumerate() {
        let out = children[i].len();
        let ok = match node.role {
            NodeRole::Root => out == usize::from(!net.sinks.is_empty()),
            NodeRole::Sink(_) => out == 0,
            NodeRole::Steiner => (1..=2).contains(&out),
        };
        if !ok {
            return Err(invalid(format!(
                "bifurcation compatibility: node {i} ({:?}) has out-degree {out}",
                node.role
            )));
        }
    }

    Ok(Shape {
        order,
        parent_arc,
        children,
    })
}

/// Subtree sink weights per node.
fn subtree_weights(net: &NetInstance, nodes: &[TreeNode], shape: &Shape) -> Vec<f64> {
    let mut weight = vec![0.0; nodes.len()];
    for &v in shape.order.iter().rev() {
        let own = match nodes[v].role {
            NodeRole::Sink(s) => net.sinks[s].weight,
            _ => 0.0,
        };
        weight[v] = own + shape.children[v].iter().map(|&c| weight[c]).sum::<f64>();
    }
    weight
}

/// Penalty shares per arc: the two arcs leaving a bifurcation get the
/// optimal split for their subtree weights, all other arcs get 0.
fn arc_lambdas(net: &NetInstance, arcs: &[TreeArc], shape: &Shape, weight: &[f64]) -> Vec<f64> {
    let mut lambda = vec![0.0; arcs.len()];
    for kids in &shape.children {
        if let [x, y] = kids[..] {
            let (lx, ly) =
                optimal_lambda(weight[x], weight[y], net.eta).expect("eta validated with the instance");
            lambda[shape.parent_arc[x]] = lx;
            lambda[shape.parent_arc[y]] = ly;
        }
    }
    lambda
}

fn breakdown(
    graph: &RoutingGraph,
    net: &NetInstance,
    nodes: &[TreeNode],
    arcs: &[TreeArc],
    shape: &Shape,
    lambda: &[f64],
) -> CostBreakdown {
    let connection_cost: f64 = arcs.iter().map(|a| graph.walk_cost(&a.walk)).sum();

    // Root-to-node wire delay and accumulated penalty share.
    let mut wire = vec![0.0; nodes.len()];
    let mut share = vec![0.0; nodes.len()];
    for &v in &shape.order[1..] {
        let a = shape.parent_arc[v];
        let p = arcs[a].parent;
        wire[v] = wire[p] + graph.walk_delay(&arcs[a].walk);
        share[v] = share[p] + lambda[a];
    }
    let mut sink_node = vec![usize::MAX; net.sinks.len()];
    for (i, node) in nodes.iter().enumerate() {
        if let NodeRole::Sink(s) = node.role {
            sink_node[s] = i;
        }
    }
    let mut weighted_wire_delay = 0.0;
    let mut weighted_bif_penalty = 0.0;
    for (s, &v) in sink_node.iter().enumerate() {
        let w = net.sinks[s].weight;
        weighted_wire_delay += w * wire[v];
        weighted_bif_penalty += w * (net.d_bif * share[v]);
    }
    CostBreakdown {
        connection_cost,
        weighted_wire_delay,
        weighted_bif_penalty,
        total: connection_cost + weighted_wire_delay + weighted_bif_penalty,
    }
}

/// Recomputes the objective of `tree` from scratch. Penalty shares are
/// derived from the tree's own subtree weights; stored `lambda` values are
/// ignored.
pub fn evaluate_cost(graph: &RoutingGraph, net: &NetInstance, tree: &EmbeddedTree) -> Result<CostBreakdown> {
    let shape = check_shape(graph, net, &tree.nodes, &tree.arcs)?;
    if tree.nodes.get(tree.root).map(|n| n.role) != Some(NodeRole::Root) {
        return Err(invalid("root index does not point at the root node"));
    }
    let weight = subtree_weights(net, &tree.nodes, &shape);
    let lambda = arc_lambdas(net, &tree.arcs, &shape, &weight);
    Ok(breakdown(graph, net, &tree.nodes, &tree.arcs, &shape, &lambda))
}

impl EmbeddedTree {
    /// Validates nodes and arcs and fills in subtree weights, penalty shares
    /// and the cost breakdown.
    pub fn assemble(
        graph: &RoutingGraph,
        net: &NetInstance,
        mut nodes: Vec<TreeNode>,
        mut arcs: Vec<TreeArc>,
    ) -> Result<Self> {
        let shape = check_shape(graph, net, &nodes, &arcs)?;
        let weight = subtree_weights(net, &nodes, &shape);
        let lambda = arc_lambdas(net, &arcs, &shape, &weight);
        let cost = breakdown(graph, net, &nodes, &arcs, &shape, &lambda);
        for (node, w) in nodes.iter_mut().zip(&weight) {
            node.weight = *w;
        }
        for (arc, l) in arcs.iter_mut().zip(&lambda) {
            arc.lambda = *l;
        }
        let root = shape.order[0];
        Ok(Self { nodes, arcs, root, cost })
    }

    /// Checks every structural invariant plus consistency of the stored
    /// penalty shares and cost with a fresh evaluation.
    pub fn validate(&self, graph: &RoutingGraph, net: &NetInstance) -> Result<()> {
        let fresh = evaluate_cost(graph, net, self)?;
        let shape = check_shape(graph, net, &self.nodes, &self.arcs)?;
        let weight = subtree_weights(net, &self.nodes, &shape);
        let lambda = arc_lambdas(net, &self.arcs, &shape, &weight);
        for (a, (arc, l)) in self.arcs.iter().zip(&lambda).enumerate() {
            if (arc.lambda - l).abs() > 1e-12 {
                return Err(invalid(format!("arc {a}: stored lambda {} != {l}", arc.lambda)));
            }
        }
        let scale = fresh.total.abs().max(1.0);
        if (fresh.total - self.cost.total).abs() > 1e-9 * scale {
            return Err(invalid(format!(
                "stored total {} differs from recomputed {}",
                self.cost.total, fresh.total
            )));
        }
        Ok(())
    }

    /// Root-to-sink delay (wire delay plus penalty shares) per sink index.
    pub fn sink_delays(&self, graph: &RoutingGraph, net: &NetInstance) -> Vec<f64> {
        let mut parent_arc = vec![usize::MAX; self.nodes.len()];
        for (a, arc) in self.arcs.iter().enumerate() {
            parent_arc[arc.child] = a;
        }
        let mut out = vec![0.0; net.sinks.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let NodeRole::Sink(s) = node.role {
                let mut v = i;
                let mut delay = 0.0;
                while parent_arc[v] != usize::MAX {
                    let arc = &self.arcs[parent_arc[v]];
                    delay += graph.walk_delay(&arc.walk) + arc.lambda * net.d_bif;
                    v = arc.parent;
                }
                out[s] = delay;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Sink, Vertex};

    fn unit_edge(u: usize, v: usize, cost: f64, delay: f64) -> Edge {
        Edge { u, v, cost, delay, wire_type: 0 }
    }

    fn node(role: NodeRole, position: VertexId) -> TreeNode {
        TreeNode { role, position, weight: 0.0 }
    }

    fn arc(parent: usize, child: usize, walk: Vec<EdgeId>) -> TreeArc {
        TreeArc { parent, child, walk, lambda: 0.0 }
    }

    /// r(0) - m(1), m - u(2), m - v(3), every edge c = 1, d = 1.
    fn star(wu: f64, wv: f64) -> (RoutingGraph, NetInstance, EmbeddedTree) {
        let vertices = (0..4).map(|i| Vertex::new(i, 0, 0)).collect();
        let g = RoutingGraph::new(
            vertices,
            vec![unit_edge(0, 1, 1.0, 1.0), unit_edge(1, 2, 1.0, 1.0), unit_edge(1, 3, 1.0, 1.0)],
        )
        .unwrap();
        let net = NetInstance {
            root: 0,
            sinks: vec![Sink { vertex: 2, weight: wu }, Sink { vertex: 3, weight: wv }],
            d_bif: 4.0,
            eta: 0.25,
        };
        let nodes = vec![
            node(NodeRole::Root, 0),
            node(NodeRole::Steiner, 1),
            node(NodeRole::Sink(0), 2),
            node(NodeRole::Sink(1), 3),
        ];
        let arcs = vec![arc(0, 1, vec![0]), arc(1, 2, vec![1]), arc(1, 3, vec![2])];
        let tree = EmbeddedTree::assemble(&g, &net, nodes, arcs).unwrap();
        (g, net, tree)
    }

    #[test]
    fn path_without_bifurcation() {
        let vertices = (0..3).map(|i| Vertex::new(i, 0, 0)).collect();
        let g = RoutingGraph::new(vertices, vec![unit_edge(0, 1, 1.0, 2.0), unit_edge(1, 2, 1.0, 2.0)])
            .unwrap();
        let net = NetInstance { root: 0, sinks: vec![Sink { vertex: 2, weight: 3.0 }], d_bif: 7.0, eta: 0.1 };
        let tree = EmbeddedTree::assemble(
            &g,
            &net,
            vec![node(NodeRole::Root, 0), node(NodeRole::Sink(0), 2)],
            vec![arc(0, 1, vec![0, 1])],
        )
        .unwrap();
        let c = evaluate_cost(&g, &net, &tree).unwrap();
        assert_eq!((c.connection_cost, c.weighted_wire_delay, c.weighted_bif_penalty, c.total), (2.0, 12.0, 0.0, 14.0));
    }

    #[test]
    fn star_with_unequal_weights() {
        let (g, net, tree) = star(2.0, 1.0);
        assert_eq!(tree.arcs[1].lambda, 0.25);
        assert_eq!(tree.arcs[2].lambda, 0.75);
        assert_eq!(tree.sink_delays(&g, &net), vec![3.0, 5.0]);
        assert_eq!(evaluate_cost(&g, &net, &tree).unwrap().total, 14.0);
        assert_eq!(tree.nodes[1].weight, 3.0);
        tree.validate(&g, &net).unwrap();
    }

    #[test]
    fn star_with_equal_weights() {
        let (g, net, tree) = star(1.0, 1.0);
        assert_eq!(evaluate_cost(&g, &net, &tree).unwrap().total, 11.0);
    }

    #[test]
    fn stored_lambdas_are_ignored() {
        let (g, net, mut tree) = star(2.0, 1.0);
        tree.arcs[1].lambda = 0.9;
        assert_eq!(evaluate_cost(&g, &net, &tree).unwrap().total, 14.0);
        assert!(tree.validate(&g, &net).is_err());
    }

    #[test]
    fn zero_d_bif_has_no_penalty() {
        let (g, mut net, tree) = star(2.0, 1.0);
        net.d_bif = 0.0;
        assert_eq!(evaluate_cost(&g, &net, &tree).unwrap().weighted_bif_penalty, 0.0);
    }

    #[test]
    fn structural_violations() {
        let (g, net, tree) = star(2.0, 1.0);

        let mut t = tree.clone();
        t.arcs[1].walk = vec![2];
        assert!(evaluate_cost(&g, &net, &t).unwrap_err().to_string().contains("walk"));

        // sink with a child
        let mut t = tree.clone();
        t.arcs[2].parent = 2;
        t.arcs[2].walk = vec![1, 2];
        assert!(evaluate_cost(&g, &net, &t).unwrap_err().to_string().contains("bifurcation compatibility"));

        // root with two children
        let mut t = tree.clone();
        t.arcs[1].parent = 0;
        t.arcs[1].walk = vec![0, 1];
        assert!(evaluate_cost(&g, &net, &t).is_err());

        let mut t = tree;
        t.nodes.pop();
        t.arcs.pop();
        assert!(evaluate_cost(&g, &net, &t).unwrap_err().to_string().contains("sink 1 missing"));
    }
}
