use crate::dijkstra::{dijkstra, ShortestPaths};
use crate::error::{Error, Result};
use crate::graph::{NetInstance, RoutingGraph};
use crate::penalty::optimal_lambda;
use crate::topology::{TopoKind, Topology};
use crate::tree::{EmbeddedTree, NodeRole, TreeArc, TreeNode};

/// Optimal embedding of a fixed topology; see [`embed_topology`].
pub fn embed_topology_optimal(graph: &RoutingGraph, net: &NetInstance, topo: &Topology) -> Result<EmbeddedTree> {
    Ok(embed_topology(graph, net, topo)?.0)
}

/// Embeds `topo` into the routing graph at minimum objective value and
/// returns the tree together with the value found by the dynamic program.
///
/// Penalty shares are fixed from the topology's subtree weights, so the
/// program is exact: bottom-up, each node gets a table over all graph
/// vertices holding the cheapest cost of embedding its subtree with the node
/// placed there; a child's table is pushed to its parent by one
/// multi-seeded Dijkstra with length `c + W d`, `W` being the child's
/// subtree weight.
pub fn embed_topology(graph: &RoutingGraph, net: &NetInstance, topo: &Topology) -> Result<(EmbeddedTree, f64)> {
    net.validate(graph)?;
    topo.validate(net)?;
    let children = topo.children();
    let order = topo.order();
    let weight = topo.subtree_weights(net);
    let count = topo.nodes.len();
    let n = graph.vertex_count();

    let mut lambda = vec![0.0; count];
    for kids in &children {
        if let [x, y] = kids[..] {
            let (lx, ly) = optimal_lambda(weight[x], weight[y], net.eta)?;
            lambda[x] = lx;
            lambda[y] = ly;
        }
    }

    // Table of each node, replaced by its pushed-up version once consumed.
    let mut table: Vec<Option<Vec<f64>>> = vec![None; count];
    let mut search: Vec<Option<ShortestPaths>> = vec![None; count];
    for &v in order.iter().rev() {
        let mut b = match topo.nodes[v].kind {
            TopoKind::Sink(s) => {
                let mut b = vec![f64::INFINITY; n];
                b[net.sinks[s].vertex] = 0.0;
                b
            }
            _ => vec![0.0; n],
        };
        for &c in &children[v] {
            let a = table[c].take().expect("children come first");
            for (x, ax) in b.iter_mut().zip(&a) {
                *x += ax;
            }
        }
        if v == order[0] {
            // root: only its own position counts
            let mut only = vec![f64::INFINITY; n];
            only[net.root] = b[net.root];
            b = only;
            table[v] = Some(b);
            break;
        }
        let seeds: Vec<_> = b.iter().enumerate().filter(|(_, d)| d.is_finite()).map(|(x, &d)| (x, d)).collect();
        let w = weight[v];
        let sp = dijkstra(graph, &seeds, |e| e.cost + w * e.delay);
        let extra = lambda[v] * net.d_bif * w;
        table[v] = Some(sp.dist.iter().map(|d| d + extra).collect());
        search[v] = Some(sp);
    }

    let root = order[0];
    let value = table[root].as_ref().expect("root table")[net.root];
    if !value.is_finite() {
        return Err(Error::UnreachableVertex(net.root));
    }

    let mut position = vec![usize::MAX; count];
    position[root] = net.root;
    let mut nodes = Vec::with_capacity(count);
    let mut index = vec![usize::MAX; count];
    let mut arcs = Vec::with_capacity(count.saturating_sub(1));
    for &v in &order {
        index[v] = nodes.len();
        nodes.push(TreeNode {
            role: match topo.nodes[v].kind {
                TopoKind::Root => NodeRole::Root,
                TopoKind::Sink(s) => NodeRole::Sink(s),
                TopoKind::Steiner => NodeRole::Steiner,
            },
            position: position[v],
            weight: 0.0,
        });
        for &c in &children[v] {
            let sp = search[c].as_ref().expect("child search");
            let x = position[v];
            position[c] = sp.origin(graph, x);
            let mut walk = sp.path_to(graph, x);
            walk.reverse();
            arcs.push((v, c, walk));
        }
    }
    let arcs = arcs
        .into_iter()
        .map(|(p, c, walk)| TreeArc { parent: index[p], child: index[c], walk, lambda: 0.0 })
        .collect();
    let tree = EmbeddedTree::assemble(graph, net, nodes, arcs)?;
    Ok((tree, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dijkstra::cost_distance_sssp;
    use crate::generate::{generate_grid_instance, GridSpec};
    use crate::topology::TopoNode;

    #[test]
    fn single_edge_is_a_shortest_path() {
        let mut spec = GridSpec::new(5, 5, 5, 2, 1);
        spec.wire_types = 2;
        let (g, net) = generate_grid_instance(&spec).unwrap();
        let topo = Topology {
            nodes: vec![
                TopoNode { id: 0, x: 0, y: 0, kind: TopoKind::Root },
                TopoNode { id: 1, x: 0, y: 0, kind: TopoKind::Sink(0) },
            ],
            edges: vec![(0, 1)],
        };
        let (tree, value) = embed_topology(&g, &net, &topo).unwrap();
        let direct = cost_distance_sssp(&g, net.sinks[0].vertex, net.sinks[0].weight).dist[net.root];
        assert!((value - direct).abs() <= 1e-12 * direct.max(1.0));
        assert!((tree.cost.total - value).abs() <= 1e-9 * value.max(1.0));
    }
}
