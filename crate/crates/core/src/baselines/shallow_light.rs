use crate::error::{Error, Result};
use crate::graph::{NetInstance, RoutingGraph};
use crate::topology::{path_shares, penalty_length, PlanarTree, TopoKind, Topology};

use super::l1::l1_tree;

/// Shallow-light topology: starts from the L1 Steiner tree and reconnects
/// every sink whose root path (plus its bifurcation penalties converted to
/// length) exceeds `(1 + epsilon)` times its L1 distance to the root
/// directly to the root. A reverse pass then restores removed connections
/// where that shortens the tree without creating new violations.
pub fn shallow_light_topology(graph: &RoutingGraph, net: &NetInstance, epsilon: f64) -> Result<Topology> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    net.validate(graph)?;
    let mut tree = l1_tree(graph, net);
    let pl = penalty_length(graph, net);

    let preorder = preorder(&tree);
    let mut cuts = Vec::new();
    for v in preorder {
        if !matches!(tree.kind[v], TopoKind::Sink(_)) {
            continue;
        }
        let parent = tree.rooted().0[v];
        if parent == 0 {
            continue;
        }
        let excess = excess(&tree, net, pl, epsilon);
        if excess[v] > 0.0 {
            tree.unlink(v, parent);
            tree.link(0, v);
            cuts.push((v, parent));
        }
    }

    for &(v, old) in cuts.iter().rev() {
        if tree.dist(old, v) >= tree.dist(0, v) {
            continue;
        }
        let before = excess(&tree, net, pl, epsilon);
        tree.unlink(0, v);
        tree.link(old, v);
        let after = excess(&tree, net, pl, epsilon);
        let planar_ok = planar_excess(&tree, epsilon).iter().all(|&e| e <= 0.0);
        let no_new = before.iter().zip(&after).all(|(&b, &a)| a <= 0.0 || a <= b);
        if !(planar_ok && no_new) {
            tree.unlink(old, v);
            tree.link(0, v);
        }
    }
    Ok(tree.normalize(net))
}

/// Depth-first preorder from the root, children in ascending id order.
fn preorder(tree: &PlanarTree) -> Vec<usize> {
    let (parent, _) = tree.rooted();
    let mut out = Vec::with_capacity(tree.len());
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        out.push(v);
        let mut kids: Vec<usize> = tree.adj[v].iter().copied().filter(|&c| parent[c] == v).collect();
        kids.sort_unstable_by(|a, b| b.cmp(a));
        stack.extend(kids);
    }
    out
}

fn root_distances(tree: &PlanarTree) -> Vec<i64> {
    let (parent, order) = tree.rooted();
    let mut d = vec![0; tree.len()];
    for &v in &order[1..] {
        d[v] = d[parent[v]] + tree.dist(parent[v], v);
    }
    d
}

/// Per node: how far a sink's path length exceeds its bound (non-positive
/// when satisfied, 0 for other nodes), penalties included.
fn excess(tree: &PlanarTree, net: &NetInstance, pl: f64, epsilon: f64) -> Vec<f64> {
    let d = root_distances(tree);
    let (_, leaf) = path_shares(tree, net);
    (0..tree.len())
        .map(|v| match tree.kind[v] {
            TopoKind::Sink(_) => {
                d[v] as f64 + pl * leaf[v] - (1.0 + epsilon) * tree.dist(0, v) as f64
            }
            _ => 0.0,
        })
        .collect()
}

fn planar_excess(tree: &PlanarTree, epsilon: f64) -> Vec<f64> {
    let d = root_distances(tree);
    (0..tree.len())
        .map(|v| match tree.kind[v] {
            TopoKind::Sink(_) => d[v] as f64 - (1.0 + epsilon) * tree.dist(0, v) as f64,
            _ => 0.0,
        })
        .collect()
}
