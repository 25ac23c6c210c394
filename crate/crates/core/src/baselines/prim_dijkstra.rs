use crate::error::{Error, Result};
use crate::graph::{NetInstance, RoutingGraph};
use crate::penalty::optimal_lambda;
use crate::topology::{path_shares, penalty_length, PlanarTree, TopoKind, Topology};

#[derive(Clone, Copy)]
enum Attach {
    Node(usize),
    /// Split the edge `(parent, child)` at the given point.
    Split(usize, usize, (i32, i32)),
}

/// Prim-Dijkstra tradeoff: grows the tree from the root, each time adding
/// the sink and attachment point minimizing
/// `(1 - gamma) * added length + gamma * root path length`, where the path
/// length includes the new bifurcation penalty converted to length.
/// Attachment points are tree nodes or the point of an edge's bounding box
/// closest to the sink.
pub fn prim_dijkstra_topology(graph: &RoutingGraph, net: &NetInstance, gamma: f64) -> Result<Topology> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma out of [0, 1]: {gamma}")));
    }
    net.validate(graph)?;
    let pl = penalty_length(graph, net);
    let mut tree = PlanarTree::terminals(graph, net);
    let k = net.sinks.len();
    let mut connected = vec![false; k];
    let l1 = |p: (i32, i32), q: (i32, i32)| i64::from((p.0 - q.0).abs() + (p.1 - q.1).abs());

    for _ in 0..k {
        let (parent, order) = tree.rooted();
        let mut depth = vec![0i64; tree.len()];
        let mut weight = vec![0.0; tree.len()];
        for &v in &order[1..] {
            depth[v] = depth[parent[v]] + tree.dist(parent[v], v);
        }
        for &v in order.iter().rev() {
            if let TopoKind::Sink(s) = tree.kind[v] {
                weight[v] += net.sinks[s].weight;
            }
            if v != 0 {
                let w = weight[v];
                weight[parent[v]] += w;
            }
        }
        let (share, _) = path_shares(&tree, net);
        let mut nodes = order.clone();
        nodes.sort_unstable();

        let mut best: Option<(f64, usize, Attach)> = None;
        for s in (0..k).filter(|&s| !connected[s]) {
            let sn = s + 1;
            let ws = net.sinks[s].weight;
            let split_share = |w_other: f64| {
                if w_other > 0.0 {
                    optimal_lambda(ws, w_other, net.eta).expect("eta validated").0
                } else {
                    0.0
                }
            };
            let mut consider = |score: f64, a: Attach| {
                if best.as_ref().is_none_or(|b| score < b.0) {
                    best = Some((score, s, a));
                }
            };
            for &n in &nodes {
                let added = tree.dist(n, sn) as f64;
                let path = (depth[n] as f64) + added + pl * (share[n] + split_share(weight[n]));
                consider((1.0 - gamma) * added + gamma * path, Attach::Node(n));
            }
            for &c in &nodes {
                if c == 0 {
                    continue;
                }
                let p = parent[c];
                let (pp, pc, ps) = (tree.pos[p], tree.pos[c], tree.pos[sn]);
                let q = (ps.0.clamp(pp.0.min(pc.0), pp.0.max(pc.0)), ps.1.clamp(pp.1.min(pc.1), pp.1.max(pc.1)));
                if q == pp || q == pc {
                    continue;
                }
                let added = l1(q, ps) as f64;
                let path = (depth[p] + l1(pp, q)) as f64 + added + pl * (share[c] + split_share(weight[c]));
                consider((1.0 - gamma) * added + gamma * path, Attach::Split(p, c, q));
            }
        }
        let (_, s, attach) = best.expect("an unconnected sink remains");
        connected[s] = true;
        match attach {
            Attach::Node(n) => tree.link(n, s + 1),
            Attach::Split(p, c, q) => {
                let m = tree.add(q, TopoKind::Steiner);
                tree.unlink(p, c);
                tree.link(p, m);
                tree.link(m, c);
                tree.link(m, s + 1);
            }
        }
    }
    Ok(tree.normalize(net))
}
