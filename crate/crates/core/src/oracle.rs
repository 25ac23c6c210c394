//! Reference implementations for small instances: exact optimum by
//! topology enumeration, the pairwise merge values, and the metric-closure
//! spanning tree.

use crate::baselines::embed_topology;
use crate::dijkstra::{cost_distance_sssp, Key};
use crate::error::{Error, Result};
use crate::graph::{NetInstance, RoutingGraph, VertexId};
use crate::penalty::{merge_penalty, MergePartner, PenaltyParams};
use crate::search::{TerminalId, ROOT_TERMINAL};
use crate::solver::ActiveTerminal;
use crate::topology::{TopoKind, TopoNode, Topology};
use crate::tree::EmbeddedTree;

/// Largest sink count accepted by [`exact_opt`].
pub const EXACT_MAX_SINKS: usize = 4;

/// All bifurcation-compatible tree shapes on the root and `sink_count` sinks,
/// each exactly once: `(2k - 5)!!` shapes for `k = sink_count + 1 >= 3`
/// leaves. Node `0` is the root, nodes `1..=sink_count` are the sinks and
/// the remaining nodes are Steiner points. Coordinates are left at zero.
pub fn enumerate_topologies(sink_count: usize) -> Result<Vec<Topology>> {
    if !(1..=5).contains(&sink_count) {
        return Err(Error::Parameter(format!("sink count must be in 1..=5, got {sink_count}")));
    }
    let k = sink_count;
    // unrooted edge lists, grown by inserting one leaf at a time
    let mut shapes: Vec<Vec<(usize, usize)>> = if k == 1 {
        vec![vec![(0, 1)]]
    } else {
        vec![vec![(0, k + 1), (1, k + 1), (2, k + 1)]]
    };
    for leaf in 3..=k {
        let inner = k + leaf - 1;
        let mut next = Vec::with_capacity(shapes.len() * (2 * leaf - 3));
        for shape in &shapes {
            for (i, &(a, b)) in shape.iter().enumerate() {
                let mut s = shape.clone();
                s[i] = (a, inner);
                s.push((inner, b));
                s.push((inner, leaf));
                next.push(s);
            }
        }
        shapes = next;
    }
    Ok(shapes.iter().map(|s| orient(k, s)).collect())
}

fn orient(k: usize, edges: &[(usize, usize)]) -> Topology {
    let count = edges.len() + 1;
    let mut adj = vec![Vec::new(); count];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let nodes = (0..count)
        .map(|id| TopoNode {
            id,
            x: 0,
            y: 0,
            kind: match id {
                0 => TopoKind::Root,
                i if i <= k => TopoKind::Sink(i - 1),
                _ => TopoKind::Steiner,
            },
        })
        .collect();
    let mut out = Vec::with_capacity(edges.len());
    let mut seen = vec![false; count];
    seen[0] = true;
    let mut queue = vec![0];
    while let Some(v) = queue.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                out.push((v, w));
                queue.push(w);
            }
        }
    }
    Topology { nodes, edges: out }
}

/// Minimum objective value over all trees, by optimal embedding of every
/// shape. Ties go to the first shape in enumeration order.
pub fn exact_opt(graph: &RoutingGraph, net: &NetInstance) -> Result<(EmbeddedTree, f64)> {
    net.validate(graph)?;
    let k = net.sinks.len();
    if k > EXACT_MAX_SINKS {
        return Err(Error::TooLarge(format!("{k} sinks, at most {EXACT_MAX_SINKS} supported")));
    }
    if k == 0 {
        let topo = Topology {
            nodes: vec![TopoNode { id: 0, x: 0, y: 0, kind: TopoKind::Root }],
            edges: Vec::new(),
        };
        return embed_topology(graph, net, &topo);
    }
    let mut best: Option<(EmbeddedTree, f64)> = None;
    for topo in enumerate_topologies(k)? {
        let (tree, value) = embed_topology(graph, net, &topo)?;
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((tree, value));
        }
    }
    Ok(best.expect("at least one shape"))
}

/// Merge values `L(u, v)` for one iteration's active terminals.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseL {
    pub active: Vec<ActiveTerminal>,
    /// `pair[i][j]` for active terminals `i != j`; symmetric.
    pub pair: Vec<Vec<f64>>,
    /// Value of connecting terminal `i` to the root.
    pub root: Vec<f64>,
}

/// One Dijkstra per pair with length `c + min(w(u), w(v)) d` plus the
/// merge penalty, and per terminal with `c + w(u) d` to the root.
pub fn pairwise_l_reference(
    graph: &RoutingGraph,
    root: VertexId,
    active: &[ActiveTerminal],
    params: &PenaltyParams,
) -> PairwiseL {
    let m = active.len();
    let total: f64 = active.iter().map(|a| a.weight).sum();
    let mut pair = vec![vec![f64::INFINITY; m]; m];
    let mut to_root = vec![f64::INFINITY; m];
    for i in 0..m {
        let u = active[i];
        let sp = cost_distance_sssp(graph, u.position, u.weight);
        let b = merge_penalty(u.weight, MergePartner::Root { remaining_weight: total - u.weight }, params);
        to_root[i] = sp.dist[root] + b;
        for j in i + 1..m {
            let v = active[j];
            let w = u.weight.min(v.weight);
            let d = cost_distance_sssp(graph, u.position, w).dist[v.position];
            let value = d + merge_penalty(u.weight, MergePartner::Terminal(v.weight), params);
            pair[i][j] = value;
            pair[j][i] = value;
        }
    }
    PairwiseL { active: active.to_vec(), pair, root: to_root }
}

impl PairwiseL {
    /// The pair the solver must pick: minimum value, then the searching
    /// (lighter) terminal's id, the target's vertex and the target's id.
    /// Equal weights let either side search.
    pub fn choice(&self, root: VertexId) -> Option<(TerminalId, TerminalId, f64)> {
        let mut best: Option<(Key, TerminalId, VertexId, TerminalId)> = None;
        let mut consider = |c: (Key, TerminalId, VertexId, TerminalId)| {
            if best.is_none_or(|b| c < b) {
                best = Some(c);
            }
        };
        for (i, u) in self.active.iter().enumerate() {
            consider((Key(self.root[i]), u.id, root, ROOT_TERMINAL));
            for (j, v) in self.active.iter().enumerate() {
                if i != j && u.weight <= v.weight {
                    consider((Key(self.pair[i][j]), u.id, v.position, v.id));
                }
            }
        }
        best.map(|b| (b.1, b.3, b.0 .0))
    }
}

/// Weight of a minimum spanning tree of the terminals' metric closure under
/// `c + weight d`.
pub fn metric_closure_mst(graph: &RoutingGraph, terminals: &[VertexId], weight: f64) -> f64 {
    let k = terminals.len();
    if k < 2 {
        return 0.0;
    }
    let dist: Vec<Vec<f64>> = terminals
        .iter()
        .map(|&t| {
            let sp = cost_distance_sssp(graph, t, weight);
            terminals.iter().map(|&s| sp.dist[s]).collect()
        })
        .collect();
    let mut in_tree = vec![false; k];
    let mut best = dist[0].clone();
    in_tree[0] = true;
    let mut total = 0.0;
    for _ in 1..k {
        let i = (0..k)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b)))
            .expect("terminal left");
        in_tree[i] = true;
        total += best[i];
        for j in 0..k {
            if !in_tree[j] && dist[i][j] < best[j] {
                best[j] = dist[i][j];
            }
        }
    }
    total
}
