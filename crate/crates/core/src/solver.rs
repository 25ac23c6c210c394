//! The cost-distance merging algorithm.
//!
//! Every unconnected terminal runs a shortest path search with its own
//! length function. In each iteration the pair with the smallest connection
//! value (path length plus bifurcation penalty) is merged: either a terminal
//! is joined to the root, or two terminals are replaced by a new Steiner
//! terminal carrying their combined weight.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dijkstra::cost_distance_sssp;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, NetInstance, RoutingGraph, VertexId};
use crate::penalty::{merge_penalty, MergePartner, PenaltyParams};
use crate::search::{
    ComponentId, EngineConfig, FutureCostTables, Hit, SearchEngine, SearchStats, SourceSpec, Target, TerminalId,
    ROOT_TERMINAL,
};
use crate::tree::{EmbeddedTree, NodeRole, TreeArc, TreeNode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Connections into a terminal's own tree component pay delay only.
    pub discount_components: bool,
    pub two_level_heap: bool,
    pub astar: bool,
    /// Move a new Steiner terminal along its connecting path to where the
    /// estimated remaining cost is smallest.
    pub reposition_steiner: bool,
    /// Credit root connections with the bifurcation penalty they save.
    pub root_bonus: bool,
    pub landmark_count: usize,
    pub rng_seed: u64,
    /// Use exact distances to the root instead of the landmark estimate when
    /// repositioning. Only meant for tests.
    #[serde(skip)]
    #[doc(hidden)]
    pub exact_reposition: bool,
    #[serde(skip)]
    #[doc(hidden)]
    pub heuristic_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::all(true)
    }
}

impl SolverConfig {
    /// Every enhancement switched on (`true`) or off (`false`).
    pub fn all(on: bool) -> Self {
        Self {
            discount_components: on,
            two_level_heap: on,
            astar: on,
            reposition_steiner: on,
            root_bonus: on,
            landmark_count: 8,
            rng_seed: 0,
            exact_reposition: false,
            heuristic_scale: 1.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }
}

/// One active terminal as seen at the start of an iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActiveTerminal {
    pub id: TerminalId,
    pub position: VertexId,
    pub weight: f64,
}

/// What happened in one merge iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    /// Active non-root terminals before the merge, by id.
    pub active: Vec<ActiveTerminal>,
    pub u: TerminalId,
    /// Partner terminal, or `ROOT_TERMINAL`.
    pub v: TerminalId,
    pub value: f64,
    pub distance: f64,
    pub penalty: f64,
    /// Vertex where the new Steiner terminal was placed; the root position
    /// for root merges.
    pub position: VertexId,
    /// Connection cost plus merged-weight delay of the added wiring, with
    /// the delay of each side charged at its own terminal weight.
    pub contribution: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub tree: EmbeddedTree,
    pub trace: Vec<IterationTrace>,
    pub stats: SearchStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectedCost {
    pub trials: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
}

pub fn solve(graph: &RoutingGraph, net: &NetInstance, config: &SolverConfig) -> Result<EmbeddedTree> {
    Ok(solve_traced(graph, net, config)?.tree)
}

/// Runs `solve` with seeds `rng_seed .. rng_seed + trials` and summarizes the
/// objective values.
pub fn solve_expected(
    graph: &RoutingGraph,
    net: &NetInstance,
    config: &SolverConfig,
    trials: usize,
) -> Result<ExpectedCost> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for i in 0..trials {
        let c = config.with_seed(config.rng_seed.wrapping_add(i as u64));
        let total = solve(graph, net, &c)?.cost.total;
        sum += total;
        max = max.max(total);
        min = min.min(total);
    }
    Ok(ExpectedCost {
        trials,
        mean: sum / trials as f64,
        max,
        min,
    })
}

const ROOT_COMPONENT: ComponentId = ROOT_TERMINAL;

#[derive(Clone, Debug)]
struct BuildNode {
    role: NodeRole,
    position: VertexId,
    component: ComponentId,
    edges: Vec<usize>,
}

/// Undirected tree edge; `walk` leads from `a`'s position to `b`'s.
#[derive(Clone, Debug)]
struct BuildEdge {
    a: usize,
    b: usize,
    walk: Vec<EdgeId>,
    component: ComponentId,
}

#[derive(Clone, Debug, Default)]
struct Component {
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

/// The partial tree as a forest of undirected components.
struct Forest<'g> {
    graph: &'g RoutingGraph,
    nodes: Vec<BuildNode>,
    edges: Vec<BuildEdge>,
    components: BTreeMap<ComponentId, Component>,
}

impl<'g> Forest<'g> {
    fn new(graph: &'g RoutingGraph, net: &NetInstance) -> Self {
        let mut f = Self {
            graph,
            nodes: Vec::new(),
            edges: Vec::new(),
            components: BTreeMap::new(),
        };
        f.add_node(NodeRole::Root, net.root, ROOT_COMPONENT);
        for (i, s) in net.sinks.iter().enumerate() {
            f.add_node(NodeRole::Sink(i), s.vertex, i);
        }
        f
    }

    fn add_node(&mut self, role: NodeRole, position: VertexId, component: ComponentId) -> usize {
        let id = self.nodes.len();
        self.nodes.push(BuildNode { role, position, component, edges: Vec::new() });
        self.components.entry(component).or_default().nodes.push(id);
        id
    }

    fn add_edge(&mut self, a: usize, b: usize, walk: Vec<EdgeId>) -> usize {
        let component = self.nodes[a].component;
        debug_assert_eq!(component, self.nodes[b].component);
        let id = self.edges.len();
        self.edges.push(BuildEdge { a, b, walk, component });
        self.nodes[a].edges.push(id);
        self.nodes[b].edges.push(id);
        self.components.entry(component).or_default().edges.push(id);
        id
    }

    fn degree(&self, n: usize) -> usize {
        self.nodes[n].edges.len()
    }

    /// Moves everything of component `from` into `into`.
    fn absorb(&mut self, into: ComponentId, from: ComponentId) {
        if into == from {
            return;
        }
        let moved = self.components.remove(&from).unwrap_or_default();
        for &n in &moved.nodes {
            self.nodes[n].component = into;
        }
        for &e in &moved.edges {
            self.edges[e].component = into;
        }
        let target = self.components.entry(into).or_default();
        target.nodes.extend(moved.nodes);
        target.edges.extend(moved.edges);
    }

    /// Graph edges and vertices covered by a component.
    fn footprint(&self, c: ComponentId) -> (Vec<EdgeId>, Vec<VertexId>) {
        let comp = &self.components[&c];
        let mut edges = Vec::new();
        let mut vertices: Vec<VertexId> = comp.nodes.iter().map(|&n| self.nodes[n].position).collect();
        for &e in &comp.edges {
            let be = &self.edges[e];
            edges.extend_from_slice(&be.walk);
            vertices.extend(self.graph.walk_vertices(self.nodes[be.a].position, &be.walk));
        }
        edges.sort_unstable();
        edges.dedup();
        vertices.sort_unstable();
        vertices.dedup();
        (edges, vertices)
    }

    /// Returns a node at vertex `x` in component `c` that can take one more
    /// tree edge, creating a Steiner node if necessary.
    fn attach_point(&mut self, c: ComponentId, x: VertexId) -> usize {
        let comp = &self.components[&c];
        let at_x: Vec<usize> = comp.nodes.iter().copied().filter(|&n| self.nodes[n].position == x).collect();
        if let Some(&n) = at_x
            .iter()
            .find(|&&n| self.nodes[n].role == NodeRole::Steiner && self.degree(n) <= 2)
        {
            return n;
        }
        if let Some(&n) = at_x.iter().find(|&&n| self.degree(n) == 0) {
            return n;
        }
        if at_x.is_empty() {
            // x lies inside the walk of some edge: split it there
            let split = comp.edges.iter().copied().find_map(|e| {
                let be = &self.edges[e];
                let vs = self.graph.walk_vertices(self.nodes[be.a].position, &be.walk);
                (1..vs.len().saturating_sub(1)).find(|&k| vs[k] == x).map(|k| (e, k))
            });
            let (e, k) = split.expect("attachment vertex belongs to the component");
            return self.split_edge(e, k);
        }
        // Every node at x is saturated: a new Steiner node takes over one
        // edge of the first of them.
        let n = at_x[0];
        let e = self.nodes[n].edges[0];
        let s = self.add_node(NodeRole::Steiner, x, c);
        let be = &mut self.edges[e];
        if be.a == n {
            be.a = s;
        } else {
            be.b = s;
        }
        self.nodes[n].edges.retain(|&k| k != e);
        self.nodes[s].edges.push(e);
        self.add_edge(n, s, Vec::new());
        s
    }

    /// Splits edge `e` after the first `k` graph edges of its walk.
    fn split_edge(&mut self, e: usize, k: usize) -> usize {
        let (a, b, walk, c) = {
            let be = &self.edges[e];
            (be.a, be.b, be.walk.clone(), be.component)
        };
        let x = self.graph.walk_end(self.nodes[a].position, &walk[..k]).expect("valid walk");
        let s = self.add_node(NodeRole::Steiner, x, c);
        self.edges[e].walk = walk[..k].to_vec();
        self.edges[e].b = s;
        self.nodes[b].edges.retain(|&k| k != e);
        self.nodes[s].edges.push(e);
        self.add_edge(s, b, walk[k..].to_vec());
        s
    }

    /// Orients the finished tree from the root, drops Steiner leaves and
    /// splices out Steiner nodes with a single child.
    fn into_tree(self, net: &NetInstance) -> Result<EmbeddedTree> {
        let graph = self.graph;
        let n = self.nodes.len();
        let mut parent = vec![usize::MAX; n];
        let mut parent_walk: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut order = vec![0usize];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &e in &self.nodes[v].edges {
                let be = &self.edges[e];
                let (w, walk) = if be.a == v {
                    (be.b, be.walk.clone())
                } else {
                    let mut r = be.walk.clone();
                    r.reverse();
                    (be.a, r)
                };
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                parent[w] = v;
                parent_walk[w] = walk;
                children[v].push(w);
                order.push(w);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidTree("merged forest is not connected".into()));
        }

        // Bottom-up cleanup of Steiner nodes.
        let mut removed = vec![false; n];
        for &v in order.iter().rev() {
            if self.nodes[v].role != NodeRole::Steiner {
                continue;
            }
            let kids: Vec<usize> = children[v].iter().copied().filter(|&c| !removed[c]).collect();
            match kids.len() {
                0 => removed[v] = true,
                1 => {
                    let c = kids[0];
                    let mut walk = std::mem::take(&mut parent_walk[v]);
                    walk.extend_from_slice(&parent_walk[c]);
                    parent_walk[c] = walk;
                    parent[c] = parent[v];
                    let p = parent[v];
                    children[p].push(c);
                    removed[v] = true;
                }
                _ => {}
            }
            children[v].retain(|&c| !removed[c]);
        }

        let mut index = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for &v in &order {
            if !removed[v] {
                index[v] = nodes.len();
                nodes.push(TreeNode {
                    role: self.nodes[v].role,
                    position: self.nodes[v].position,
                    weight: 0.0,
                });
            }
        }
        let mut arcs = Vec::new();
        for &v in &order[1..] {
            if removed[v] {
                continue;
            }
            arcs.push(TreeArc {
                parent: index[parent[v]],
                child: index[v],
                walk: std::mem::take(&mut parent_walk[v]),
                lambda: 0.0,
            });
        }
        EmbeddedTree::assemble(graph, net, nodes, arcs)
    }
}

#[derive(Clone, Copy, Debug)]
struct Active {
    position: VertexId,
    weight: f64,
}

/// Runs the merging algorithm and reports every iteration.
pub fn solve_traced(graph: &RoutingGraph, net: &NetInstance, config: &SolverConfig) -> Result<Solution> {
    net.validate(graph)?;
    if config.landmark_count == 0 {
        return Err(Error::Parameter("landmark_count must be at least 1".into()));
    }
    let tables = if config.astar || config.reposition_steiner {
        Some(FutureCostTables::build(graph, config.landmark_count, config.rng_seed)?)
    } else {
        None
    };
    let discount = config.discount_components;
    let mut engine = SearchEngine::new(
        graph,
        tables.as_ref(),
        EngineConfig {
            two_level_heap: config.two_level_heap,
            astar: config.astar,
            discount,
            heuristic_scale: config.heuristic_scale,
        },
    );
    let params = PenaltyParams {
        d_bif: net.d_bif,
        eta: net.eta,
        root_bonus: config.root_bonus,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut forest = Forest::new(graph, net);
    let mut active: BTreeMap<TerminalId, Active> = BTreeMap::new();
    for (i, s) in net.sinks.iter().enumerate() {
        active.insert(i, Active { position: s.vertex, weight: s.weight });
    }
    if discount {
        for c in std::iter::once(ROOT_COMPONENT).chain(0..net.sinks.len()) {
            let (e, v) = forest.footprint(c);
            engine.add_component(c, &e, &v);
        }
    }
    for (&id, a) in &active {
        engine.add_source(SourceSpec {
            id,
            weight: a.weight,
            seeds: vec![a.position],
            component: discount.then_some(id),
        })?;
    }

    let mut next_id = net.sinks.len();
    let mut trace = Vec::with_capacity(net.sinks.len());
    let mut active_weight: f64 = net.total_weight();
    let mut iteration = 0;
    while !active.is_empty() {
        let mut targets: Vec<Target> = Vec::with_capacity(active.len() + 1);
        targets.push(Target {
            id: ROOT_TERMINAL,
            vertex: net.root,
            component: discount.then_some(ROOT_COMPONENT),
        });
        for (&id, a) in &active {
            targets.push(Target {
                id,
                vertex: a.position,
                component: discount.then_some(id),
            });
        }
        let snapshot: Vec<ActiveTerminal> = active
            .iter()
            .map(|(&id, a)| ActiveTerminal { id, position: a.position, weight: a.weight })
            .collect();
        let weights = &active;
        let total = active_weight;
        let penalty = |s: usize, t: &Target| -> Option<f64> {
            let ws = weights.get(&s)?.weight;
            if t.id == ROOT_TERMINAL {
                return Some(merge_penalty(ws, MergePartner::Root { remaining_weight: total - ws }, &params));
            }
            let wt = weights.get(&t.id)?.weight;
            (t.id != s && ws <= wt).then(|| merge_penalty(ws, MergePartner::Terminal(wt), &params))
        };
        let hit = engine.advance_until_hit(&targets, &penalty)?;
        let u = hit.source;
        let v = hit.target;
        let au = active[&u];

        let vertices = graph.walk_vertices(hit.start_vertex, &hit.path);
        let own: HashSet<VertexId> = if discount {
            engine.component_vertices(u).unwrap_or(&[]).iter().copied().collect()
        } else {
            HashSet::new()
        };
        let xi = (0..=hit.tag_start).rev().find(|&i| own.contains(&vertices[i])).unwrap_or(0);
        let yi = hit.tag_start.max(xi);

        let record = |position: VertexId, contribution: f64| IterationTrace {
            iteration,
            active: snapshot.clone(),
            u,
            v,
            value: hit.value,
            distance: hit.distance,
            penalty: hit.penalty,
            position,
            contribution,
        };

        if v == ROOT_TERMINAL {
            let seg = hit.path[xi..yi].to_vec();
            let contribution = graph.walk_cost(&seg) + au.weight * graph.walk_delay(&seg);
            let a = forest.attach_point(u, vertices[xi]);
            let b = forest.attach_point(ROOT_COMPONENT, vertices[yi]);
            forest.absorb(ROOT_COMPONENT, u);
            forest.add_edge(a, b, seg);
            engine.retire_source(u)?;
            active.remove(&u);
            active_weight -= au.weight;
            if discount {
                engine.remove_component(u);
                let (e, vs) = forest.footprint(ROOT_COMPONENT);
                engine.add_component(ROOT_COMPONENT, &e, &vs);
            }
            trace.push(record(net.root, contribution));
        } else {
            let av = active[&v];
            let w = au.weight + av.weight;
            let draw: f64 = rng.random();
            let p = if draw < au.weight / w { au.position } else { av.position };
            let s = next_id;
            next_id += 1;

            // Attach on both sides before the components are merged, so an
            // attachment never lands on the other side's nodes.
            let a = forest.attach_point(u, vertices[xi]);
            let mut position = p;
            let contribution;
            if config.reposition_steiner {
                let j = reposition(graph, net, &hit, &vertices, xi, yi, au.weight, av.weight, w, tables.as_ref(), config);
                position = vertices[j];
                let u_side = hit.path[xi..j].to_vec();
                let along = &hit.path[j..yi];
                let along_len = graph.walk_cost(along) + av.weight * graph.walk_delay(along);
                // v's own search may already know a cheaper way to the new
                // Steiner position
                let settled = if hit.tag_start == hit.path.len() {
                    engine.settled_path(v, position).filter(|(d, _)| *d < along_len)
                } else {
                    None
                };
                let (b, v_side) = match settled {
                    Some((_, path)) => {
                        let from = path.iter().rev().fold(position, |at, &e| graph.edge(e).other(at));
                        let vs = graph.walk_vertices(from, &path);
                        let v_own: HashSet<VertexId> = if discount {
                            engine.component_vertices(v).unwrap_or(&[]).iter().copied().collect()
                        } else {
                            HashSet::new()
                        };
                        let k = (0..vs.len()).rev().find(|&i| v_own.contains(&vs[i])).unwrap_or(0);
                        let mut walk = path[k..].to_vec();
                        walk.reverse();
                        (forest.attach_point(v, vs[k]), walk)
                    }
                    None => (forest.attach_point(v, vertices[yi]), along.to_vec()),
                };
                contribution = graph.walk_cost(&u_side)
                    + au.weight * graph.walk_delay(&u_side)
                    + graph.walk_cost(&v_side)
                    + av.weight * graph.walk_delay(&v_side);
                forest.absorb(s, u);
                forest.absorb(s, v);
                let mid = forest.add_node(NodeRole::Steiner, position, s);
                forest.add_edge(a, mid, u_side);
                forest.add_edge(mid, b, v_side);
            } else {
                let b = forest.attach_point(v, vertices[yi]);
                let seg = hit.path[xi..yi].to_vec();
                let (d_u, d_v) = if p == au.position {
                    (0.0, graph.walk_delay(&seg))
                } else {
                    (graph.walk_delay(&seg), 0.0)
                };
                contribution = graph.walk_cost(&seg) + au.weight * d_u + av.weight * d_v;
                forest.absorb(s, u);
                forest.absorb(s, v);
                forest.add_edge(a, b, seg);
            }
            engine.retire_source(u)?;
            engine.retire_source(v)?;
            active.remove(&u);
            active.remove(&v);
            active.insert(s, Active { position, weight: w });
            if discount {
                engine.remove_component(u);
                engine.remove_component(v);
                let (e, vs) = forest.footprint(s);
                engine.add_component(s, &e, &vs);
            }
            let seeds = if discount {
                engine.component_vertices(s).map(<[VertexId]>::to_vec).unwrap_or_default()
            } else {
                vec![position]
            };
            engine.add_source(SourceSpec {
                id: s,
                weight: w,
                seeds,
                component: discount.then_some(s),
            })?;
            trace.push(record(position, contribution));
        }
        iteration += 1;
    }

    let stats = engine.stats();
    drop(engine);
    let tree = forest.into_tree(net)?;
    Ok(Solution { tree, trace, stats })
}

/// Picks the vertex of the added path segment `vertices[xi..=yi]` that
/// minimizes the wiring delay to both merged terminals plus an estimate of
/// the remaining connection to the root.
#[allow(clippy::too_many_arguments)]
fn reposition(
    graph: &RoutingGraph,
    net: &NetInstance,
    hit: &Hit,
    vertices: &[VertexId],
    xi: usize,
    yi: usize,
    w_u: f64,
    w_v: f64,
    w: f64,
    tables: Option<&FutureCostTables>,
    config: &SolverConfig,
) -> usize {
    let exact = config
        .exact_reposition
        .then(|| cost_distance_sssp(graph, net.root, w).dist);
    // delay prefix sums along the full hit path
    let mut prefix = vec![0.0; hit.path.len() + 1];
    for (i, &e) in hit.path.iter().enumerate() {
        prefix[i + 1] = prefix[i] + graph.edge(e).delay;
    }
    let end = prefix[hit.path.len()];
    let mut best = (f64::INFINITY, xi);
    for j in xi..=yi {
        let q = vertices[j];
        let future = match (&exact, tables) {
            (Some(d), _) => d[q],
            (None, Some(t)) => t.lower_bound(w, q, net.root),
            (None, None) => 0.0,
        };
        let score = future + w_u * (prefix[j] - prefix[xi]) + w_v * (end - prefix[j]);
        if score < best.0 {
            best = (score, j);
        }
    }
    best.1
}
