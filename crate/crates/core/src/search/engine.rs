//! Simultaneous Dijkstra searches, one per live source, each with its own
//! length function `l_u(e) = c(e) + w(u) d(e)`.
//!
//! Labels persist across calls to [`SearchEngine::advance_until_hit`]; a
//! source's labels are only discarded when it is retired or, with component
//! discounting, when a changed component overlaps vertices it has reached.
//! Target penalties are evaluated at hit time, never cached in labels.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use crate::dijkstra::Key;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, RoutingGraph, VertexId};

use super::future::FutureCostTables;

pub type SourceId = usize;
pub type TerminalId = usize;
pub type ComponentId = usize;

/// Terminal id reserved for the root.
pub const ROOT_TERMINAL: TerminalId = usize::MAX;

const NO_PARENT: u32 = u32::MAX;
const UNREACHED: u8 = 0;
const OPEN: u8 = 1;
const DONE: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub two_level_heap: bool,
    pub astar: bool,
    /// Zero congestion cost on the searching source's own component and,
    /// for labels tagged with it, on the target's component.
    pub discount: bool,
    /// Multiplies the A* heuristic. Anything above 1 breaks admissibility;
    /// only used to check that the verification suites notice.
    pub heuristic_scale: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            two_level_heap: true,
            astar: false,
            discount: false,
            heuristic_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub id: SourceId,
    pub weight: f64,
    /// Vertices labeled with distance 0.
    pub seeds: Vec<VertexId>,
    /// The source's own tree component; its edges cost only `w * d` under
    /// discounting.
    pub component: Option<ComponentId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Target {
    pub id: TerminalId,
    pub vertex: VertexId,
    /// Tree component the target belongs to (used with discounting).
    pub component: Option<ComponentId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hit {
    pub source: SourceId,
    pub target: TerminalId,
    pub target_vertex: VertexId,
    /// Path length plus penalty.
    pub value: f64,
    pub distance: f64,
    pub penalty: f64,
    /// Seed the path starts from.
    pub start_vertex: VertexId,
    pub path: Vec<EdgeId>,
    /// Index into `path` where the label switched to the target's
    /// component (`path.len()` if it never did).
    pub tag_start: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub labels_scanned: u64,
    pub heap_pushes: u64,
    pub heap_pops: u64,
    pub restarts: u64,
    pub rekeys: u64,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    key: Key,
    source: SourceId,
    vertex: VertexId,
    /// `None` for plain labels, else the target component a tagged label runs in.
    tag: Option<ComponentId>,
    g: f64,
}

impl Entry {
    fn rank(&self) -> (Key, SourceId, VertexId, Option<ComponentId>) {
        (self.key, self.source, self.vertex, self.tag)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.rank() == other.rank()
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

type MinHeap<T> = BinaryHeap<Reverse<T>>;

/// A single global heap, or one heap per source plus a top-level heap over
/// the per-source minima. Both extract in identical order.
enum Queue {
    Single(MinHeap<Entry>),
    TwoLevel {
        heaps: Vec<MinHeap<Entry>>,
        top: MinHeap<(Key, SourceId)>,
        registered: Vec<Option<Key>>,
        current: Option<SourceId>,
    },
}

impl Queue {
    fn new(two_level: bool) -> Self {
        if two_level {
            Queue::TwoLevel {
                heaps: Vec::new(),
                top: BinaryHeap::new(),
                registered: Vec::new(),
                current: None,
            }
        } else {
            Queue::Single(BinaryHeap::new())
        }
    }

    fn ensure(&mut self, s: SourceId) {
        if let Queue::TwoLevel { heaps, registered, .. } = self {
            if heaps.len() <= s {
                heaps.resize_with(s + 1, BinaryHeap::new);
                registered.resize(s + 1, None);
            }
        }
    }

    fn push(&mut self, e: Entry) {
        match self {
            Queue::Single(h) => h.push(Reverse(e)),
            Queue::TwoLevel {
                heaps,
                top,
                registered,
                current,
            } => {
                heaps[e.source].push(Reverse(e));
                if *current != Some(e.source) && registered[e.source].is_none_or(|k| e.key < k) {
                    registered[e.source] = Some(e.key);
                    top.push(Reverse((e.key, e.source)));
                }
            }
        }
    }

    fn peek(&mut self, stale: impl Fn(&Entry) -> bool) -> Option<Entry> {
        match self {
            Queue::Single(h) => {
                while let Some(Reverse(e)) = h.peek() {
                    if stale(e) {
                        h.pop();
                    } else {
                        return Some(*e);
                    }
                }
                None
            }
            Queue::TwoLevel {
                heaps,
                top,
                registered,
                current,
            } => loop {
                // drop registrations that no longer describe a source minimum
                while let Some(&Reverse((k, s))) = top.peek() {
                    if registered[s] == Some(k) {
                        break;
                    }
                    top.pop();
                }
                match *current {
                    Some(cur) => {
                        let heap = &mut heaps[cur];
                        while heap.peek().is_some_and(|Reverse(e)| stale(e)) {
                            heap.pop();
                        }
                        match heap.peek() {
                            Some(&Reverse(e)) => {
                                let wins = top
                                    .peek()
                                    .is_none_or(|&Reverse((k, s))| (e.key, cur) < (k, s));
                                if wins {
                                    return Some(e);
                                }
                                registered[cur] = Some(e.key);
                                top.push(Reverse((e.key, cur)));
                                *current = None;
                            }
                            None => *current = None,
                        }
                    }
                    None => {
                        let Reverse((_, s)) = top.pop()?;
                        registered[s] = None;
                        *current = Some(s);
                    }
                }
            },
        }
    }

    fn pop(&mut self, stale: impl Fn(&Entry) -> bool) -> Option<Entry> {
        let e = self.peek(stale)?;
        match self {
            Queue::Single(h) => h.pop(),
            Queue::TwoLevel { heaps, .. } => heaps[e.source].pop(),
        };
        Some(e)
    }

    /// Removes and returns every entry of source `s`.
    fn drain_source(&mut self, s: SourceId) -> Vec<Entry> {
        match self {
            Queue::Single(h) => {
                let (mine, rest): (Vec<_>, Vec<_>) = std::mem::take(h).into_vec().into_iter().partition(|Reverse(e)| e.source == s);
                *h = BinaryHeap::from(rest);
                mine.into_iter().map(|Reverse(e)| e).collect()
            }
            Queue::TwoLevel {
                heaps,
                registered,
                current,
                ..
            } => {
                registered[s] = None;
                if *current == Some(s) {
                    *current = None;
                }
                std::mem::take(&mut heaps[s]).into_vec().into_iter().map(|Reverse(e)| e).collect()
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Queue::Single(h) => h.len(),
            Queue::TwoLevel { heaps, .. } => heaps.iter().map(BinaryHeap::len).sum(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum TaggedParent {
    Spawn,
    Edge(EdgeId),
}

#[derive(Clone, Copy, Debug)]
struct TaggedLabel {
    dist: f64,
    parent: TaggedParent,
    done: bool,
}

#[derive(Clone, Debug)]
struct HeurTarget {
    vertex: VertexId,
    component: Option<ComponentId>,
    /// Upper bound on the congestion cost inside the target's component.
    cost_bound: f64,
}

struct SourceSearch {
    weight: f64,
    seeds: Vec<VertexId>,
    own: Option<ComponentId>,
    dist: Vec<f64>,
    parent: Vec<u32>,
    state: Vec<u8>,
    hcache: Vec<f64>,
    touched: Vec<VertexId>,
    tagged: HashMap<(VertexId, ComponentId), TaggedLabel>,
    own_remaining: usize,
    own_complete: bool,
    heur: Vec<HeurTarget>,
    signature: Vec<Target>,
    target_components: Vec<ComponentId>,
    needs_rekey: bool,
}

struct Component {
    edges: Vec<EdgeId>,
    vertices: Vec<VertexId>,
    cost: f64,
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    value: f64,
    source: SourceId,
    vertex: VertexId,
    target: TerminalId,
    distance: f64,
    penalty: f64,
    tagged: bool,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (Key(self.value), self.source, self.vertex, self.target)
            < (Key(other.value), other.source, other.vertex, other.target)
    }
}

pub struct SearchEngine<'a> {
    graph: &'a RoutingGraph,
    future: Option<&'a FutureCostTables>,
    config: EngineConfig,
    /// Indexed by source id.
    sources: Vec<Option<SourceSearch>>,
    live: BTreeSet<SourceId>,
    components: HashMap<ComponentId, Component>,
    edge_components: Vec<Vec<ComponentId>>,
    vertex_components: Vec<Vec<ComponentId>>,
    queue: Queue,
    epoch: u64,
    stats: SearchStats,
    extractions: Option<Vec<(u64, f64)>>,
}

/// A-star estimate for label `(v, tag)` of `src`. Zero when A* is off.
fn heuristic(
    config: &EngineConfig,
    future: Option<&FutureCostTables>,
    graph: &RoutingGraph,
    src: &SourceSearch,
    v: VertexId,
    tag: Option<ComponentId>,
) -> f64 {
    let Some(f) = future.filter(|_| config.astar) else {
        return 0.0;
    };
    let pv = graph.vertex(v);
    let per_unit = src.weight * f.min_delay_per_unit();
    let mut best = f64::INFINITY;
    for t in &src.heur {
        if tag.is_some() && t.component != tag {
            continue;
        }
        let delay = per_unit * pv.l1(&graph.vertex(t.vertex)) as f64;
        if delay >= best {
            continue;
        }
        let cost = if tag.is_some() {
            // inside the target component congestion cost may be zero
            0.0
        } else if !config.discount {
            f.cost_bound_row(v, f.landmark_row(t.vertex))
        } else if src.own_complete {
            (f.cost_bound_row(v, f.landmark_row(t.vertex)) - t.cost_bound).max(0.0)
        } else {
            0.0
        };
        best = best.min(cost + delay);
    }
    if best.is_finite() {
        best * config.heuristic_scale
    } else {
        0.0
    }
}

impl<'a> SearchEngine<'a> {
    /// `future` is required for A*; without it the heuristic is zero.
    pub fn new(graph: &'a RoutingGraph, future: Option<&'a FutureCostTables>, config: EngineConfig) -> Self {
        Self {
            graph,
            future,
            config,
            sources: Vec::new(),
            live: BTreeSet::new(),
            components: HashMap::new(),
            edge_components: vec![Vec::new(); graph.edge_count()],
            vertex_components: vec![Vec::new(); graph.vertex_count()],
            queue: Queue::new(config.two_level_heap),
            epoch: 0,
            stats: SearchStats::default(),
            extractions: None,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn live_sources(&self) -> impl Iterator<Item = SourceId> + '_ {
        self.live.iter().copied()
    }

    pub fn is_live(&self, id: SourceId) -> bool {
        self.live.contains(&id)
    }

    /// Start recording `(epoch, key)` of every extracted label.
    pub fn record_extractions(&mut self) {
        self.extractions = Some(Vec::new());
    }

    pub fn take_extractions(&mut self) -> Vec<(u64, f64)> {
        self.extractions.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Number of entries currently held by the heaps, stale ones included.
    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Registers a tree component. With discounting, every live source that
    /// has reached one of its vertices is restarted from its seeds, since its
    /// labels may depend on the component layout that just changed.
    pub fn add_component(&mut self, id: ComponentId, edges: &[EdgeId], vertices: &[VertexId]) {
        self.remove_component(id);
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let mut vertices = vertices.to_vec();
        vertices.sort_unstable();
        vertices.dedup();
        for &e in &edges {
            self.edge_components[e].push(id);
        }
        for &v in &vertices {
            self.vertex_components[v].push(id);
        }
        let cost = edges.iter().map(|&e| self.graph.edge(e).cost).sum();
        if self.config.discount {
            let affected: Vec<SourceId> = self
                .live
                .iter()
                .copied()
                .filter(|&s| {
                    let src = self.sources[s].as_ref().expect("live source");
                    vertices.iter().any(|&v| src.state[v] != UNREACHED)
                })
                .collect();
            for s in affected {
                self.restart(s);
            }
        }
        self.components.insert(id, Component { edges, vertices, cost });
    }

    pub fn remove_component(&mut self, id: ComponentId) {
        if let Some(c) = self.components.remove(&id) {
            for e in c.edges {
                self.edge_components[e].retain(|&k| k != id);
            }
            for v in c.vertices {
                self.vertex_components[v].retain(|&k| k != id);
            }
        }
    }

    pub fn component_vertices(&self, id: ComponentId) -> Option<&[VertexId]> {
        self.components.get(&id).map(|c| c.vertices.as_slice())
    }

    pub fn add_source(&mut self, spec: SourceSpec) -> Result<()> {
        if self.sources.get(spec.id).is_some_and(Option::is_some) {
            return Err(Error::DuplicateSource(spec.id));
        }
        if self.sources.len() <= spec.id {
            self.sources.resize_with(spec.id + 1, || None);
        }
        self.queue.ensure(spec.id);
        let n = self.graph.vertex_count();
        self.sources[spec.id] = Some(SourceSearch {
            weight: spec.weight,
            seeds: spec.seeds,
            own: spec.component,
            dist: vec![f64::INFINITY; n],
            parent: vec![NO_PARENT; n],
            state: vec![UNREACHED; n],
            hcache: vec![f64::NAN; n],
            touched: Vec::new(),
            tagged: HashMap::new(),
            own_remaining: 0,
            own_complete: true,
            heur: Vec::new(),
            signature: Vec::new(),
            target_components: Vec::new(),
            needs_rekey: false,
        });
        self.live.insert(spec.id);
        self.seed(spec.id);
        Ok(())
    }

    pub fn retire_source(&mut self, id: SourceId) -> Result<()> {
        if !self.live.remove(&id) {
            return Err(Error::UnknownSource(id));
        }
        self.queue.drain_source(id);
        self.sources[id] = None;
        Ok(())
    }

    fn restart(&mut self, s: SourceId) {
        self.stats.restarts += 1;
        self.queue.drain_source(s);
        let src = self.sources[s].as_mut().expect("live source");
        for v in src.touched.drain(..) {
            src.dist[v] = f64::INFINITY;
            src.parent[v] = NO_PARENT;
            src.state[v] = UNREACHED;
            src.hcache[v] = f64::NAN;
        }
        src.tagged.clear();
        self.seed(s);
    }

    fn own_vertex_count(&self, own: Option<ComponentId>) -> usize {
        match own {
            Some(c) if self.config.discount => self.components.get(&c).map_or(0, |c| c.vertices.len()),
            _ => 0,
        }
    }

    fn seed(&mut self, s: SourceId) {
        let own_count = self.own_vertex_count(self.sources[s].as_ref().and_then(|x| x.own));
        let src = self.sources[s].as_mut().expect("live source");
        src.own_remaining = own_count;
        src.own_complete = own_count == 0;
        for i in 0..src.seeds.len() {
            let v = src.seeds[i];
            if src.dist[v] > 0.0 {
                if src.state[v] == UNREACHED {
                    src.touched.push(v);
                }
                src.dist[v] = 0.0;
                src.parent[v] = NO_PARENT;
                src.state[v] = OPEN;
            }
        }
        let mut seeds = src.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        for v in seeds {
            let key = self.untagged_h(s, v);
            self.push(Entry {
                key: Key(key),
                source: s,
                vertex: v,
                tag: None,
                g: 0.0,
            });
        }
    }

    fn push(&mut self, e: Entry) {
        self.stats.heap_pushes += 1;
        self.queue.push(e);
    }

    fn untagged_h(&mut self, s: SourceId, v: VertexId) -> f64 {
        if !self.config.astar {
            return 0.0;
        }
        let src = self.sources[s].as_ref().expect("live source");
        let cached = src.hcache[v];
        if !cached.is_nan() {
            return cached;
        }
        let h = heuristic(&self.config, self.future, self.graph, src, v, None);
        self.sources[s].as_mut().expect("live source").hcache[v] = h;
        h
    }

    /// Recomputes the keys of all queued entries of `s` after its heuristic
    /// changed.
    fn rekey(&mut self, s: SourceId) {
        self.stats.rekeys += 1;
        let entries = self.queue.drain_source(s);
        let src = self.sources[s].as_mut().expect("live source");
        src.needs_rekey = false;
        for &v in &src.touched {
            src.hcache[v] = f64::NAN;
        }
        let mut fresh = Vec::with_capacity(entries.len());
        for e in entries {
            let src = self.sources[s].as_ref().expect("live source");
            let current = match e.tag {
                None => src.state[e.vertex] != DONE && src.dist[e.vertex] == e.g,
                Some(k) => src.tagged.get(&(e.vertex, k)).is_some_and(|l| !l.done && l.dist == e.g),
            };
            if !current {
                continue;
            }
            let h = if e.tag.is_none() {
                self.untagged_h(s, e.vertex)
            } else {
                heuristic(&self.config, self.future, self.graph, src, e.vertex, e.tag)
            };
            fresh.push(Entry { key: Key(e.g + h), ..e });
        }
        fresh.sort_unstable();
        fresh.dedup_by(|a, b| a.vertex == b.vertex && a.tag == b.tag);
        for e in fresh {
            self.queue.push(e);
        }
    }

    fn is_stale(sources: &[Option<SourceSearch>], e: &Entry) -> bool {
        let Some(src) = sources.get(e.source).and_then(Option::as_ref) else {
            return true;
        };
        match e.tag {
            None => src.state[e.vertex] == DONE || src.dist[e.vertex] != e.g,
            Some(k) => src.tagged.get(&(e.vertex, k)).is_none_or(|l| l.done || l.dist != e.g),
        }
    }

    /// Shortest-path distance and path from `source`'s seeds to `v`, if `v`
    /// is already permanently labeled.
    pub fn settled_path(&self, source: SourceId, v: VertexId) -> Option<(f64, Vec<EdgeId>)> {
        let src = self.sources.get(source)?.as_ref()?;
        if src.state[v] != DONE {
            return None;
        }
        Some((src.dist[v], self.untagged_path(src, v)))
    }

    fn untagged_path(&self, src: &SourceSearch, v: VertexId) -> Vec<EdgeId> {
        let mut walk = Vec::new();
        let mut at = v;
        while src.parent[at] != NO_PARENT {
            let e = src.parent[at] as usize;
            walk.push(e);
            at = self.graph.edge(e).other(at);
        }
        walk.reverse();
        walk
    }

    fn path_start(&self, path: &[EdgeId], end: VertexId) -> VertexId {
        path.iter().rev().fold(end, |at, &e| self.graph.edge(e).other(at))
    }

    /// Runs the searches until the pair minimizing path length plus penalty
    /// is certain. `penalty(source, target)` returns `None` for pairs the
    /// source must not report; it must be nonnegative otherwise.
    ///
    /// Ties are broken by `(value, source id, target vertex, target id)`.
    pub fn advance_until_hit(
        &mut self,
        targets: &[Target],
        penalty: &dyn Fn(SourceId, &Target) -> Option<f64>,
    ) -> Result<Hit> {
        self.epoch += 1;
        let mut at_vertex: HashMap<VertexId, Vec<usize>> = HashMap::new();
        let mut by_component: HashMap<ComponentId, Vec<usize>> = HashMap::new();
        for (i, t) in targets.iter().enumerate() {
            at_vertex.entry(t.vertex).or_default().push(i);
            if let Some(c) = t.component {
                by_component.entry(c).or_default().push(i);
            }
        }

        let live: Vec<SourceId> = self.live.iter().copied().collect();
        let mut best: Option<Candidate> = None;
        let consider = |best: &mut Option<Candidate>, c: Candidate| {
            if best.as_ref().is_none_or(|b| c.better_than(b)) {
                *best = Some(c);
            }
        };

        // Per-source target sets, heuristics and already-settled targets.
        for &s in &live {
            let mut signature = Vec::new();
            let mut pens = Vec::new();
            for t in targets {
                if t.id == s {
                    continue;
                }
                if let Some(p) = penalty(s, t) {
                    signature.push(*t);
                    pens.push(p);
                }
            }
            let changed = {
                let src = self.sources[s].as_ref().expect("live source");
                src.signature != signature
            };
            if changed {
                let heur = signature
                    .iter()
                    .map(|t| HeurTarget {
                        vertex: t.vertex,
                        component: t.component,
                        cost_bound: t
                            .component
                            .and_then(|c| self.components.get(&c))
                            .map_or(0.0, |c| c.cost),
                    })
                    .collect();
                let mut comps: Vec<ComponentId> = signature.iter().filter_map(|t| t.component).collect();
                comps.sort_unstable();
                comps.dedup();
                let src = self.sources[s].as_mut().expect("live source");
                src.heur = heur;
                src.target_components = comps;
                src.signature = signature.clone();
                if self.config.astar {
                    self.rekey(s);
                }
            }
            let src = self.sources[s].as_ref().expect("live source");
            for (t, p) in signature.iter().zip(pens) {
                if src.state[t.vertex] == DONE {
                    let g = src.dist[t.vertex];
                    consider(
                        &mut best,
                        Candidate {
                            value: g + p,
                            source: s,
                            vertex: t.vertex,
                            target: t.id,
                            distance: g,
                            penalty: p,
                            tagged: false,
                        },
                    );
                }
                if let Some(c) = t.component {
                    if let Some(l) = src.tagged.get(&(t.vertex, c)).filter(|l| l.done) {
                        consider(
                            &mut best,
                            Candidate {
                                value: l.dist + p,
                                source: s,
                                vertex: t.vertex,
                                target: t.id,
                                distance: l.dist,
                                penalty: p,
                                tagged: true,
                            },
                        );
                    }
                }
            }
        }

        loop {
            let next = {
                let sources = &self.sources;
                self.queue.peek(|e| Self::is_stale(sources, e))
            };
            let Some(entry) = next else { break };
            if best.as_ref().is_some_and(|b| entry.key.0 > b.value) {
                break;
            }
            {
                let sources = &self.sources;
                self.queue.pop(|e| Self::is_stale(sources, e));
            }
            self.stats.heap_pops += 1;
            if let Some(log) = self.extractions.as_mut() {
                log.push((self.epoch, entry.key.0));
            }
            self.settle(entry, targets, &at_vertex, &by_component, penalty, &mut best);
            if self.sources[entry.source].as_ref().is_some_and(|s| s.needs_rekey) {
                self.rekey(entry.source);
            }
        }

        let Some(c) = best else {
            return Err(Error::Unreachable {
                source_id: live.first().copied().unwrap_or(usize::MAX),
                live,
            });
        };
        let src = self.sources[c.source].as_ref().expect("live source");
        let (path, tag_start) = if c.tagged {
            let comp = targets
                .iter()
                .find(|t| t.id == c.target)
                .and_then(|t| t.component)
                .expect("tagged hit on a component target");
            let mut tail = Vec::new();
            let mut at = c.vertex;
            loop {
                match src.tagged[&(at, comp)].parent {
                    TaggedParent::Spawn => break,
                    TaggedParent::Edge(e) => {
                        tail.push(e);
                        at = self.graph.edge(e).other(at);
                    }
                }
            }
            tail.reverse();
            let mut path = self.untagged_path(src, at);
            let start = path.len();
            path.extend(tail);
            (path, start)
        } else {
            let p = self.untagged_path(src, c.vertex);
            let len = p.len();
            (p, len)
        };
        Ok(Hit {
            source: c.source,
            target: c.target,
            target_vertex: c.vertex,
            value: c.value,
            distance: c.distance,
            penalty: c.penalty,
            start_vertex: self.path_start(&path, c.vertex),
            path,
            tag_start,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn settle(
        &mut self,
        entry: Entry,
        targets: &[Target],
        at_vertex: &HashMap<VertexId, Vec<usize>>,
        by_component: &HashMap<ComponentId, Vec<usize>>,
        penalty: &dyn Fn(SourceId, &Target) -> Option<f64>,
        best: &mut Option<Candidate>,
    ) {
        self.stats.labels_scanned += 1;
        let s = entry.source;
        let v = entry.vertex;
        let g = entry.g;
        let graph = self.graph;
        let offer = |best: &mut Option<Candidate>, t: &Target, tagged: bool| {
            if t.id == s {
                return;
            }
            if let Some(p) = penalty(s, t) {
                let c = Candidate {
                    value: g + p,
                    source: s,
                    vertex: v,
                    target: t.id,
                    distance: g,
                    penalty: p,
                    tagged,
                };
                if best.as_ref().is_none_or(|b| c.better_than(b)) {
                    *best = Some(c);
                }
            }
        };

        match entry.tag {
            None => {
                let (weight, own) = {
                    let src = self.sources[s].as_mut().expect("live source");
                    src.state[v] = DONE;
                    (src.weight, src.own)
                };
                let own = own.filter(|_| self.config.discount);
                if let Some(c) = own {
                    if self.vertex_components[v].contains(&c) {
                        let src = self.sources[s].as_mut().expect("live source");
                        src.own_remaining = src.own_remaining.saturating_sub(1);
                        if src.own_remaining == 0 && !src.own_complete {
                            src.own_complete = true;
                            src.needs_rekey = self.config.astar;
                        }
                    }
                }
                for &(w, e) in graph.incident(v) {
                    let edge = graph.edge(e);
                    let discounted = own.is_some_and(|c| self.edge_components[e].contains(&c));
                    let len = if discounted {
                        weight * edge.delay
                    } else {
                        edge.cost + weight * edge.delay
                    };
                    let nd = g + len;
                    let src = self.sources[s].as_mut().expect("live source");
                    if src.state[w] == DONE || nd >= src.dist[w] {
                        continue;
                    }
                    if src.state[w] == UNREACHED {
                        src.touched.push(w);
                        src.state[w] = OPEN;
                    }
                    src.dist[w] = nd;
                    src.parent[w] = e as u32;
                    let h = self.untagged_h(s, w);
                    self.push(Entry {
                        key: Key(nd + h),
                        source: s,
                        vertex: w,
                        tag: None,
                        g: nd,
                    });
                }
                if self.config.discount {
                    let comps: Vec<ComponentId> = {
                        let src = self.sources[s].as_ref().expect("live source");
                        self.vertex_components[v]
                            .iter()
                            .copied()
                            .filter(|&k| Some(k) != src.own && src.target_components.contains(&k))
                            .collect()
                    };
                    for k in comps {
                        self.relax_tagged(s, v, k, g, TaggedParent::Spawn);
                    }
                }
                if let Some(list) = at_vertex.get(&v) {
                    for &i in list {
                        offer(best, &targets[i], false);
                    }
                }
            }
            Some(k) => {
                let weight = {
                    let src = self.sources[s].as_mut().expect("live source");
                    if let Some(l) = src.tagged.get_mut(&(v, k)) {
                        l.done = true;
                    }
                    src.weight
                };
                for &(w, e) in graph.incident(v) {
                    if self.edge_components[e].contains(&k) {
                        let nd = g + weight * graph.edge(e).delay;
                        self.relax_tagged(s, w, k, nd, TaggedParent::Edge(e));
                    }
                }
                if let Some(list) = by_component.get(&k) {
                    for &i in list {
                        if targets[i].vertex == v {
                            offer(best, &targets[i], true);
                        }
                    }
                }
            }
        }
    }

    fn relax_tagged(&mut self, s: SourceId, v: VertexId, k: ComponentId, nd: f64, parent: TaggedParent) {
        let src = self.sources[s].as_mut().expect("live source");
        let slot = src.tagged.entry((v, k)).or_insert(TaggedLabel {
            dist: f64::INFINITY,
            parent,
            done: false,
        });
        if slot.done || nd >= slot.dist {
            return;
        }
        slot.dist = nd;
        slot.parent = parent;
        if src.state[v] == UNREACHED {
            // keep the vertex on the reset list
            src.touched.push(v);
            src.state[v] = OPEN;
            src.dist[v] = f64::INFINITY;
        }
        let src = self.sources[s].as_ref().expect("live source");
        let h = heuristic(&self.config, self.future, self.graph, src, v, Some(k));
        self.push(Entry {
            key: Key(nd + h),
            source: s,
            vertex: v,
            tag: Some(k),
            g: nd,
        });
    }

    /// Re-derives the charged length of a hit's path under the discounting
    /// rules and checks it against the reported distance.
    pub fn audit_hit(&self, hit: &Hit, target_component: Option<ComponentId>) -> std::result::Result<(), String> {
        let src = self.sources[hit.source]
            .as_ref()
            .ok_or_else(|| format!("source {} is not live", hit.source))?;
        if !src.seeds.contains(&hit.start_vertex) {
            return Err(format!("path starts at {}, not at a seed", hit.start_vertex));
        }
        if self.graph.walk_end(hit.start_vertex, &hit.path) != Some(hit.target_vertex) {
            return Err("path does not end at the target".into());
        }
        let own = src.own.filter(|_| self.config.discount);
        let mut at = hit.start_vertex;
        let mut length = 0.0;
        for (i, &e) in hit.path.iter().enumerate() {
            let edge = self.graph.edge(e);
            let comps = &self.edge_components[e];
            let zero = if i >= hit.tag_start {
                let k = target_component.ok_or("tagged segment without a target component")?;
                if !comps.contains(&k) {
                    return Err(format!("edge {e} after the tag switch is outside the target component"));
                }
                true
            } else {
                own.is_some_and(|c| comps.contains(&c))
            };
            length += if zero { src.weight * edge.delay } else { edge.cost + src.weight * edge.delay };
            at = edge.other(at);
        }
        let _ = at;
        let scale = hit.distance.abs().max(1.0);
        if (length - hit.distance).abs() > 1e-9 * scale {
            return Err(format!("path length {length} != reported distance {}", hit.distance));
        }
        Ok(())
    }
}
