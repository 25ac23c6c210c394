//! Landmark (ALT) lower bounds on congestion cost plus an L1 bound on delay.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dijkstra::dijkstra;
use crate::error::{Error, Result};
use crate::graph::{RoutingGraph, Vertex, VertexId};

/// Precomputed future-cost tables. Immutable once built.
#[derive(Clone, Debug)]
pub struct FutureCostTables {
    landmarks: Vec<VertexId>,
    /// Vertex-major: `dist[v * k + l]` is the exact cost distance between
    /// landmark `l` and vertex `v`.
    dist: Vec<f64>,
    min_delay_per_unit: f64,
    delay_per_unit: BTreeMap<(u32, u32), f64>,
    positions: Vec<Vertex>,
}

impl FutureCostTables {
    /// Landmarks are the four planar corners of the lowest layer followed by
    /// farthest-point samples; ties in the sampling are broken by a seeded
    /// random ranking of the vertices.
    pub fn build(graph: &RoutingGraph, landmark_count: usize, seed: u64) -> Result<Self> {
        if landmark_count < 1 {
            return Err(Error::Parameter("landmark_count must be at least 1".into()));
        }
        let vertices = graph.vertices();
        let low = vertices.iter().map(|v| v.layer).min().unwrap_or(0);
        let on_low = || (0..vertices.len()).filter(|&v| vertices[v].layer == low);
        let sum = |v: usize| vertices[v].x as i64 + vertices[v].y as i64;
        let diff = |v: usize| vertices[v].x as i64 - vertices[v].y as i64;
        let corners = [
            on_low().min_by_key(|&v| (sum(v), v)),
            on_low().max_by_key(|&v| (sum(v), std::cmp::Reverse(v))),
            on_low().min_by_key(|&v| (diff(v), v)),
            on_low().max_by_key(|&v| (diff(v), std::cmp::Reverse(v))),
        ];
        let mut landmarks: Vec<VertexId> = Vec::new();
        for c in corners.into_iter().flatten() {
            if landmarks.len() < landmark_count && !landmarks.contains(&c) {
                landmarks.push(c);
            }
        }

        let mut rank: Vec<usize> = (0..vertices.len()).collect();
        rank.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut nearest = vec![f64::INFINITY; vertices.len()];
        for &l in &landmarks {
            let sp = dijkstra(graph, &[(l, 0.0)], |e| e.cost);
            for (n, d) in nearest.iter_mut().zip(&sp.dist) {
                *n = n.min(*d);
            }
        }
        while landmarks.len() < landmark_count.min(vertices.len()) {
            let next = (0..vertices.len())
                .filter(|v| !landmarks.contains(v))
                .max_by(|&a, &b| {
                    nearest[a]
                        .total_cmp(&nearest[b])
                        .then_with(|| rank[b].cmp(&rank[a]))
                })
                .expect("vertices remain");
            landmarks.push(next);
            let sp = dijkstra(graph, &[(next, 0.0)], |e| e.cost);
            for (n, d) in nearest.iter_mut().zip(&sp.dist) {
                *n = n.min(*d);
            }
        }
        Ok(Self::with_landmarks(graph, &landmarks))
    }

    pub fn with_landmarks(graph: &RoutingGraph, landmarks: &[VertexId]) -> Self {
        let n = graph.vertex_count();
        let k = landmarks.len();
        let mut dist = vec![0.0; n * k];
        for (l, &lm) in landmarks.iter().enumerate() {
            let sp = dijkstra(graph, &[(lm, 0.0)], |e| e.cost);
            for v in 0..n {
                dist[v * k + l] = sp.dist[v];
            }
        }

        let mut delay_per_unit = BTreeMap::new();
        for (i, e) in graph.edges().iter().enumerate() {
            let len = graph.planar_length(i);
            if len > 0 {
                let key = (graph.vertex(e.u).layer.min(graph.vertex(e.v).layer), e.wire_type);
                let per_unit = e.delay / len as f64;
                let slot = delay_per_unit.entry(key).or_insert(per_unit);
                *slot = f64::min(*slot, per_unit);
            }
        }
        let min_delay_per_unit = delay_per_unit.values().copied().fold(f64::INFINITY, f64::min);
        Self {
            landmarks: landmarks.to_vec(),
            dist,
            min_delay_per_unit: if min_delay_per_unit.is_finite() { min_delay_per_unit } else { 0.0 },
            delay_per_unit,
            positions: graph.vertices().to_vec(),
        }
    }

    pub fn landmarks(&self) -> &[VertexId] {
        &self.landmarks
    }

    /// Fastest delay per unit of planar length over all layers and wire types.
    pub fn min_delay_per_unit(&self) -> f64 {
        self.min_delay_per_unit
    }

    /// Minimum delay per unit length keyed by `(layer, wire_type)`.
    pub fn delay_per_unit(&self) -> &BTreeMap<(u32, u32), f64> {
        &self.delay_per_unit
    }

    #[inline]
    pub(crate) fn landmark_row(&self, v: VertexId) -> &[f64] {
        let k = self.landmarks.len();
        &self.dist[v * k..(v + 1) * k]
    }

    /// Triangle-inequality lower bound on the cost distance between `v` and
    /// `t`, given `t`'s landmark row.
    #[inline]
    pub(crate) fn cost_bound_row(&self, v: VertexId, t_row: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for (a, b) in self.landmark_row(v).iter().zip(t_row) {
            best = best.max((a - b).abs());
        }
        best
    }

    pub fn cost_lower_bound(&self, v: VertexId, t: VertexId) -> f64 {
        self.cost_bound_row(v, self.landmark_row(t))
    }

    pub fn delay_lower_bound(&self, weight: f64, v: VertexId, t: VertexId) -> f64 {
        weight * self.min_delay_per_unit * self.positions[v].l1(&self.positions[t]) as f64
    }

    /// Lower bound on the distance from `v` to `t` w.r.t. `c + weight * d`.
    pub fn lower_bound(&self, weight: f64, v: VertexId, t: VertexId) -> f64 {
        self.cost_lower_bound(v, t) + self.delay_lower_bound(weight, v, t)
    }
}
