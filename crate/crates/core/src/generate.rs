//! Seeded grid instance generator.
//!
//! Builds a 3D global-routing-like grid: horizontal wires on even layers,
//! vertical wires on odd layers (a lone layer carries both), a via between
//! vertically adjacent tiles, and one parallel planar edge per wire type.
//! All costs, delays and weights are multiples of 2^-10, so every path sum
//! computed on a generated instance is exact in `f64` and independent of
//! summation order.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::graph::{Edge, NetInstance, RoutingGraph, Sink, Vertex};

pub const QUANTUM: f64 = 1.0 / 1024.0;
pub const VIA_COST: f64 = 1.0;
pub const VIA_DELAY: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CongestionProfile {
    Uniform,
    Hotspots,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightProfile {
    Unit,
    LogNormal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub layers: usize,
    pub wire_types: usize,
    pub sink_count: usize,
    pub congestion: CongestionProfile,
    pub weights: WeightProfile,
    /// Multiplies every generated delay weight.
    pub weight_scale: f64,
    pub d_bif: f64,
    pub eta: f64,
}

impl GridSpec {
    pub fn new(seed: u64, width: usize, height: usize, layers: usize, sink_count: usize) -> Self {
        Self {
            seed,
            width,
            height,
            layers,
            wire_types: 1,
            sink_count,
            congestion: CongestionProfile::Uniform,
            weights: WeightProfile::Unit,
            weight_scale: 1.0,
            d_bif: 0.0,
            eta: 0.5,
        }
    }
}

#[inline]
pub fn quantize(x: f64) -> f64 {
    (x / QUANTUM).round() * QUANTUM
}

struct Hotspot {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
    multiplier: f64,
}

impl Hotspot {
    fn contains(&self, x: i32, y: i32) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }
}

fn congestion_at(hotspots: &[Hotspot], a: Vertex, b: Vertex) -> f64 {
    hotspots
        .iter()
        .filter(|h| h.contains(a.x, a.y) && h.contains(b.x, b.y))
        .map(|h| h.multiplier)
        .fold(1.0, f64::max)
}

pub fn generate_grid_instance(spec: &GridSpec) -> Result<(RoutingGraph, NetInstance)> {
    let GridSpec {
        width: w,
        height: h,
        layers,
        wire_types,
        sink_count,
        ..
    } = *spec;
    if w < 2 || h < 2 {
        return Err(Error::Parameter(format!("grid must be at least 2x2, got {w}x{h}")));
    }
    if layers < 1 || wire_types < 1 {
        return Err(Error::Parameter("layers and wire_types must be at least 1".into()));
    }
    let n = w * h * layers;
    if sink_count < 1 || sink_count + 1 > n {
        return Err(Error::Parameter(format!(
            "sink_count must be in [1, {}], got {sink_count}",
            n - 1
        )));
    }
    crate::graph::check_eta(spec.eta).map_err(|e| Error::Parameter(e.to_string()))?;
    if !(spec.weight_scale.is_finite() && spec.weight_scale > 0.0) {
        return Err(Error::Parameter(format!("weight_scale must be positive, got {}", spec.weight_scale)));
    }
    if !(spec.d_bif.is_finite() && spec.d_bif >= 0.0) {
        return Err(Error::Parameter(format!("d_bif must be nonnegative, got {}", spec.d_bif)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let hotspots: Vec<Hotspot> = match spec.congestion {
        CongestionProfile::Uniform => Vec::new(),
        CongestionProfile::Hotspots => {
            let count = 1 + (w * h) / 100;
            let max_w = (w / 4).max(1) as i32;
            let max_h = (h / 4).max(1) as i32;
            (0..count)
                .map(|_| {
                    let x0 = rng.random_range(0..w as i32);
                    let y0 = rng.random_range(0..h as i32);
                    let dx = rng.random_range(0..max_w);
                    let dy = rng.random_range(0..max_h);
                    let multiplier = (rng.random_range(2.0..=8.0f64) * 16.0).round() / 16.0;
                    Hotspot {
                        x0,
                        y0,
                        x1: x0 + dx,
                        y1: y0 + dy,
                        multiplier,
                    }
                })
                .collect()
        }
    };

    let index = |x: usize, y: usize, l: usize| l * w * h + y * w + x;
    let mut vertices = Vec::with_capacity(n);
    for l in 0..layers {
        for y in 0..h {
            for x in 0..w {
                vertices.push(Vertex::new(x as i32, y as i32, l as u32));
            }
        }
    }

    let mut edges = Vec::new();
    for l in 0..layers {
        let base_delay = 1.0 / (1u64 << (l / 2)) as f64;
        let horizontal = layers == 1 || l % 2 == 0;
        let vertical = layers == 1 || l % 2 == 1;
        let planar = |a: usize, b: usize, edges: &mut Vec<Edge>| {
            let cong = congestion_at(&hotspots, vertices[a], vertices[b]);
            for k in 0..wire_types {
                let speedup = 1.0 + 0.5 * k as f64;
                edges.push(Edge {
                    u: a,
                    v: b,
                    cost: quantize(cong * speedup),
                    delay: quantize(base_delay / speedup).max(QUANTUM),
                    wire_type: k as u32,
                });
            }
        };
        for y in 0..h {
            for x in 0..w {
                if horizontal && x + 1 < w {
                    planar(index(x, y, l), index(x + 1, y, l), &mut edges);
                }
                if vertical && y + 1 < h {
                    planar(index(x, y, l), index(x, y + 1, l), &mut edges);
                }
            }
        }
        if l + 1 < layers {
            for y in 0..h {
                for x in 0..w {
                    let a = index(x, y, l);
                    let b = index(x, y, l + 1);
                    let cong = congestion_at(&hotspots, vertices[a], vertices[b]);
                    edges.push(Edge {
                        u: a,
                        v: b,
                        cost: quantize(VIA_COST * cong),
                        delay: VIA_DELAY,
                        wire_type: 0,
                    });
                }
            }
        }
    }

    let picks = sample(&mut rng, n, sink_count + 1).into_vec();
    let root = picks[0];
    let lognormal = LogNormal::new(0.0, 1.0).expect("valid lognormal parameters");
    let sinks = picks[1..]
        .iter()
        .map(|&vertex| {
            let weight = match spec.weights {
                WeightProfile::Unit => quantize(spec.weight_scale).max(QUANTUM),
                WeightProfile::LogNormal => quantize(lognormal.sample(&mut rng) * spec.weight_scale).max(QUANTUM),
            };
            Sink { vertex, weight }
        })
        .collect();

    let graph = RoutingGraph::new(vertices, edges)?;
    let net = NetInstance {
        root,
        sinks,
        d_bif: spec.d_bif,
        eta: spec.eta,
    };
    Ok((graph, net))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        let (g, net) = generate_grid_instance(&GridSpec::new(1, 3, 3, 1, 1)).unwrap();
        assert_eq!(g.vertex_count(), 9);
        // a single layer routes in both directions
        assert_eq!(g.edge_count(), 12);
        assert_eq!(net.sinks.len(), 1);
        assert_ne!(net.root, net.sinks[0].vertex);

        let (g, net) = generate_grid_instance(&GridSpec::new(7, 4, 4, 2, 3)).unwrap();
        assert_eq!(g.vertex_count(), 32);
        assert_eq!(g.edge_count(), 12 + 12 + 16);
        assert_eq!(net.sinks.len(), 3);
    }

    #[test]
    fn wire_types_replicate_planar_edges_only() {
        let mut spec = GridSpec::new(3, 4, 4, 2, 2);
        spec.wire_types = 3;
        let (g, _) = generate_grid_instance(&spec).unwrap();
        assert_eq!(g.edge_count(), 3 * 24 + 16);
        let fast = g.edges().iter().find(|e| e.wire_type == 2).unwrap();
        assert_eq!(fast.cost, 2.0);
        assert_eq!(fast.delay, quantize(0.5));
    }

    #[test]
    fn upper_layer_pairs_are_faster() {
        let (g, _) = generate_grid_instance(&GridSpec::new(3, 3, 3, 4, 2)).unwrap();
        for e in g.edges() {
            if g.vertex(e.u).layer == g.vertex(e.v).layer {
                let expect = if g.vertex(e.u).layer >= 2 { 0.5 } else { 1.0 };
                assert_eq!(e.delay, expect);
            }
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(generate_grid_instance(&GridSpec::new(1, 1, 3, 1, 1)).is_err());
        assert!(generate_grid_instance(&GridSpec::new(1, 2, 2, 1, 4)).is_err());
        assert!(generate_grid_instance(&GridSpec::new(1, 2, 2, 1, 0)).is_err());
        assert!(generate_grid_instance(&GridSpec::new(1, 2, 2, 1, 3)).is_ok());
    }

    #[test]
    fn hotspots_and_lognormal_are_quantized() {
        let mut spec = GridSpec::new(11, 12, 12, 2, 20);
        spec.congestion = CongestionProfile::Hotspots;
        spec.weights = WeightProfile::LogNormal;
        spec.wire_types = 2;
        let (g, net) = generate_grid_instance(&spec).unwrap();
        assert!(g.edges().iter().any(|e| e.cost > 1.5));
        for e in g.edges() {
            assert_eq!(quantize(e.cost), e.cost);
            assert_eq!(quantize(e.delay), e.delay);
        }
        for s in &net.sinks {
            assert!(s.weight > 0.0);
            assert_eq!(quantize(s.weight), s.weight);
        }
    }
}
