use proptest::prelude::*;

use cdsteiner::baselines::{
    embed_topology, embed_topology_optimal, l1_topology, prim_dijkstra_topology, shallow_light_topology, Baseline,
};
use cdsteiner::generate::{generate_grid_instance, CongestionProfile, GridSpec, WeightProfile};
use cdsteiner::graph::{Edge, NetInstance, RoutingGraph, Sink, Vertex};
use cdsteiner::topology::{TopoKind, TopoNode, Topology};
use cdsteiner::tree::evaluate_cost;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn instance(seed: u64, w: usize, h: usize, l: usize, sinks: usize, d_bif: f64) -> (RoutingGraph, NetInstance) {
    let spec = GridSpec {
        congestion: CongestionProfile::Hotspots,
        weights: WeightProfile::LogNormal,
        wire_types: 2,
        d_bif,
        eta: 0.25,
        ..GridSpec::new(seed, w, h, l, sinks)
    };
    generate_grid_instance(&spec).unwrap()
}

fn planar(g: &RoutingGraph, v: usize) -> (i32, i32) {
    let p = g.vertex(v);
    (p.x, p.y)
}

fn l1(a: (i32, i32), b: (i32, i32)) -> i64 {
    i64::from((a.0 - b.0).abs() + (a.1 - b.1).abs())
}

/// Prim on the terminals' planar positions.
fn l1_mst(points: &[(i32, i32)]) -> i64 {
    let k = points.len();
    let mut in_tree = vec![false; k];
    let mut best = vec![i64::MAX; k];
    best[0] = 0;
    let mut total = 0;
    for _ in 0..k {
        let i = (0..k).filter(|&i| !in_tree[i]).min_by_key(|&i| best[i]).unwrap();
        in_tree[i] = true;
        total += best[i];
        for j in 0..k {
            best[j] = best[j].min(l1(points[i], points[j]));
        }
    }
    total
}

fn terminal_points(g: &RoutingGraph, net: &NetInstance) -> Vec<(i32, i32)> {
    std::iter::once(net.root).chain(net.sinks.iter().map(|s| s.vertex)).map(|v| planar(g, v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Every baseline produces a valid tree whose stored cost matches an
    /// independent evaluation.
    #[test]
    fn baselines_give_valid_trees(seed in 0u64..10_000, sinks in 1usize..10, d_bif in 0.0f64..3.0) {
        let (g, net) = instance(seed, 8, 8, 2, sinks, d_bif);
        for b in [Baseline::L1, Baseline::ShallowLight { epsilon: 0.2 }, Baseline::PrimDijkstra { gamma: 0.5 }] {
            let topo = b.topology(&g, &net).unwrap();
            topo.validate(&net).unwrap();
            let tree = b.run(&g, &net).unwrap();
            tree.validate(&g, &net).unwrap();
            let cost = evaluate_cost(&g, &net, &tree).unwrap();
            prop_assert!(close(cost.total, tree.cost.total), "{:?}: {} vs {}", b, cost.total, tree.cost.total);
        }
    }

    /// The L1 topology is never longer than the terminals' L1 spanning tree.
    #[test]
    fn l1_topology_is_at_most_the_spanning_tree(seed in 0u64..10_000, sinks in 1usize..12) {
        let (g, net) = instance(seed, 12, 12, 1, sinks, 0.0);
        let topo = l1_topology(&g, &net);
        prop_assert!(topo.planar_length() <= l1_mst(&terminal_points(&g, &net)));
    }

    /// A huge slack never triggers a reconnection.
    #[test]
    fn unbounded_slack_keeps_the_l1_topology(seed in 0u64..10_000, sinks in 1usize..12, d_bif in 0.0f64..3.0) {
        let (g, net) = instance(seed, 10, 10, 2, sinks, d_bif);
        prop_assert_eq!(shallow_light_topology(&g, &net, 1e9).unwrap(), l1_topology(&g, &net));
    }

    /// Without bifurcation delay every sink's planar path stays within the
    /// slack of its distance to the root.
    #[test]
    fn shallow_light_paths_respect_the_slack(
        seed in 0u64..10_000,
        epsilon in prop::sample::select(vec![0.05, 0.2, 0.5, 1.0]),
    ) {
        let (g, net) = instance(seed, 16, 16, 1, 7, 0.0);
        let topo = shallow_light_topology(&g, &net, epsilon).unwrap();
        topo.validate(&net).unwrap();
        let root = planar(&g, net.root);
        for (s, &len) in topo.sink_path_lengths(&net).iter().enumerate() {
            let direct = l1(root, planar(&g, net.sinks[s].vertex)) as f64;
            prop_assert!(len as f64 <= (1.0 + epsilon) * direct + 1e-9, "sink {}: {} > (1 + {}) {}", s, len, epsilon, direct);
        }
    }

    /// Full weight on path length gives every sink its L1 distance to the
    /// root; no weight on it gives a tree no longer than the spanning tree.
    #[test]
    fn prim_dijkstra_extremes(seed in 0u64..10_000, sinks in 1usize..10) {
        let (g, net) = instance(seed, 12, 12, 1, sinks, 0.0);
        let root = planar(&g, net.root);
        let radial = prim_dijkstra_topology(&g, &net, 1.0).unwrap();
        for (s, &len) in radial.sink_path_lengths(&net).iter().enumerate() {
            prop_assert_eq!(len, l1(root, planar(&g, net.sinks[s].vertex)));
        }
        let short = prim_dijkstra_topology(&g, &net, 0.0).unwrap();
        prop_assert!(short.planar_length() <= l1_mst(&terminal_points(&g, &net)));
    }

    /// Embedding depends only on the shape: moving the planar Steiner
    /// positions leaves the optimal value unchanged.
    #[test]
    fn embedding_ignores_planar_steiner_positions(seed in 0u64..10_000, sinks in 2usize..7, d_bif in 0.0f64..3.0) {
        let (g, net) = instance(seed, 7, 7, 2, sinks, d_bif);
        let topo = l1_topology(&g, &net);
        let (_, best) = embed_topology(&g, &net, &topo).unwrap();
        let root = planar(&g, net.root);
        let first = planar(&g, net.sinks[0].vertex);
        for anchor in [root, first] {
            let mut moved = topo.clone();
            for n in &mut moved.nodes {
                if n.kind == TopoKind::Steiner {
                    (n.x, n.y) = anchor;
                }
            }
            let (_, value) = embed_topology(&g, &net, &moved).unwrap();
            prop_assert!(close(value, best));
        }
        let tree = embed_topology_optimal(&g, &net, &topo).unwrap();
        prop_assert!(close(tree.cost.total, best));
    }
}

#[test]
fn tiny_slack_on_one_sink_is_a_direct_edge() {
    let (g, net) = instance(3, 10, 10, 1, 1, 1.0);
    let topo = shallow_light_topology(&g, &net, 1e-9).unwrap();
    assert_eq!(topo.nodes.len(), 2);
    assert_eq!(topo.planar_length(), l1(planar(&g, net.root), planar(&g, net.sinks[0].vertex)));
    assert!(shallow_light_topology(&g, &net, 0.0).is_err());
    assert!(prim_dijkstra_topology(&g, &net, 1.5).is_err());
}

#[test]
fn collinear_terminals() {
    // a 1 x 6 strip with every terminal on one line
    let vertices: Vec<Vertex> = (0..6).map(|x| Vertex::new(x, 0, 0)).collect();
    let edges = (0..5).map(|i| Edge { u: i, v: i + 1, cost: 1.0, delay: 1.0, wire_type: 0 }).collect();
    let g = RoutingGraph::new(vertices, edges).unwrap();
    let net = NetInstance {
        root: 0,
        sinks: vec![Sink { vertex: 5, weight: 1.0 }, Sink { vertex: 2, weight: 1.0 }, Sink { vertex: 4, weight: 2.0 }],
        d_bif: 0.0,
        eta: 0.5,
    };
    for b in [Baseline::L1, Baseline::ShallowLight { epsilon: 0.2 }, Baseline::PrimDijkstra { gamma: 0.5 }] {
        let topo = b.topology(&g, &net).unwrap();
        assert_eq!(topo.planar_length(), 5, "{b:?}");
        for (s, &len) in topo.sink_path_lengths(&net).iter().enumerate() {
            assert_eq!(len, i64::from(g.vertex(net.sinks[s].vertex).x), "{b:?}");
        }
        // the shared trunk carries all weight below it: 5 + 1*5 + 1*2 + 2*4
        assert_eq!(b.run(&g, &net).unwrap().cost.total, 20.0, "{b:?}");
    }
}

#[test]
fn hand_built_topology_embeds() {
    let (g, net) = instance(8, 5, 5, 1, 2, 1.0);
    let root = planar(&g, net.root);
    let topo = Topology {
        nodes: vec![
            TopoNode { id: 0, x: root.0, y: root.1, kind: TopoKind::Root },
            TopoNode { id: 1, x: root.0, y: root.1, kind: TopoKind::Steiner },
            TopoNode { id: 2, x: 0, y: 0, kind: TopoKind::Sink(0) },
            TopoNode { id: 3, x: 0, y: 0, kind: TopoKind::Sink(1) },
        ],
        edges: vec![(0, 1), (1, 2), (1, 3)],
    };
    topo.validate(&net).unwrap();
    let tree = embed_topology_optimal(&g, &net, &topo).unwrap();
    tree.validate(&g, &net).unwrap();
}
