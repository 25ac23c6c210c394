use proptest::prelude::*;

use cdsteiner::dijkstra::cost_distance_sssp;
use cdsteiner::generate::{generate_grid_instance, CongestionProfile, GridSpec, WeightProfile};
use cdsteiner::graph::{NetInstance, RoutingGraph, Sink};
use cdsteiner::oracle::exact_opt;
use cdsteiner::solver::{solve, SolverConfig};
use cdsteiner::tree::{evaluate_cost, NodeRole};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn instance(seed: u64, w: usize, h: usize, l: usize, sinks: usize, d_bif: f64, eta: f64) -> (RoutingGraph, NetInstance) {
    let spec = GridSpec {
        congestion: CongestionProfile::Hotspots,
        weights: WeightProfile::LogNormal,
        wire_types: 2,
        d_bif,
        eta,
        ..GridSpec::new(seed, w, h, l, sinks)
    };
    generate_grid_instance(&spec).unwrap()
}

/// All-pairs distances under `c + weight d`.
fn floyd_warshall(g: &RoutingGraph, weight: f64) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.edges() {
        let len = e.cost + weight * e.delay;
        if len < d[e.u][e.v] {
            d[e.u][e.v] = len;
            d[e.v][e.u] = len;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Two sinks share one bifurcation: try it at every vertex.
fn brute_force_two_sinks(g: &RoutingGraph, net: &NetInstance) -> f64 {
    let (a, b) = (net.sinks[0], net.sinks[1]);
    let trunk = floyd_warshall(g, a.weight + b.weight);
    let da = floyd_warshall(g, a.weight);
    let db = floyd_warshall(g, b.weight);
    let (heavy, light) = (a.weight.max(b.weight), a.weight.min(b.weight));
    let penalty = if a.weight == b.weight {
        net.d_bif * a.weight
    } else {
        net.d_bif * (net.eta * heavy + (1.0 - net.eta) * light)
    };
    (0..g.vertex_count())
        .map(|s| trunk[net.root][s] + da[s][a.vertex] + db[s][b.vertex] + penalty)
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_sink_optimum_matches_brute_force(
        seed in 0u64..10_000,
        d_bif in 0.0f64..3.0,
        eta in prop::sample::select(vec![0.0, 0.25, 0.5]),
    ) {
        let (g, net) = instance(seed, 4, 4, 1, 2, d_bif, eta);
        let (tree, opt) = exact_opt(&g, &net).unwrap();
        prop_assert!(close(opt, brute_force_two_sinks(&g, &net)), "{} vs brute force", opt);
        prop_assert!(close(evaluate_cost(&g, &net, &tree).unwrap().total, opt));
    }

    /// Reordering the sinks changes neither the optimum nor the objective
    /// of a relabelled tree.
    #[test]
    fn sink_order_does_not_matter(seed in 0u64..10_000, sinks in 1usize..5, rotate in 0usize..4) {
        let (g, net) = instance(seed, 5, 4, 2, sinks, 1.5, 0.25);
        let k = net.sinks.len();
        let perm: Vec<usize> = (0..k).map(|i| (i + rotate) % k).collect();
        let mut shuffled = net.clone();
        shuffled.sinks = perm.iter().map(|&i| net.sinks[i]).collect();
        let (_, a) = exact_opt(&g, &net).unwrap();
        let (_, b) = exact_opt(&g, &shuffled).unwrap();
        prop_assert!(close(a, b), "{} vs {}", a, b);

        let tree = solve(&g, &net, &SolverConfig::default().with_seed(seed)).unwrap();
        let mut relabelled = tree.clone();
        for n in &mut relabelled.nodes {
            if let NodeRole::Sink(s) = n.role {
                n.role = NodeRole::Sink(perm.iter().position(|&p| p == s).unwrap());
            }
        }
        let before = evaluate_cost(&g, &net, &tree).unwrap().total;
        let after = evaluate_cost(&g, &shuffled, &relabelled).unwrap().total;
        prop_assert!(close(before, after));
        prop_assert!(a <= before + 1e-9 * before.max(1.0));
    }
}

#[test]
fn single_sink_without_bifurcations_is_a_shortest_path() {
    for seed in 0..20 {
        let (g, net) = instance(seed, 6, 5, 2, 1, 0.0, 0.5);
        let (_, opt) = exact_opt(&g, &net).unwrap();
        let sink = net.sinks[0];
        let sp = cost_distance_sssp(&g, net.root, sink.weight).dist[sink.vertex];
        assert!(close(opt, sp), "seed {seed}: {opt} vs {sp}");
    }
}

#[test]
fn sinks_on_the_root_cost_nothing() {
    let (g, mut net) = instance(1, 4, 4, 1, 2, 0.0, 0.5);
    net.sinks = vec![Sink { vertex: net.root, weight: 1.0 }, Sink { vertex: net.root, weight: 2.5 }];
    assert_eq!(exact_opt(&g, &net).unwrap().1, 0.0);
}

#[test]
fn too_many_sinks_are_rejected() {
    let (g, net) = instance(1, 5, 5, 1, 5, 1.0, 0.25);
    assert!(exact_opt(&g, &net).is_err());
}
