//! Invariant suites run over a corpus. Each suite reports pass, skip (not
//! applicable to the instance) or a violation with details.

use std::fmt::Write as _;

use rayon::prelude::*;

use cdsteiner::baselines::embed_topology_optimal;
use cdsteiner::dijkstra::cost_distance_sssp;
use cdsteiner::oracle::{enumerate_topologies, exact_opt, pairwise_l_reference, EXACT_MAX_SINKS};
use cdsteiner::penalty::{optimal_lambda, PenaltyParams};
use cdsteiner::solver::{solve_traced, SolverConfig};
use cdsteiner::tree::evaluate_cost;
use cdsteiner::{NetInstance, RoutingGraph};

use crate::compare::thread_pool;
use crate::corpus::Instance;
use crate::error::Result;
use crate::params::{run_algo, Algo, AlgoParams};

pub const SUITES: [&str; 5] = [
    "pair-minimality",
    "oracle-ratio",
    "astar-neutrality",
    "heap-transparency",
    "embedding-optimality",
];

/// Largest terminal count (root included) checked for pair minimality.
pub const PAIR_CHECK_MAX_T: usize = 8;
pub const REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Skip,
    Violation(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub id: usize,
    pub suite: &'static str,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn violations(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| matches!(f.outcome, Outcome::Violation(_)))
    }

    pub fn passed(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("id,suite,status,detail\n");
        for f in &self.findings {
            let (status, detail) = match &f.outcome {
                Outcome::Pass => ("pass", ""),
                Outcome::Skip => ("skip", ""),
                Outcome::Violation(d) => ("violation", d.as_str()),
            };
            let _ = writeln!(out, "{},{},{},{}", f.id, f.suite, status, detail.replace(',', ";"));
        }
        let checked = self.findings.iter().filter(|f| f.outcome != Outcome::Skip).count();
        let _ = writeln!(out, "summary,{checked} checks,{} violations,", self.violations().count());
        out
    }
}

/// Approximation bound `2 * ceil(log_{4/3} t)` on the expected CD objective.
pub fn ratio_bound(t: usize) -> f64 {
    2.0 * ((t as f64).ln() / (4.0f64 / 3.0).ln()).ceil()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

pub fn verify_corpus(corpus: &[Instance], params: &AlgoParams, threads: usize) -> Result<VerifyReport> {
    params.check()?;
    let per_instance: Vec<Vec<Finding>> = thread_pool(threads)?.install(|| {
        corpus
            .par_iter()
            .map(|inst| {
                let (g, net) = (&inst.graph, &inst.net);
                let outcomes = [
                    pair_minimality(g, net, params),
                    oracle_ratio(g, net, params),
                    neutrality(g, net, params, |c| c.astar = true),
                    neutrality(g, net, params, |c| c.two_level_heap = !c.two_level_heap),
                    embedding_optimality(g, net),
                ];
                SUITES
                    .iter()
                    .zip(outcomes)
                    .map(|(&suite, outcome)| Finding { id: inst.entry.id, suite, outcome })
                    .collect()
            })
            .collect()
    });
    Ok(VerifyReport { findings: per_instance.into_iter().flatten().collect() })
}

fn failed(e: cdsteiner::Error) -> Outcome {
    Outcome::Violation(format!("run failed: {e}"))
}

fn pair_minimality(g: &RoutingGraph, net: &NetInstance, params: &AlgoParams) -> Outcome {
    if net.terminal_count() > PAIR_CHECK_MAX_T {
        return Outcome::Skip;
    }
    let config = SolverConfig::all(false).with_seed(params.solver.rng_seed);
    let pen = PenaltyParams { d_bif: net.d_bif, eta: net.eta, root_bonus: false };
    let sol = match solve_traced(g, net, &config) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    for it in &sol.trace {
        let Some((u, v, value)) = pairwise_l_reference(g, net.root, &it.active, &pen).choice(net.root) else {
            return Outcome::Violation(format!("iteration {}: reference found no pair", it.iteration));
        };
        if !close(it.value, value) || (it.u, it.v) != (u, v) {
            return Outcome::Violation(format!(
                "iteration {}: merged ({} {}) at {} but the minimum is ({u} {v}) at {value}",
                it.iteration, it.u, it.v, it.value
            ));
        }
    }
    Outcome::Pass
}

fn oracle_ratio(g: &RoutingGraph, net: &NetInstance, params: &AlgoParams) -> Outcome {
    if net.sinks.len() > EXACT_MAX_SINKS {
        return Outcome::Skip;
    }
    let opt = match exact_opt(g, net) {
        Ok((_, v)) => v,
        Err(e) => return failed(e),
    };
    for algo in Algo::COMPARED {
        let total = match run_algo(algo, g, net, params) {
            Ok((_, c)) => c.total,
            Err(e) => return failed(e),
        };
        if total < opt && !close(total, opt) {
            return Outcome::Violation(format!("{} objective {total} is below OPT {opt}", algo.name()));
        }
        if algo == Algo::Cd {
            let bound = ratio_bound(net.terminal_count());
            if total > bound * opt && !close(total, bound * opt) {
                return Outcome::Violation(format!("cd objective {total} exceeds {bound} * OPT {opt}"));
            }
        }
    }
    Outcome::Pass
}

/// Per-iteration hit values must not change when `tweak` switches a pure
/// speedup on. Discounting and repositioning stay off so that equally long
/// but different paths cannot alter later iterations.
fn neutrality(g: &RoutingGraph, net: &NetInstance, params: &AlgoParams, tweak: impl Fn(&mut SolverConfig)) -> Outcome {
    let mut base = params.solver;
    base.discount_components = false;
    base.reposition_steiner = false;
    base.astar = false;
    let mut probe = base;
    tweak(&mut probe);
    let (a, b) = match (solve_traced(g, net, &base), solve_traced(g, net, &probe)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return failed(e),
    };
    if a.trace.len() != b.trace.len() {
        return Outcome::Violation(format!("{} vs {} iterations", a.trace.len(), b.trace.len()));
    }
    for (x, y) in a.trace.iter().zip(&b.trace) {
        if !close(x.value, y.value) {
            return Outcome::Violation(format!("iteration {}: hit value {} became {}", x.iteration, x.value, y.value));
        }
    }
    Outcome::Pass
}

/// Single-bifurcation instances: the embedding DP against enumeration of
/// every Steiner position.
fn embedding_optimality(g: &RoutingGraph, net: &NetInstance) -> Outcome {
    if net.sinks.len() != 2 {
        return Outcome::Skip;
    }
    let shape = match enumerate_topologies(2) {
        Ok(mut t) => t.remove(0),
        Err(e) => return failed(e),
    };
    let dp = match embed_topology_optimal(g, net, &shape).and_then(|t| evaluate_cost(g, net, &t)) {
        Ok(c) => c.total,
        Err(e) => return failed(e),
    };
    let brute = match brute_force_single_bifurcation(g, net) {
        Ok(v) => v,
        Err(e) => return failed(e),
    };
    if close(dp, brute) {
        Outcome::Pass
    } else {
        Outcome::Violation(format!("embedding DP {dp} differs from position enumeration {brute}"))
    }
}

/// Minimum over Steiner positions `s` of the root-s-{a, b} tree cost.
pub fn brute_force_single_bifurcation(g: &RoutingGraph, net: &NetInstance) -> cdsteiner::Result<f64> {
    let [a, b] = [net.sinks[0], net.sinks[1]];
    let (la, lb) = optimal_lambda(a.weight, b.weight, net.eta)?;
    let trunk = cost_distance_sssp(g, net.root, a.weight + b.weight);
    let from_a = cost_distance_sssp(g, a.vertex, a.weight);
    let from_b = cost_distance_sssp(g, b.vertex, b.weight);
    let penalty = net.d_bif * (la * a.weight + lb * b.weight);
    Ok((0..g.vertex_count())
        .map(|s| trunk.dist[s] + from_a.dist[s] + from_b.dist[s] + penalty)
        .fold(f64::INFINITY, f64::min))
}
