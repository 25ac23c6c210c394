//! Per-instance runs: `solve` with any algorithm and the `oracle` audit.

use std::fmt::Write as _;

use rayon::prelude::*;

use cdsteiner::oracle::exact_opt;
use cdsteiner::solver::{solve_traced, IterationTrace};
use cdsteiner::tree::evaluate_cost;
use cdsteiner::{CostBreakdown, EmbeddedTree};

use crate::compare::thread_pool;
use crate::corpus::Instance;
use crate::error::{BenchError, Result};
use crate::params::{run_algo, Algo, AlgoParams};
use crate::verify::ratio_bound;

pub struct SolveResult {
    pub id: usize,
    pub tree: EmbeddedTree,
    pub cost: CostBreakdown,
    /// Merge iterations, for the cost-distance algorithm only.
    pub trace: Vec<IterationTrace>,
}

pub fn run_solve(corpus: &[Instance], algo: Algo, params: &AlgoParams, threads: usize) -> Result<Vec<SolveResult>> {
    params.check()?;
    thread_pool(threads)?.install(|| {
        corpus
            .par_iter()
            .map(|inst| {
                let (g, net, id) = (&inst.graph, &inst.net, inst.entry.id);
                let err = |source| BenchError::Algorithm { id, algo: algo.name(), source };
                if algo == Algo::Cd {
                    let sol = solve_traced(g, net, &params.solver).map_err(err)?;
                    let cost = evaluate_cost(g, net, &sol.tree).map_err(err)?;
                    Ok(SolveResult { id, tree: sol.tree, cost, trace: sol.trace })
                } else {
                    let (tree, cost) = run_algo(algo, g, net, params).map_err(err)?;
                    Ok(SolveResult { id, tree, cost, trace: Vec::new() })
                }
            })
            .collect()
    })
}

pub fn render_solve(results: &[SolveResult], algo: Algo) -> String {
    let mut out = String::from("id,algo,connection_cost,weighted_wire_delay,weighted_bif_penalty,total\n");
    for r in results {
        let c = r.cost;
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            r.id,
            algo.name(),
            c.connection_cost,
            c.weighted_wire_delay,
            c.weighted_bif_penalty,
            c.total
        );
    }
    out
}

/// One JSON object per merge iteration, prefixed by the instance id.
pub fn render_trace(results: &[SolveResult]) -> String {
    let mut out = String::new();
    for r in results {
        for it in &r.trace {
            let json = serde_json::to_string(it).expect("trace serializes");
            let _ = writeln!(out, "{{\"instance\":{},\"iteration\":{json}}}", r.id);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub id: usize,
    pub sinks: usize,
    pub opt: f64,
    pub algo_total: f64,
    pub bound: f64,
}

impl OracleRow {
    pub fn ratio(&self) -> f64 {
        if self.opt > 0.0 {
            self.algo_total / self.opt
        } else if self.algo_total == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// Exact optimum per instance next to the objective of `algo`.
pub fn run_oracle(corpus: &[Instance], algo: Algo, params: &AlgoParams, threads: usize) -> Result<Vec<OracleRow>> {
    params.check()?;
    thread_pool(threads)?.install(|| {
        corpus
            .par_iter()
            .map(|inst| {
                let (g, net, id) = (&inst.graph, &inst.net, inst.entry.id);
                let (_, opt) = exact_opt(g, net).map_err(|source| BenchError::Algorithm { id, algo: "oracle", source })?;
                let (_, cost) =
                    run_algo(algo, g, net, params).map_err(|source| BenchError::Algorithm { id, algo: algo.name(), source })?;
                Ok(OracleRow { id, sinks: net.sinks.len(), opt, algo_total: cost.total, bound: ratio_bound(net.terminal_count()) })
            })
            .collect()
    })
}

pub fn render_oracle(rows: &[OracleRow], algo: Algo) -> String {
    let mut out = format!("id,sinks,opt,{}_total,ratio,bound\n", algo.name());
    for r in rows {
        let _ = writeln!(out, "{},{},{:.6},{:.6},{:.6},{}", r.id, r.sinks, r.opt, r.algo_total, r.ratio(), r.bound);
    }
    out
}
