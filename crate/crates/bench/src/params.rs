//! Algorithm selection and the knobs shared by every subcommand.

use std::str::FromStr;

use cdsteiner::baselines::Baseline;
use cdsteiner::solver::{solve, SolverConfig};
use cdsteiner::tree::evaluate_cost;
use cdsteiner::{CostBreakdown, EmbeddedTree, NetInstance, RoutingGraph};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Cd,
    L1,
    Sl,
    Pd,
    Oracle,
}

impl Algo {
    /// The four algorithms of a comparison table, in column order.
    pub const COMPARED: [Algo; 4] = [Algo::Cd, Algo::L1, Algo::Sl, Algo::Pd];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Cd => "cd",
            Algo::L1 => "l1",
            Algo::Sl => "sl",
            Algo::Pd => "pd",
            Algo::Oracle => "oracle",
        }
    }
}

impl FromStr for Algo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" => Ok(Algo::Cd),
            "l1" => Ok(Algo::L1),
            "sl" => Ok(Algo::Sl),
            "pd" => Ok(Algo::Pd),
            "oracle" => Ok(Algo::Oracle),
            _ => Err(BenchError::Usage(format!("unknown algorithm '{s}' (cd|l1|sl|pd|oracle)"))),
        }
    }
}

/// Parses `discount,heap2,astar,reposition,rootbonus`, `all` or `none`
/// into a solver configuration.
pub fn parse_enhancements(list: &str) -> Result<SolverConfig> {
    let list = list.trim();
    match list {
        "all" => return Ok(SolverConfig::all(true)),
        "none" | "" => return Ok(SolverConfig::all(false)),
        _ => {}
    }
    let mut config = SolverConfig::all(false);
    for item in list.split(',').map(str::trim) {
        match item {
            "discount" => config.discount_components = true,
            "heap2" => config.two_level_heap = true,
            "astar" => config.astar = true,
            "reposition" => config.reposition_steiner = true,
            "rootbonus" => config.root_bonus = true,
            _ => {
                return Err(BenchError::Usage(format!(
                    "unknown enhancement '{item}' (discount,heap2,astar,reposition,rootbonus|all|none)"
                )))
            }
        }
    }
    Ok(config)
}

#[derive(Clone, Copy, Debug)]
pub struct AlgoParams {
    pub solver: SolverConfig,
    /// Shallow-light slack.
    pub epsilon: f64,
    /// Prim-Dijkstra tradeoff.
    pub gamma: f64,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            epsilon: 0.2,
            gamma: 0.5,
        }
    }
}

impl AlgoParams {
    pub fn check(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(BenchError::Usage(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(BenchError::Usage(format!("--gamma must lie in [0, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Instance parameters forced from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub d_bif: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, graph: &RoutingGraph, net: &mut NetInstance) -> cdsteiner::Result<()> {
        if let Some(eta) = self.eta {
            net.eta = eta;
        }
        if let Some(d) = self.d_bif {
            net.d_bif = d;
        }
        net.validate(graph)
    }
}

/// Runs one algorithm and returns its tree together with an independently
/// recomputed cost breakdown.
pub fn run_algo(
    algo: Algo,
    graph: &RoutingGraph,
    net: &NetInstance,
    params: &AlgoParams,
) -> cdsteiner::Result<(EmbeddedTree, CostBreakdown)> {
    let tree = match algo {
        Algo::Cd => solve(graph, net, &params.solver)?,
        Algo::L1 => Baseline::L1.run(graph, net)?,
        Algo::Sl => Baseline::ShallowLight { epsilon: params.epsilon }.run(graph, net)?,
        Algo::Pd => Baseline::PrimDijkstra { gamma: params.gamma }.run(graph, net)?,
        Algo::Oracle => cdsteiner::oracle::exact_opt(graph, net)?.0,
    };
    let cost = evaluate_cost(graph, net, &tree)?;
    Ok((tree, cost))
}
