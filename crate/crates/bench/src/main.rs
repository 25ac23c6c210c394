use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdsteiner::topology::Topology;
use cdsteiner_bench::compare::{bucket_table, render_instances, render_table, run_comparison};
use cdsteiner_bench::corpus::{generate_corpus, load_corpus, parse_congestion, parse_weights, GenOptions, Grid, SinkRange};
use cdsteiner_bench::params::{parse_enhancements, Algo, AlgoParams, Overrides};
use cdsteiner_bench::scale::{render_scale, run_scale, DEFAULT_TS};
use cdsteiner_bench::single::{render_oracle, render_solve, render_trace, run_oracle, run_solve};
use cdsteiner_bench::verify::{verify_corpus, Outcome};
use cdsteiner_bench::{BenchError, Result};

#[derive(Parser)]
#[command(name = "cdst", version, about = "Cost-distance Steiner trees: generate, solve, compare, verify")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed: instance seeds for `gen`, random choices for the solver.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the bifurcation split bound of every instance.
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Override the bifurcation delay of every instance.
    #[arg(long, global = true)]
    dbif: Option<f64>,
    /// discount,heap2,astar,reposition,rootbonus | all | none
    #[arg(long, global = true, default_value = "all")]
    enhancements: String,
    #[arg(long, global = true, default_value = "cd")]
    algo: String,
    /// Shallow-light slack.
    #[arg(long, global = true, default_value_t = 0.2)]
    epsilon: f64,
    /// Prim-Dijkstra tradeoff in [0, 1].
    #[arg(long, global = true, default_value_t = 0.5)]
    gamma: f64,
    /// Output file (corpus directory for `gen`); stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Report wall-clock times (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    /// Scales the A* heuristic; values above 1 break admissibility. Test hook.
    #[arg(long, global = true, hide = true, default_value_t = 1.0)]
    inflate_heuristic: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded corpus and its manifest.
    Gen {
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Sink count, or a range a-b cycled over instances.
        #[arg(long, default_value = "3")]
        sinks: String,
        /// WxHxL
        #[arg(long, default_value = "6x6x2")]
        grid: String,
        #[arg(long, default_value_t = 1)]
        wire_types: usize,
        /// uniform | hotspots
        #[arg(long, default_value = "uniform")]
        congestion: String,
        /// unit | lognormal
        #[arg(long, default_value = "unit")]
        weights: String,
        #[arg(long, default_value_t = 1.0)]
        weight_scale: f64,
    },
    /// Run one algorithm on an instance file or corpus.
    Solve {
        path: PathBuf,
        /// Also print the merge iterations as JSON lines.
        #[arg(long)]
        trace: bool,
        /// Write the embedded trees as JSON.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Write the abstract topologies as JSON.
        #[arg(long)]
        dump_topology: Option<PathBuf>,
    },
    /// Compare cd, l1, sl and pd over a corpus.
    Compare {
        path: PathBuf,
        /// Append per-instance rows.
        #[arg(long)]
        per_instance: bool,
    },
    /// Run the invariant suites; exit 3 on any violation.
    Verify { path: PathBuf },
    /// Exact optimum next to the chosen algorithm (at most 4 sinks).
    Oracle { path: PathBuf },
    /// Search effort over growing terminal counts on one grid.
    Scale {
        #[arg(long, default_value = "64x64x4")]
        grid: String,
        /// Comma separated terminal counts, root included.
        #[arg(long)]
        ts: Option<String>,
    },
}

fn params(g: &Global) -> Result<AlgoParams> {
    let mut solver = parse_enhancements(&g.enhancements)?.with_seed(g.seed);
    if !(g.inflate_heuristic.is_finite() && g.inflate_heuristic >= 0.0) {
        return Err(BenchError::Usage("heuristic scale must be nonnegative".into()));
    }
    solver.heuristic_scale = g.inflate_heuristic;
    let p = AlgoParams { solver, epsilon: g.epsilon, gamma: g.gamma };
    p.check()?;
    Ok(p)
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let overrides = Overrides { eta: g.eta, d_bif: g.dbif };
    let threads = g.threads;
    match cli.command {
        Command::Gen { count, sinks, grid, wire_types, congestion, weights, weight_scale } => {
            let opts = GenOptions {
                count,
                sinks: sinks.parse::<SinkRange>()?,
                grid: grid.parse::<Grid>()?,
                wire_types,
                congestion: parse_congestion(&congestion)?,
                weights: parse_weights(&weights)?,
                weight_scale,
                d_bif: g.dbif.unwrap_or(0.0),
                eta: g.eta.unwrap_or(0.5),
                seed: g.seed,
            };
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("corpus"));
            let entries = generate_corpus(&opts, &dir)?;
            println!("wrote {} instances to {}", entries.len(), dir.display());
        }
        Command::Solve { path, trace, tree, dump_topology } => {
            let algo: Algo = g.algo.parse()?;
            let corpus = load_corpus(&path, &overrides)?;
            let results = run_solve(&corpus, algo, &params(g)?, threads)?;
            let mut text = render_solve(&results, algo);
            if trace {
                text.push_str(&render_trace(&results));
            }
            if let Some(file) = tree {
                let trees: Vec<_> = results.iter().map(|r| &r.tree).collect();
                fs::write(file, serde_json::to_string(&trees).expect("trees serialize"))?;
            }
            if let Some(file) = dump_topology {
                let topos: Vec<Topology> = results
                    .iter()
                    .zip(&corpus)
                    .map(|(r, inst)| Topology::from_tree(&inst.graph, &r.tree))
                    .collect();
                fs::write(file, serde_json::to_string(&topos).expect("topologies serialize"))?;
            }
            emit(g, &text)?;
        }
        Command::Compare { path, per_instance } => {
            let corpus = load_corpus(&path, &overrides)?;
            let results = run_comparison(&corpus, &params(g)?, threads)?;
            let mut text = render_table(&bucket_table(&results));
            if per_instance {
                text.push_str(&render_instances(&results));
            }
            emit(g, &text)?;
        }
        Command::Verify { path } => {
            let corpus = load_corpus(&path, &overrides)?;
            let report = verify_corpus(&corpus, &params(g)?, threads)?;
            emit(g, &report.render())?;
            let first = report.violations().next().map(|v| match &v.outcome {
                Outcome::Violation(detail) => format!("instance {} {}: {detail}", v.id, v.suite),
                _ => unreachable!("violations() yields violations only"),
            });
            if let Some(msg) = first {
                return Err(BenchError::Invariant(msg));
            }
        }
        Command::Oracle { path } => {
            let algo: Algo = g.algo.parse()?;
            let corpus = load_corpus(&path, &overrides)?;
            let rows = run_oracle(&corpus, algo, &params(g)?, threads)?;
            emit(g, &render_oracle(&rows, algo))?;
        }
        Command::Scale { grid, ts } => {
            let ts: Vec<usize> = match ts {
                None => DEFAULT_TS.to_vec(),
                Some(list) => list
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| BenchError::Usage(format!("--ts must be a comma separated list, got '{list}'")))?,
            };
            let report = run_scale(grid.parse()?, &ts, g.seed, &params(g)?, threads)?;
            emit(g, &render_scale(&report, g.timing))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
