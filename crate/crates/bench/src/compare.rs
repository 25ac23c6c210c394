//! Four-way comparison: relative increase of each algorithm over the best
//! of the four on every instance, aggregated per sink-count bucket.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::Instance;
use crate::error::{BenchError, Result};
use crate::params::{run_algo, Algo, AlgoParams};

/// Sink-count buckets `(label, min, max)`, inclusive.
pub const BUCKETS: [(&str, usize, usize); 5] = [
    ("1-2", 1, 2),
    ("3-5", 3, 5),
    ("6-14", 6, 14),
    ("15-29", 15, 29),
    (">=30", 30, usize::MAX),
];

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceResult {
    pub id: usize,
    pub sinks: usize,
    /// Recomputed objective values in `Algo::COMPARED` order.
    pub totals: [f64; 4],
}

impl InstanceResult {
    /// Percent increase of each algorithm over the instance minimum.
    pub fn increases(&self) -> [f64; 4] {
        let best = self.totals.iter().copied().fold(f64::INFINITY, f64::min);
        self.totals.map(|v| {
            if v == best {
                0.0
            } else if best > 0.0 {
                100.0 * (v / best - 1.0)
            } else {
                f64::INFINITY
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketRow {
    pub bucket: &'static str,
    pub count: usize,
    pub mean_increase: [f64; 4],
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Usage(format!("cannot start {threads} worker threads: {e}")))
}

/// Runs the four algorithms on every instance. Results are in corpus order
/// regardless of the worker count.
pub fn run_comparison(corpus: &[Instance], params: &AlgoParams, threads: usize) -> Result<Vec<InstanceResult>> {
    params.check()?;
    thread_pool(threads)?.install(|| {
        corpus
            .par_iter()
            .map(|inst| {
                let mut totals = [0.0; 4];
                for (slot, algo) in totals.iter_mut().zip(Algo::COMPARED) {
                    let (_, cost) = run_algo(algo, &inst.graph, &inst.net, params).map_err(|source| {
                        BenchError::Algorithm { id: inst.entry.id, algo: algo.name(), source }
                    })?;
                    *slot = cost.total;
                }
                Ok(InstanceResult { id: inst.entry.id, sinks: inst.net.sinks.len(), totals })
            })
            .collect()
    })
}

/// Mean increase per non-empty bucket, followed by an `all` row.
pub fn bucket_table(results: &[InstanceResult]) -> Vec<BucketRow> {
    let mean = |rows: &[&InstanceResult]| {
        let mut sum = [0.0; 4];
        for r in rows {
            for (s, x) in sum.iter_mut().zip(r.increases()) {
                *s += x;
            }
        }
        sum.map(|s| s / rows.len() as f64)
    };
    let mut table = Vec::new();
    for (label, lo, hi) in BUCKETS {
        let rows: Vec<&InstanceResult> = results.iter().filter(|r| (lo..=hi).contains(&r.sinks)).collect();
        if !rows.is_empty() {
            table.push(BucketRow { bucket: label, count: rows.len(), mean_increase: mean(&rows) });
        }
    }
    if !results.is_empty() {
        let rows: Vec<&InstanceResult> = results.iter().collect();
        table.push(BucketRow { bucket: "all", count: rows.len(), mean_increase: mean(&rows) });
    }
    table
}

pub fn render_table(table: &[BucketRow]) -> String {
    let mut out = String::from("bucket,count");
    for a in Algo::COMPARED {
        let _ = write!(out, ",{}_pct", a.name());
    }
    out.push('\n');
    for row in table {
        let _ = write!(out, "{},{}", row.bucket, row.count);
        for x in row.mean_increase {
            let _ = write!(out, ",{x:.4}");
        }
        out.push('\n');
    }
    out
}

pub fn render_instances(results: &[InstanceResult]) -> String {
    let mut out = String::from("id,sinks");
    for a in Algo::COMPARED {
        let _ = write!(out, ",{}_total", a.name());
    }
    for a in Algo::COMPARED {
        let _ = write!(out, ",{}_pct", a.name());
    }
    out.push('\n');
    for r in results {
        let _ = write!(out, "{},{}", r.id, r.sinks);
        for x in r.totals {
            let _ = write!(out, ",{x:.6}");
        }
        for x in r.increases() {
            let _ = write!(out, ",{x:.4}");
        }
        out.push('\n');
    }
    out
}
