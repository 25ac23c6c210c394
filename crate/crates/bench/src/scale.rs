//! Runtime scaling sweep: one fixed grid, growing terminal counts, search
//! effort per run and a fitted log-log slope.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use cdsteiner::generate::generate_grid_instance;
use cdsteiner::solver::solve_traced;

use crate::compare::thread_pool;
use crate::corpus::{GenOptions, Grid, SinkRange};
use crate::error::{BenchError, Result};
use crate::params::AlgoParams;

pub const DEFAULT_TS: [usize; 5] = [10, 20, 40, 80, 160];

#[derive(Clone, Debug, PartialEq)]
pub struct ScalePoint {
    /// Terminal count, root included.
    pub t: usize,
    pub labels_scanned: u64,
    pub heap_pushes: u64,
    pub restarts: u64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleReport {
    pub points: Vec<ScalePoint>,
    /// Fitted slope of ln(labels scanned) over ln t; `None` below two points.
    pub label_slope: Option<f64>,
    pub time_slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Solves one instance per `t` on the grid generated from `seed`. The grid
/// and its congestion are drawn before the terminals, so every `t` sees the
/// same graph.
pub fn run_scale(grid: Grid, ts: &[usize], seed: u64, params: &AlgoParams, threads: usize) -> Result<ScaleReport> {
    if ts.is_empty() || ts.iter().any(|&t| t < 2) {
        return Err(BenchError::Usage("every t must be at least 2".into()));
    }
    let points: Vec<ScalePoint> = thread_pool(threads)?.install(|| {
        ts.par_iter()
            .map(|&t| {
                let sinks = SinkRange { min: t - 1, max: t - 1 };
                let opts = GenOptions { grid, ..GenOptions::comparison(1, sinks, seed) };
                let (g, net) = generate_grid_instance(&opts.spec(0)).map_err(|e| BenchError::Usage(e.to_string()))?;
                let start = Instant::now();
                let sol = solve_traced(&g, &net, &params.solver)
                    .map_err(|source| BenchError::Algorithm { id: t, algo: "cd", source })?;
                Ok(ScalePoint {
                    t,
                    labels_scanned: sol.stats.labels_scanned,
                    heap_pushes: sol.stats.heap_pushes,
                    restarts: sol.stats.restarts,
                    wall_seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<_>>()
    })?;
    let xs: Vec<f64> = points.iter().map(|p| p.t as f64).collect();
    let labels: Vec<f64> = points.iter().map(|p| p.labels_scanned as f64).collect();
    let times: Vec<f64> = points.iter().map(|p| p.wall_seconds).collect();
    Ok(ScaleReport {
        label_slope: log_log_slope(&xs, &labels),
        time_slope: log_log_slope(&xs, &times),
        points,
    })
}

/// CSV report. Wall times vary between runs and appear only with `timing`.
pub fn render_scale(report: &ScaleReport, timing: bool) -> String {
    let mut out = String::from("t,labels_scanned,heap_pushes,restarts");
    if timing {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for p in &report.points {
        let _ = write!(out, "{},{},{},{}", p.t, p.labels_scanned, p.heap_pushes, p.restarts);
        if timing {
            let _ = write!(out, ",{:.3}", p.wall_seconds * 1e3);
        }
        out.push('\n');
    }
    if let Some(s) = report.label_slope {
        let _ = writeln!(out, "slope_labels,{s:.4}");
    }
    if let (true, Some(s)) = (timing, report.time_slope) {
        let _ = writeln!(out, "slope_time,{s:.4}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 20.0, 40.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&[10.0], &[5.0]), None);
    }
}
