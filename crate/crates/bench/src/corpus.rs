//! Seeded instance corpora: a directory of instance files plus a CSV
//! manifest `manifest.csv` with one row per instance.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cdsteiner::generate::{generate_grid_instance, CongestionProfile, GridSpec, WeightProfile};
use cdsteiner::io::{read_instance, write_instance};
use cdsteiner::{NetInstance, RoutingGraph};

use crate::error::{BenchError, Result};
use crate::params::Overrides;

pub const MANIFEST: &str = "manifest.csv";
const MANIFEST_HEADER: &str = "id,file,seed,sinks,t,grid";

/// Grid dimensions written as `WxHxL`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub layers: usize,
}

impl FromStr for Grid {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split('x')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| BenchError::Usage(format!("grid must look like 32x32x4, got '{s}'")))?;
        match parts[..] {
            [width, height, layers] if width >= 2 && height >= 2 && layers >= 1 => Ok(Grid { width, height, layers }),
            _ => Err(BenchError::Usage(format!("grid must look like 32x32x4 with sides >= 2, got '{s}'"))),
        }
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.layers)
    }
}

/// Sink count `n` or an inclusive range `a-b`, cycled over instance ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SinkRange {
    pub min: usize,
    pub max: usize,
}

impl SinkRange {
    pub fn for_instance(&self, id: usize) -> usize {
        self.min + id % (self.max - self.min + 1)
    }
}

impl FromStr for SinkRange {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || BenchError::Usage(format!("--sinks must be a positive count or a range a-b, got '{s}'"));
        let (min, max) = match s.split_once('-') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let n = s.trim().parse().map_err(|_| bad())?;
                (n, n)
            }
        };
        if min == 0 || max < min {
            return Err(bad());
        }
        Ok(SinkRange { min, max })
    }
}

pub fn parse_congestion(s: &str) -> Result<CongestionProfile> {
    match s {
        "uniform" => Ok(CongestionProfile::Uniform),
        "hotspots" => Ok(CongestionProfile::Hotspots),
        _ => Err(BenchError::Usage(format!("congestion must be uniform or hotspots, got '{s}'"))),
    }
}

pub fn parse_weights(s: &str) -> Result<WeightProfile> {
    match s {
        "unit" => Ok(WeightProfile::Unit),
        "lognormal" => Ok(WeightProfile::LogNormal),
        _ => Err(BenchError::Usage(format!("weights must be unit or lognormal, got '{s}'"))),
    }
}

#[derive(Clone, Debug)]
pub struct GenOptions {
    pub count: usize,
    pub sinks: SinkRange,
    pub grid: Grid,
    pub wire_types: usize,
    pub congestion: CongestionProfile,
    pub weights: WeightProfile,
    pub weight_scale: f64,
    pub d_bif: f64,
    pub eta: f64,
    /// Instance `i` is generated from seed `seed + i`.
    pub seed: u64,
}

impl GenOptions {
    /// The profile used for the large comparison corpus: hotspot congestion,
    /// two wire types, lognormal weights scaled so that delay and congestion
    /// cost are of similar magnitude.
    pub fn comparison(count: usize, sinks: SinkRange, seed: u64) -> Self {
        Self {
            count,
            sinks,
            grid: Grid { width: 32, height: 32, layers: 4 },
            wire_types: 2,
            congestion: CongestionProfile::Hotspots,
            weights: WeightProfile::LogNormal,
            weight_scale: 0.05,
            d_bif: 1.0,
            eta: 0.25,
            seed,
        }
    }

    pub fn spec(&self, id: usize) -> GridSpec {
        GridSpec {
            wire_types: self.wire_types,
            congestion: self.congestion,
            weights: self.weights,
            weight_scale: self.weight_scale,
            d_bif: self.d_bif,
            eta: self.eta,
            ..GridSpec::new(
                self.seed.wrapping_add(id as u64),
                self.grid.width,
                self.grid.height,
                self.grid.layers,
                self.sinks.for_instance(id),
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub id: usize,
    pub file: String,
    pub seed: u64,
    pub sinks: usize,
    pub grid: String,
}

impl ManifestEntry {
    /// Terminal count, root included.
    pub fn t(&self) -> usize {
        self.sinks + 1
    }
}

pub struct Instance {
    pub entry: ManifestEntry,
    pub graph: RoutingGraph,
    pub net: NetInstance,
}

fn instance_file(id: usize) -> String {
    format!("inst_{id:05}.json")
}

/// Writes `count` instances and the manifest into `dir`.
pub fn generate_corpus(opts: &GenOptions, dir: &Path) -> Result<Vec<ManifestEntry>> {
    if opts.count == 0 {
        return Err(BenchError::Usage("--count must be at least 1".into()));
    }
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(opts.count);
    for id in 0..opts.count {
        let spec = opts.spec(id);
        let (graph, net) = generate_grid_instance(&spec).map_err(|e| match e {
            cdsteiner::Error::Parameter(m) | cdsteiner::Error::InvalidInstance(m) => BenchError::Usage(m),
            other => BenchError::Algorithm { id, algo: "gen", source: other },
        })?;
        let file = instance_file(id);
        write_instance(&graph, &net, dir.join(&file)).map_err(|source| BenchError::Input {
            path: dir.join(&file).display().to_string(),
            source,
        })?;
        entries.push(ManifestEntry {
            id,
            file,
            seed: spec.seed,
            sinks: net.sinks.len(),
            grid: opts.grid.to_string(),
        });
    }
    fs::write(dir.join(MANIFEST), render_manifest(&entries))?;
    Ok(entries)
}

pub fn render_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for e in entries {
        let _ = writeln!(out, "{},{},{},{},{},{}", e.id, e.file, e.seed, e.sinks, e.t(), e.grid);
    }
    out
}

fn parse_manifest(path: &Path, text: &str) -> Result<Vec<ManifestEntry>> {
    let bad = |line: usize, msg: &str| BenchError::Input {
        path: path.display().to_string(),
        source: cdsteiner::Error::Parse { line, column: 1, message: msg.to_string() },
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == MANIFEST_HEADER => {}
        _ => return Err(bad(1, "missing manifest header")),
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(i + 1, "expected 6 fields"));
        }
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(i + 1, "malformed number"));
        entries.push(ManifestEntry {
            id: num(f[0])? as usize,
            file: f[1].trim().to_string(),
            seed: num(f[2])?,
            sinks: num(f[3])? as usize,
            grid: f[5].trim().to_string(),
        });
    }
    Ok(entries)
}

/// Loads a corpus directory, or a single instance file as a one-instance
/// corpus with id 0. Instances come back in id order.
pub fn load_corpus(path: &Path, overrides: &Overrides) -> Result<Vec<Instance>> {
    let read = |file: &Path| {
        read_instance(file).map_err(|source| BenchError::Input {
            path: file.display().to_string(),
            source,
        })
    };
    let fix = |file: &Path, graph: &RoutingGraph, net: &mut NetInstance| {
        overrides.apply(graph, net).map_err(|source| match source {
            cdsteiner::Error::InvalidInstance(m) => BenchError::Usage(m),
            source => BenchError::Input { path: file.display().to_string(), source },
        })
    };
    if path.is_file() {
        let (graph, mut net) = read(path)?;
        fix(path, &graph, &mut net)?;
        let entry = ManifestEntry {
            id: 0,
            file: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            seed: 0,
            sinks: net.sinks.len(),
            grid: String::new(),
        };
        return Ok(vec![Instance { entry, graph, net }]);
    }
    let manifest: PathBuf = path.join(MANIFEST);
    if !manifest.is_file() {
        return Err(BenchError::Input {
            path: path.display().to_string(),
            source: cdsteiner::Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no instance file or corpus manifest found",
            )),
        });
    }
    let text = fs::read_to_string(&manifest)?;
    let mut entries = parse_manifest(&manifest, &text)?;
    entries.sort_by_key(|e| e.id);
    entries
        .into_iter()
        .map(|entry| {
            let file = path.join(&entry.file);
            let (graph, mut net) = read(&file)?;
            fix(&file, &graph, &mut net)?;
            Ok(Instance { entry, graph, net })
        })
        .collect()
}
