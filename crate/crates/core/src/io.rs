//! Instance file format (JSON, version 1).
//!
//! ```text
//! {
//!   "version": 1,
//!   "graph": {"vertices": [[x, y, layer], ...], "edges": [[u, v, cost, delay, wire_type], ...]},
//!   "net": {"root": vertex, "sinks": [[vertex, weight], ...]},
//!   "params": {"d_bif": f, "eta": f}
//! }
//! ```
//!
//! Edge order in the file defines edge indices. The writer puts one vertex or
//! edge per line so that parse diagnostics point at a useful line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, NetInstance, RoutingGraph, Sink, Vertex};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[allow(dead_code)]
    version: u64,
    graph: GraphSection,
    net: NetSection,
    params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphSection {
    vertices: Vec<(i32, i32, u32)>,
    edges: Vec<(usize, usize, f64, f64, u32)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetSection {
    root: usize,
    sinks: Vec<(usize, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    d_bif: f64,
    eta: f64,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn instance_from_str(text: &str) -> Result<(RoutingGraph, NetInstance)> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(parse_error)?;
    if probe.version != FORMAT_VERSION {
        return Err(Error::UnknownVersion(probe.version));
    }
    let file: InstanceFile = serde_json::from_str(text).map_err(parse_error)?;
    let vertices = file
        .graph
        .vertices
        .into_iter()
        .map(|(x, y, layer)| Vertex::new(x, y, layer))
        .collect();
    let edges = file
        .graph
        .edges
        .into_iter()
        .map(|(u, v, cost, delay, wire_type)| Edge {
            u,
            v,
            cost,
            delay,
            wire_type,
        })
        .collect();
    let graph = RoutingGraph::new(vertices, edges)?;
    let net = NetInstance {
        root: file.net.root,
        sinks: file
            .net
            .sinks
            .into_iter()
            .map(|(vertex, weight)| Sink { vertex, weight })
            .collect(),
        d_bif: file.params.d_bif,
        eta: file.params.eta,
    };
    net.validate(&graph)?;
    Ok((graph, net))
}

fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("finite float")
}

pub fn instance_to_string(graph: &RoutingGraph, net: &NetInstance) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"version\": {FORMAT_VERSION},");
    out.push_str("  \"graph\": {\n    \"vertices\": [\n");
    let nv = graph.vertex_count();
    for (i, v) in graph.vertices().iter().enumerate() {
        let sep = if i + 1 < nv { "," } else { "" };
        let _ = writeln!(out, "      [{}, {}, {}]{sep}", v.x, v.y, v.layer);
    }
    out.push_str("    ],\n    \"edges\": [\n");
    let ne = graph.edge_count();
    for (i, e) in graph.edges().iter().enumerate() {
        let sep = if i + 1 < ne { "," } else { "" };
        let _ = writeln!(
            out,
            "      [{}, {}, {}, {}, {}]{sep}",
            e.u,
            e.v,
            num(e.cost),
            num(e.delay),
            e.wire_type
        );
    }
    out.push_str("    ]\n  },\n");
    let _ = writeln!(out, "  \"net\": {{\n    \"root\": {},\n    \"sinks\": [", net.root);
    for (i, s) in net.sinks.iter().enumerate() {
        let sep = if i + 1 < net.sinks.len() { "," } else { "" };
        let _ = writeln!(out, "      [{}, {}]{sep}", s.vertex, num(s.weight));
    }
    out.push_str("    ]\n  },\n");
    let _ = writeln!(
        out,
        "  \"params\": {{\"d_bif\": {}, \"eta\": {}}}",
        num(net.d_bif),
        num(net.eta)
    );
    out.push_str("}\n");
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<(RoutingGraph, NetInstance)> {
    let text = fs::read_to_string(path)?;
    instance_from_str(&text)
}

pub fn write_instance(graph: &RoutingGraph, net: &NetInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instance_to_string(graph, net))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_grid_instance, CongestionProfile, GridSpec, WeightProfile};

    #[test]
    fn round_trip_through_file() {
        let (g, net) = generate_grid_instance(&GridSpec::new(1, 3, 3, 1, 1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        write_instance(&g, &net, &path).unwrap();
        let (g2, net2) = read_instance(&path).unwrap();
        assert_eq!(g, g2);
        assert_eq!(net, net2);
    }

    #[test]
    fn round_trip_keeps_irregular_floats() {
        let mut spec = GridSpec::new(5, 5, 4, 3, 6);
        spec.congestion = CongestionProfile::Hotspots;
        spec.weights = WeightProfile::LogNormal;
        spec.d_bif = 0.1;
        spec.eta = 0.3;
        let (mut g, mut net) = generate_grid_instance(&spec).unwrap();
        net.sinks[0].weight = 1e-15;
        let mut edges = g.edges().to_vec();
        edges[0].cost = 0.1 + 0.2;
        g = RoutingGraph::new(g.vertices().to_vec(), edges).unwrap();
        let text = instance_to_string(&g, &net);
        let (g2, net2) = instance_from_str(&text).unwrap();
        assert_eq!(g, g2);
        assert_eq!(net, net2);
        assert_eq!(text, instance_to_string(&g2, &net2));
    }

    #[test]
    fn negative_cost_names_the_edge() {
        let (g, net) = generate_grid_instance(&GridSpec::new(1, 3, 3, 1, 1)).unwrap();
        let text = instance_to_string(&g, &net);
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let first_edge = lines.iter().position(|l| l.contains("\"edges\"")).unwrap() + 3;
        lines[first_edge] = "      [1, 2, -1.0, 1.0, 0],".into();
        let err = instance_from_str(&lines.join("\n")).unwrap_err();
        assert!(err.to_string().contains("edge 2"), "{err}");
    }

    #[test]
    fn eta_out_of_range() {
        let (g, mut net) = generate_grid_instance(&GridSpec::new(1, 3, 3, 1, 1)).unwrap();
        net.eta = 0.7;
        let err = instance_from_str(&instance_to_string(&g, &net)).unwrap_err();
        assert!(err.to_string().contains("eta out of [0, 1/2]"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let (g, net) = generate_grid_instance(&GridSpec::new(1, 3, 3, 1, 1)).unwrap();
        let text = instance_to_string(&g, &net).replace("[0, 0, 0],", "[0, 0 0],");
        match instance_from_str(&text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other}"),
        }
        let text = instance_to_string(&g, &net).replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(instance_from_str(&text), Err(Error::UnknownVersion(2))));
    }
}
