//! Reading and writing networks.
//!
//! Edge file: one edge per line, two whitespace-separated 0-based node
//! indices; lines starting with `#` are comments. Attribute file: one line
//! per node with `p` whitespace-separated reals, optionally preceded by a
//! `#` header line. The node count is the number of attribute rows.

use std::fmt::Write as _;
use std::path::Path;

use crate::doc::Document;
use crate::error::{Error, Result};
use crate::graph::AttributedNetwork;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn parse_edges(text: &str, origin: &Path) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.len() {
            2 => {}
            3 => {
                return Err(parse_error(
                    origin,
                    i + 1,
                    "weighted edges are not supported",
                ))
            }
            _ => return Err(parse_error(origin, i + 1, "expected two node indices")),
        }
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| parse_error(origin, i + 1, format!("bad node index {t:?}")))
        };
        edges.push((parse(tokens[0])?, parse(tokens[1])?));
    }
    Ok(edges)
}

pub fn parse_attributes(text: &str, origin: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_error(origin, i + 1, format!("bad attribute value {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    origin,
                    i + 1,
                    format!("row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads and validates a network from an edge file and an attribute file.
pub fn load_network(edge_file: &Path, attribute_file: &Path) -> Result<AttributedNetwork> {
    let edges = parse_edges(&read(edge_file)?, edge_file)?;
    let rows = parse_attributes(&read(attribute_file)?, attribute_file)?;
    let n = rows.len();
    if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u.max(v) >= n && u != v) {
        return Err(Error::Validation(format!(
            "edge ({u}, {v}) references a node without an attribute row ({n} rows in {})",
            attribute_file.display()
        )));
    }
    AttributedNetwork::new(n, edges, rows)
}

pub fn render_edges(net: &AttributedNetwork) -> String {
    let mut out = format!("# {} nodes, {} edges\n", net.node_count(), net.edge_count());
    for &(u, v) in net.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn render_attributes(net: &AttributedNetwork) -> String {
    let mut out = format!("# {} x {}\n", net.node_count(), net.attribute_count());
    for v in 0..net.node_count() {
        let row: Vec<String> = net.row(v).iter().map(f64::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_network(
    net: &AttributedNetwork,
    edge_file: &Path,
    attribute_file: &Path,
) -> Result<()> {
    std::fs::write(edge_file, render_edges(net)).map_err(|e| Error::io(edge_file, e))?;
    std::fs::write(attribute_file, render_attributes(net)).map_err(|e| Error::io(attribute_file, e))
}

/// Key-value summary: sizes and degree statistics.
pub fn network_summary(net: &AttributedNetwork) -> Document {
    let degrees = net.degrees();
    let n = degrees.len() as f64;
    let mean = degrees.iter().sum::<usize>() as f64 / n;
    let var = degrees
        .iter()
        .map(|&d| (d as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    let mut doc = Document::new();
    doc.section_mut("network")
        .set("nodes", net.node_count())
        .set("attributes", net.attribute_count())
        .set("edges", net.edge_count())
        .set("components", net.component_labels().1)
        .set("degree_min", degrees.iter().min().copied().unwrap_or(0))
        .set("degree_max", degrees.iter().max().copied().unwrap_or(0))
        .set("degree_mean", mean)
        .set("degree_std", var.sqrt());
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn loads_path_network() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "# path\n0 1\n1 2\n");
        let a = write(dir.path(), "a.txt", "# header\n1 2\n3 4\n5 6\n");
        let net = load_network(&e, &a).unwrap();
        assert_eq!((net.node_count(), net.attribute_count()), (3, 2));
        assert_eq!(net.degrees(), vec![1, 2, 1]);
        assert_eq!(net.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn row_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "0 1\n1 2\n");
        let a = write(dir.path(), "a.txt", "1 2\n3 4\n");
        assert!(matches!(load_network(&e, &a), Err(Error::Validation(_))));
    }

    #[test]
    fn self_loop_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "0 1\n5 5\n");
        let a = write(dir.path(), "a.txt", &"0\n".repeat(6));
        let err = load_network(&e, &a).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn malformed_lines() {
        let p = Path::new("x");
        assert!(parse_edges("0 1 2.5\n", p).is_err());
        assert!(parse_edges("0 a\n", p).is_err());
        assert!(parse_attributes("1 2\n3\n", p).is_err());
        assert!(parse_attributes("1 zz\n", p).is_err());
    }

    #[test]
    fn summary_fields() {
        let net = AttributedNetwork::new(3, [(0, 1), (1, 2)], vec![vec![0.0]; 3]).unwrap();
        let doc = network_summary(&net);
        let s = doc.section("network").unwrap();
        assert_eq!(s.parse::<usize>("edges").unwrap(), 2);
        assert_eq!(s.parse::<usize>("degree_max").unwrap(), 2);
    }
}
