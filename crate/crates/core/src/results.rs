//! Result files: one `[cluster.i]` section per detected cluster plus a
//! `[run]` section echoing the effective configuration.

use std::path::Path;

use crate::doc::{Document, Section};
use crate::error::{Error, Result};
use crate::graph::{AttributeSubset, IndexSet, NodeSubset};
use crate::pursuit::SubspaceCluster;

/// A cluster as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterRecord {
    pub nodes: NodeSubset,
    pub attributes: AttributeSubset,
    pub score: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: Vec<f64>,
    pub step_norms: Vec<f64>,
}

impl From<&SubspaceCluster> for ClusterRecord {
    fn from(c: &SubspaceCluster) -> Self {
        ClusterRecord {
            nodes: c.nodes.clone(),
            attributes: c.attributes.clone(),
            score: c.score,
            converged: c.converged,
            iterations: c.iterations_used,
            objective: c.diagnostics.objective_trace.clone(),
            step_norms: c.diagnostics.step_norm_trace.clone(),
        }
    }
}

fn cluster_name(i: usize) -> String {
    format!("cluster.{i}")
}

pub fn result_document(run: Section, clusters: &[ClusterRecord]) -> Document {
    let mut doc = Document::new();
    doc.push(run);
    doc.section_mut("run").set("clusters", clusters.len());
    for (i, c) in clusters.iter().enumerate() {
        doc.section_mut(&cluster_name(i))
            .set_list("nodes", c.nodes.iter())
            .set_list("attributes", c.attributes.iter())
            .set("score", c.score)
            .set("converged", c.converged)
            .set("iterations", c.iterations)
            .set_list("objective", &c.objective)
            .set_list("step_norms", &c.step_norms);
    }
    doc
}

pub fn parse_result(doc: &Document) -> Result<(Section, Vec<ClusterRecord>)> {
    let run = doc.require_section("run")?.clone();
    let count: usize = run.parse("clusters")?;
    let mut clusters = Vec::with_capacity(count);
    for i in 0..count {
        let s = doc.require_section(&cluster_name(i))?;
        clusters.push(ClusterRecord {
            nodes: IndexSet::new(s.parse_list::<usize>("nodes")?),
            attributes: IndexSet::new(s.parse_list::<usize>("attributes")?),
            score: s.parse("score")?,
            converged: s.parse("converged")?,
            iterations: s.parse("iterations")?,
            objective: s.parse_list("objective")?,
            step_norms: s.parse_list("step_norms")?,
        });
    }
    Ok((run, clusters))
}

pub fn read_result(path: &Path) -> Result<(Section, Vec<ClusterRecord>)> {
    parse_result(&Document::read(path)?).map_err(|e| match e {
        Error::Config(m) => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: m,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rec = ClusterRecord {
            nodes: IndexSet::new([3, 1]),
            attributes: IndexSet::new([0]),
            score: 0.1 + 0.2,
            converged: false,
            iterations: 7,
            objective: vec![1.0 / 3.0, -2.5e-300],
            step_norms: vec![],
        };
        let mut run = Section::new("run");
        run.set("score", "fisher");
        let doc = result_document(run, &[rec.clone(), rec.clone()]);
        let text = doc.render();
        let back = Document::parse_str(&text, Path::new("mem")).unwrap();
        let (run, clusters) = parse_result(&back).unwrap();
        assert_eq!(run.get("score"), Some("fisher"));
        assert_eq!(clusters, vec![rec.clone(), rec]);
    }
}
