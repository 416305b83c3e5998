use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::FormulaError;
use crate::error::ParseError;

/// Undirected simple graph with labeled vertices in a fixed enumeration
/// order, optionally split into blocks.
///
/// Vertices are addressed by their 0-based position in the enumeration; the
/// generators use the 1-based position as the vertex index in variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
    partition: Option<Vec<Vec<usize>>>,
}

impl Graph {
    pub fn new(labels: Vec<String>) -> Self {
        Graph {
            labels,
            edges: BTreeSet::new(),
            partition: None,
        }
    }

    /// Vertices labeled `1..=n`.
    pub fn with_vertices(n: usize) -> Self {
        Graph::new((1..=n).map(|i| i.to_string()).collect())
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::with_vertices(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n).expect("valid cycle edge");
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::with_vertices(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).expect("valid edge");
            }
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), FormulaError> {
        if u == v {
            return Err(FormulaError::InvalidGraph(format!("self-loop at vertex {u}")));
        }
        if u >= self.labels.len() || v >= self.labels.len() {
            return Err(FormulaError::InvalidGraph(format!("edge ({u},{v}) out of range")));
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn set_partition(&mut self, blocks: Vec<Vec<usize>>) -> Result<(), FormulaError> {
        let mut seen = vec![false; self.labels.len()];
        for &v in blocks.iter().flatten() {
            if v >= seen.len() || seen[v] {
                return Err(FormulaError::InvalidGraph(format!(
                    "partition blocks overlap or reference unknown vertex {v}"
                )));
            }
            seen[v] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(FormulaError::InvalidGraph(
                "partition does not cover every vertex".into(),
            ));
        }
        self.partition = Some(blocks);
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn partition(&self) -> Option<&[Vec<usize>]> {
        self.partition.as_deref()
    }

    /// Block of every vertex, if partitioned.
    pub fn block_of(&self) -> Option<Vec<usize>> {
        let blocks = self.partition.as_ref()?;
        let mut out = vec![0; self.labels.len()];
        for (i, b) in blocks.iter().enumerate() {
            for &v in b {
                out[v] = i;
            }
        }
        Some(out)
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let labels: Vec<String> = doc.vertices.iter().map(label_text).collect();
        let index = |l: &serde_json::Value| {
            let l = label_text(l);
            labels
                .iter()
                .position(|x| *x == l)
                .ok_or_else(|| ParseError::new(format!("unknown vertex `{l}`")))
        };
        let mut g = Graph::new(labels.clone());
        for e in &doc.edges {
            let (u, v) = (index(&e[0])?, index(&e[1])?);
            g.add_edge(u, v).map_err(|e| ParseError::new(e.to_string()))?;
        }
        if let Some(p) = &doc.partition {
            let blocks = p
                .iter()
                .map(|b| b.iter().map(index).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            g.set_partition(blocks)
                .map_err(|e| ParseError::new(e.to_string()))?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let s = |v: usize| serde_json::Value::String(self.labels[v].clone());
        let doc = GraphJson {
            vertices: (0..self.labels.len()).map(s).collect(),
            edges: self.edges.iter().map(|&(u, v)| [s(u), s(v)]).collect(),
            partition: self
                .partition
                .as_ref()
                .map(|p| p.iter().map(|b| b.iter().map(|&v| s(v)).collect()).collect()),
        };
        serde_json::to_string_pretty(&doc).expect("graph serializes")
    }
}

fn label_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<serde_json::Value>,
    edges: Vec<[serde_json::Value; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<Vec<serde_json::Value>>>,
}
