//! Immutable undirected graphs in compressed adjacency form.
//!
//! The adjacency is stored CSR-style: `offsets` has length `n + 1` and
//! `neighbors[offsets[v]..offsets[v + 1]]` holds the sorted neighbor list of
//! vertex `v`. Graphs are simple: no self-loops, no duplicate edges.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// An immutable simple undirected graph with 0-based vertex ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    edge_count: u64,
}

impl Graph {
    /// Builds a graph from an edge list over vertices `0..n`.
    ///
    /// Self-loops and duplicate edges are dropped, so the result is always a
    /// simple graph (this doubles as the simple projection used by the
    /// configuration model).
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut directed: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                continue;
            }
            directed.push((u, v));
            directed.push((v, u));
        }
        directed.sort_unstable();
        directed.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &directed {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = directed.into_iter().map(|(_, v)| v).collect::<Vec<_>>();
        let edge_count = neighbors.len() as u64 / 2;
        Ok(Graph {
            offsets,
            neighbors,
            edge_count,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.degree(v as u32))
            .max()
            .unwrap_or(0)
    }

    /// Index of the CSR slot holding `neighbors(v)[i]`, used to align
    /// per-slot edge weights with the adjacency.
    pub(crate) fn slot_range(&self, v: u32) -> std::ops::Range<usize> {
        let v = v as usize;
        self.offsets[v]..self.offsets[v + 1]
    }

    /// Iterates over undirected edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count() as u32)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| u < v)
    }

    /// Connected component labels and sizes.
    pub fn components(&self) -> Components {
        let n = self.vertex_count();
        let mut label = vec![u32::MAX; n];
        let mut sizes = Vec::new();
        let mut queue = Vec::new();
        for start in 0..n {
            if label[start] != u32::MAX {
                continue;
            }
            let comp = sizes.len() as u32;
            let mut size = 0u64;
            label[start] = comp;
            queue.push(start as u32);
            while let Some(v) = queue.pop() {
                size += 1;
                for &w in self.neighbors(v) {
                    if label[w as usize] == u32::MAX {
                        label[w as usize] = comp;
                        queue.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        Components { label, sizes }
    }
}

/// Connected-component decomposition of a [`Graph`].
#[derive(Clone, Debug)]
pub struct Components {
    /// Component label per vertex.
    pub label: Vec<u32>,
    /// Vertex count per component label.
    pub sizes: Vec<u64>,
}

impl Components {
    /// Label and size of the largest component (lowest label on ties).
    pub fn largest(&self) -> (u32, u64) {
        let mut best = (0u32, 0u64);
        for (i, &s) in self.sizes.iter().enumerate() {
            if s > best.1 {
                best = (i as u32, s);
            }
        }
        best
    }

    /// Vertices belonging to the component with the given label.
    pub fn members(&self, comp: u32) -> Vec<u32> {
        self.label
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == comp)
            .map(|(v, _)| v as u32)
            .collect()
    }
}

/// Loads a whitespace-separated edge list, compacting vertex ids.
///
/// Lines starting with `%` or `#` are comments; tokens beyond the first two
/// (timestamps, weights) are ignored. Duplicate edges and self-loops are
/// dropped. Vertex ids are compacted to `0..N-1` in order of first
/// appearance.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    load_edge_list_labeled(reader).map(|(g, _)| g)
}

/// Like [`load_edge_list`] but also returns the original vertex labels,
/// indexed by compact id.
pub fn load_edge_list_labeled<R: BufRead>(reader: R) -> Result<(Graph, Vec<u64>)> {
    let mut ids: HashMap<u64, u32> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut saw_data = false;

    let intern = |label: u64, labels: &mut Vec<u64>, ids: &mut HashMap<u64, u32>| -> u32 {
        *ids.entry(label).or_insert_with(|| {
            let id = labels.len() as u32;
            labels.push(label);
            id
        })
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let a = tokens.next();
        let b = tokens.next();
        let (a, b) = match (a, b) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected two vertex ids".into(),
                })
            }
        };
        let parse = |tok: &str, lineno: usize| -> Result<u64> {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("malformed vertex id {tok:?}"),
            })
        };
        let u = parse(a, lineno)?;
        let v = parse(b, lineno)?;
        saw_data = true;
        let ui = intern(u, &mut labels, &mut ids);
        let vi = intern(v, &mut labels, &mut ids);
        edges.push((ui, vi));
    }

    if !saw_data {
        return Err(Error::EmptyInput);
    }
    let graph = Graph::from_edges(labels.len(), edges)?;
    Ok((graph, labels))
}

/// Writes the graph as a plain edge list, one `u v` pair per undirected edge.
pub fn write_edge_list<W: Write>(graph: &Graph, mut writer: W) -> Result<()> {
    for (u, v) in graph.edges() {
        writeln!(writer, "{u} {v}")?;
    }
    Ok(())
}
