//! Vertex partitions, weighted graph views and partition metrics.

use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest block size allowed for `n` vertices in `p` blocks at tolerance
/// `epsilon`: `⌊(1 + ε) · ⌈n / p⌉⌋`.
pub fn balance_limit(n: usize, p: usize, epsilon: f64) -> u64 {
    let ideal = n.div_ceil(p) as f64;
    ((1.0 + epsilon) * ideal).floor() as u64
}

/// Assignment of every vertex to one of `P` blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    blocks: Vec<u32>,
    block_count: usize,
    epsilon: f64,
}

impl Partition {
    /// Wraps an explicit assignment. The measured imbalance must not exceed
    /// `epsilon`; blocks must lie in `0..block_count`.
    pub fn new(blocks: Vec<u32>, block_count: usize, epsilon: f64) -> Result<Partition> {
        if block_count == 0 {
            return Err(Error::InvalidArgument("block count must be >= 1".into()));
        }
        let part = Partition {
            blocks,
            block_count,
            epsilon,
        };
        for (v, &b) in part.blocks.iter().enumerate() {
            if b as usize >= block_count {
                return Err(Error::InvalidPartition(format!(
                    "vertex {v} assigned to block {b}, but there are only {block_count} blocks"
                )));
            }
        }
        if !part.is_balanced() {
            return Err(Error::InvalidPartition(format!(
                "max block size {} exceeds the balance limit {}",
                part.block_sizes().into_iter().max().unwrap_or(0),
                balance_limit(part.len(), block_count, epsilon),
            )));
        }
        Ok(part)
    }

    pub(crate) fn from_parts_unchecked(
        blocks: Vec<u32>,
        block_count: usize,
        epsilon: f64,
    ) -> Partition {
        Partition {
            blocks,
            block_count,
            epsilon,
        }
    }

    #[inline]
    pub fn block_of(&self, v: u32) -> u32 {
        self.blocks[v as usize]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.block_count];
        for &b in &self.blocks {
            sizes[b as usize] += 1;
        }
        sizes
    }

    /// Whether every block respects the balance limit.
    pub fn is_balanced(&self) -> bool {
        let limit = balance_limit(self.len(), self.block_count, self.epsilon);
        self.block_sizes().into_iter().all(|s| s <= limit)
    }
}

/// A graph plus nonnegative symmetric edge weights, stored per adjacency
/// slot so `weights_of(v)[i]` belongs to the edge `(v, neighbors(v)[i])`.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    base: Arc<Graph>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Unit weights: the plain edge-cut objective.
    pub fn unit(base: Arc<Graph>) -> WeightedGraph {
        let slots = (0..base.vertex_count() as u32)
            .map(|v| base.degree(v))
            .sum();
        WeightedGraph {
            base,
            weights: vec![1.0; slots],
        }
    }

    /// Weights each edge by `f(u, v)`. The function must be symmetric; both
    /// adjacency slots of an edge receive their own call.
    pub fn from_fn<F: FnMut(u32, u32) -> f64>(base: Arc<Graph>, mut f: F) -> Result<WeightedGraph> {
        let mut weights = Vec::new();
        for v in 0..base.vertex_count() as u32 {
            for &u in base.neighbors(v) {
                let w = f(v, u);
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "edge ({v}, {u}) has invalid weight {w}"
                    )));
                }
                weights.push(w);
            }
        }
        Ok(WeightedGraph { base, weights })
    }

    pub fn graph(&self) -> &Graph {
        &self.base
    }

    pub fn graph_arc(&self) -> Arc<Graph> {
        Arc::clone(&self.base)
    }

    /// Weights aligned with `graph().neighbors(v)`.
    pub fn weights_of(&self, v: u32) -> &[f64] {
        let range = self.base.slot_range(v);
        &self.weights[range]
    }

    /// Iterates `(u, v, w)` over undirected edges with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.base.vertex_count() as u32).flat_map(move |u| {
            self.base
                .neighbors(u)
                .iter()
                .zip(self.weights_of(u))
                .filter(move |(&v, _)| u < v)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Writes `u v weight` lines, one per undirected edge.
    pub fn write_edge_list<W: Write>(&self, mut writer: W) -> Result<()> {
        for (u, v, w) in self.edges() {
            writeln!(writer, "{u} {v} {w}")?;
        }
        Ok(())
    }
}

/// Balanced assignment by shuffled round-robin; deterministic per seed.
pub fn random_partition(n: usize, p: usize, seed: u64) -> Result<Partition> {
    if p == 0 {
        return Err(Error::InvalidArgument("block count must be >= 1".into()));
    }
    if p > n {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} vertices into {p} blocks"
        )));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut blocks = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        blocks[v as usize] = (i % p) as u32;
    }
    Ok(Partition::from_parts_unchecked(blocks, p, 0.0))
}

/// Total weight of edges whose endpoints lie in different blocks, each edge
/// counted once.
pub fn edge_cut(wg: &WeightedGraph, part: &Partition) -> Result<f64> {
    if part.len() != wg.graph().vertex_count() {
        return Err(Error::SizeMismatch {
            expected: wg.graph().vertex_count(),
            got: part.len(),
        });
    }
    Ok(wg
        .edges()
        .filter(|&(u, v, _)| part.block_of(u) != part.block_of(v))
        .map(|(_, _, w)| w)
        .sum())
}

/// Communication volume: for every vertex, the number of distinct foreign
/// blocks among its neighbors, summed over vertices.
pub fn comm_volume(g: &Graph, part: &Partition) -> Result<u64> {
    if part.len() != g.vertex_count() {
        return Err(Error::SizeMismatch {
            expected: g.vertex_count(),
            got: part.len(),
        });
    }
    let mut total = 0u64;
    let mut seen = vec![false; part.block_count()];
    let mut touched: Vec<u32> = Vec::new();
    for v in 0..g.vertex_count() as u32 {
        let own = part.block_of(v);
        for &u in g.neighbors(v) {
            let b = part.block_of(u);
            if b != own && !seen[b as usize] {
                seen[b as usize] = true;
                touched.push(b);
                total += 1;
            }
        }
        for b in touched.drain(..) {
            seen[b as usize] = false;
        }
    }
    Ok(total)
}

/// Partition text formats understood by [`import_partition`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionFormat {
    /// `vertex_id block_id` per line, any order.
    Native,
    /// One block id per line; the line number is the vertex id.
    Metis,
}

/// Writes the native `vertex_id block_id` format.
pub fn export_partition<W: Write>(part: &Partition, mut writer: W) -> Result<()> {
    for (v, &b) in part.blocks().iter().enumerate() {
        writeln!(writer, "{v} {b}")?;
    }
    Ok(())
}

/// Parses a partition for a graph with `n` vertices, validating that every
/// vertex is assigned exactly once.
pub fn import_partition(text: &str, n: usize, format: PartitionFormat) -> Result<Partition> {
    let mut blocks = vec![u32::MAX; n];
    let mut next_vertex = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let (v, b) = match format {
            PartitionFormat::Native => {
                let mut tokens = trimmed.split_whitespace();
                let v = parse_u32(tokens.next(), lineno)?;
                let b = parse_u32(tokens.next(), lineno)?;
                (v as usize, b)
            }
            PartitionFormat::Metis => {
                let b = parse_u32(Some(trimmed), lineno)?;
                let v = next_vertex;
                next_vertex += 1;
                (v, b)
            }
        };
        if v >= n {
            return Err(Error::InvalidPartition(format!(
                "vertex {v} out of range for {n} vertices"
            )));
        }
        if blocks[v] != u32::MAX {
            return Err(Error::InvalidPartition(format!("vertex {v} listed twice")));
        }
        blocks[v] = b;
    }
    if let Some(v) = blocks.iter().position(|&b| b == u32::MAX) {
        return Err(Error::InvalidPartition(format!("vertex {v} missing")));
    }
    let block_count = blocks.iter().copied().max().map_or(0, |b| b as usize + 1);
    if block_count == 0 {
        return Err(Error::InvalidPartition("no assignments found".into()));
    }
    // record the measured imbalance so the balance invariant holds as-is
    let mut sizes = vec![0u64; block_count];
    for &b in &blocks {
        sizes[b as usize] += 1;
    }
    let ideal = n.div_ceil(block_count) as f64;
    let max = sizes.into_iter().max().unwrap_or(0) as f64;
    let epsilon = (max / ideal - 1.0).max(0.0) + 1e-9;
    Ok(Partition::from_parts_unchecked(blocks, block_count, epsilon))
}

fn parse_u32(tok: Option<&str>, lineno: usize) -> Result<u32> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line: lineno,
        message: "expected an integer".into(),
    })?;
    tok.parse::<u32>().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("malformed integer {tok:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star5() -> Arc<Graph> {
        Arc::new(Graph::from_edges(5, (1..5).map(|v| (0u32, v))).unwrap())
    }

    #[test]
    fn random_partition_block_sizes() {
        let part = random_partition(4, 4, 0).unwrap();
        assert_eq!(part.block_sizes(), vec![1, 1, 1, 1]);

        let part = random_partition(10, 3, 1).unwrap();
        let mut sizes = part.block_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert!(part.is_balanced());
    }

    #[test]
    fn random_partition_rejects_more_blocks_than_vertices() {
        assert!(random_partition(3, 4, 0).is_err());
    }

    #[test]
    fn random_partition_crossing_fraction_on_er() {
        // with P blocks a uniformly random edge crosses with probability
        // 1 - 1/P; averaged over seeds the fraction concentrates tightly
        let g = Arc::new(crate::generate::generate_er(1000, 10_000, 5).unwrap());
        let wg = WeightedGraph::unit(Arc::clone(&g));
        let mut fractions = Vec::new();
        for seed in 0..20 {
            let part = random_partition(1000, 100, seed).unwrap();
            let cut = edge_cut(&wg, &part).unwrap();
            fractions.push(cut / g.edge_count() as f64);
        }
        let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
        assert!((mean - 0.99).abs() < 0.005, "crossing fraction {mean}");
    }

    #[test]
    fn edge_cut_basics() {
        let g = Arc::new(Graph::from_edges(2, vec![(0, 1)]).unwrap());
        let wg = WeightedGraph::from_fn(Arc::clone(&g), |_, _| 2.5).unwrap();
        let one_block = Partition::new(vec![0, 0], 1, 0.0).unwrap();
        assert_eq!(edge_cut(&wg, &one_block).unwrap(), 0.0);
        let split = Partition::new(vec![0, 1], 2, 0.0).unwrap();
        assert_eq!(edge_cut(&wg, &split).unwrap(), 2.5);
    }

    #[test]
    fn comm_volume_star() {
        // center alone in block 0, leaves in block 1: center sees one
        // foreign block, each leaf sees one
        let g = star5();
        let part = Partition::new(vec![0, 1, 1, 1, 1], 2, 3.0).unwrap();
        assert_eq!(comm_volume(&g, &part).unwrap(), 5);
        let single = Partition::new(vec![0; 5], 1, 0.0).unwrap();
        assert_eq!(comm_volume(&g, &single).unwrap(), 0);
    }

    #[test]
    fn comm_volume_k2_split() {
        let g = Arc::new(Graph::from_edges(2, vec![(0, 1)]).unwrap());
        let part = Partition::new(vec![0, 1], 2, 0.0).unwrap();
        assert_eq!(comm_volume(&g, &part).unwrap(), 2);
    }

    #[test]
    fn export_import_round_trip() {
        let part = random_partition(12, 3, 7).unwrap();
        let mut buf = Vec::new();
        export_partition(&part, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = import_partition(&text, 12, PartitionFormat::Native).unwrap();
        assert_eq!(part.blocks(), back.blocks());
    }

    #[test]
    fn import_rejects_duplicates_and_gaps() {
        let dup = "0 0\n0 1\n1 1\n";
        assert!(matches!(
            import_partition(dup, 2, PartitionFormat::Native),
            Err(Error::InvalidPartition(_))
        ));
        let missing = "0 0\n2 1\n";
        assert!(matches!(
            import_partition(missing, 3, PartitionFormat::Native),
            Err(Error::InvalidPartition(_))
        ));
        let out_of_range = "0 0\n5 1\n";
        assert!(matches!(
            import_partition(out_of_range, 2, PartitionFormat::Native),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn import_metis_format() {
        let text = "0\n1\n1\n0\n";
        let part = import_partition(text, 4, PartitionFormat::Metis).unwrap();
        assert_eq!(part.blocks(), &[0, 1, 1, 0]);
        assert_eq!(part.block_count(), 2);
    }

    #[test]
    fn weighted_graph_slots_are_symmetric() {
        let g = Arc::new(Graph::from_edges(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap());
        let wg = WeightedGraph::from_fn(Arc::clone(&g), |u, v| (u + v) as f64).unwrap();
        for v in 0..4u32 {
            for (i, &u) in g.neighbors(v).iter().enumerate() {
                let w_vu = wg.weights_of(v)[i];
                let j = g.neighbors(u).iter().position(|&x| x == v).unwrap();
                let w_uv = wg.weights_of(u)[j];
                assert_eq!(w_vu, w_uv);
            }
        }
        assert!(WeightedGraph::from_fn(g, |_, _| f64::NAN).is_err());
    }
}
