//! Sequentially simulated parallel BFS with per-iteration message counts.
//!
//! Expanding frontier `V_τ` sends one notification per (frontier vertex,
//! neighbor) pair whose target was untouched when the iteration started;
//! the touched set is committed only after the expansion completes, so two
//! frontier members can notify each other and a vertex reached from two
//! frontier vertices is notified twice. A message costs communication only
//! when its endpoints live in different partition blocks; totals are
//! tallied regardless for diagnostics. `messages_cross[τ]` /
//! `messages_total[τ]` hold the messages emitted while expanding `V_τ`; a
//! final expansion that emits nothing is dropped.

use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::stats::{capped, ClassMatrix};

/// Message accounting for one BFS run.
#[derive(Clone, Debug)]
pub struct MessageTrace {
    pub root: u32,
    /// `|V_τ|` per iteration, starting with the root frontier of size 1.
    pub frontier_sizes: Vec<u64>,
    /// Cross-partition messages emitted while expanding `V_τ`.
    pub messages_cross: Vec<u64>,
    /// All messages emitted while expanding `V_τ` (crossing plus same-block).
    pub messages_total: Vec<u64>,
    /// Earliest iteration with the largest frontier.
    pub peak_iteration: usize,
    /// Message counts by capped endpoint degree class at the peak
    /// iteration, symmetrized; filled by [`bfs_trace_with_classes`].
    pub per_edge_class_counts: Option<ClassMatrix>,
}

impl MessageTrace {
    /// Vertices reached, i.e. the size of the root's component.
    pub fn touched_count(&self) -> u64 {
        self.frontier_sizes.iter().sum()
    }

    /// Index into the message arrays of the burst that discovers the peak
    /// frontier: the expansion of `V_{τ*−1}`. This is where the dominant
    /// communication cost lands.
    pub fn peak_burst_index(&self) -> usize {
        self.peak_iteration.saturating_sub(1)
    }

    /// Crossing messages of the peak burst (0 when the trace has none).
    pub fn cross_at_peak(&self) -> u64 {
        self.messages_cross
            .get(self.peak_burst_index())
            .copied()
            .unwrap_or(0)
    }

    pub fn cross_total(&self) -> u64 {
        self.messages_cross.iter().sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "root": self.root,
            "frontier_sizes": self.frontier_sizes,
            "messages_cross": self.messages_cross,
            "messages_total": self.messages_total,
            "peak": self.peak_iteration,
        })
    }
}

/// Index of the peak message burst and its share of all crossing messages
/// (0 if the run crossed nothing).
pub fn peak_stats(trace: &MessageTrace) -> (usize, f64) {
    let idx = trace.peak_burst_index();
    let total = trace.cross_total();
    if total == 0 {
        return (idx, 0.0);
    }
    (idx, trace.cross_at_peak() as f64 / total as f64)
}

/// Runs a level-synchronous BFS from `root` and counts messages against
/// the partition.
pub fn bfs_trace(g: &Graph, part: &Partition, root: u32) -> Result<MessageTrace> {
    run(g, part, root, None)
}

/// Like [`bfs_trace`] but also bins the peak burst's messages by capped
/// endpoint degree classes (two passes: the peak is only known afterwards).
pub fn bfs_trace_with_classes(
    g: &Graph,
    part: &Partition,
    root: u32,
    k_cap: usize,
) -> Result<MessageTrace> {
    let mut trace = run(g, part, root, None)?;
    let classes = message_class_counts(g, part, root, trace.peak_burst_index(), k_cap)?;
    trace.per_edge_class_counts = Some(classes);
    Ok(trace)
}

/// Counts the messages of iteration `tau` by capped (source, target) degree
/// classes, symmetrized. An iteration beyond the trace yields a zero
/// matrix.
pub fn message_class_counts(
    g: &Graph,
    part: &Partition,
    root: u32,
    tau: usize,
    k_cap: usize,
) -> Result<ClassMatrix> {
    let trace = run(g, part, root, Some((tau, k_cap)))?;
    Ok(trace
        .per_edge_class_counts
        .unwrap_or_else(|| ClassMatrix::zeros(k_cap)))
}

/// Iteration index of every vertex (the BFS distance), `-1` if unreached,
/// along with the lowest-id parent that discovered it (`-1` for the root
/// and unreached vertices). Exposed for distance-oracle comparisons.
pub fn bfs_tree(g: &Graph, root: u32) -> Result<(Vec<i64>, Vec<i64>)> {
    let n = g.vertex_count();
    if root as usize >= n {
        return Err(Error::InvalidArgument(format!(
            "root {root} out of range for {n} vertices"
        )));
    }
    let mut level = vec![-1i64; n];
    let mut parent = vec![-1i64; n];
    let mut frontier = vec![root];
    level[root as usize] = 0;
    let mut depth = 0i64;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if level[v as usize] == -1 {
                    level[v as usize] = depth;
                    parent[v as usize] = u as i64;
                    next.push(v);
                } else if level[v as usize] == depth && (u as i64) < parent[v as usize] {
                    // duplicate discovery: keep the lowest source id
                    parent[v as usize] = u as i64;
                }
            }
        }
        frontier = next;
    }
    Ok((level, parent))
}

fn run(
    g: &Graph,
    part: &Partition,
    root: u32,
    collect: Option<(usize, usize)>,
) -> Result<MessageTrace> {
    let n = g.vertex_count();
    if root as usize >= n {
        return Err(Error::InvalidArgument(format!(
            "root {root} out of range for {n} vertices"
        )));
    }
    if part.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: part.len(),
        });
    }

    // `touched` is the lagged set: frontier members join it only after
    // their expansion completes
    let mut touched = vec![false; n];
    let mut in_frontier = vec![false; n];
    let mut in_next = vec![false; n];
    let mut frontier = vec![root];
    in_frontier[root as usize] = true;

    let mut frontier_sizes: Vec<u64> = Vec::new();
    let mut messages_cross: Vec<u64> = Vec::new();
    let mut messages_total: Vec<u64> = Vec::new();
    let mut classes = collect.map(|(_, k_cap)| ClassMatrix::zeros(k_cap));

    let mut tau = 0usize;
    while !frontier.is_empty() {
        frontier_sizes.push(frontier.len() as u64);
        let mut cross = 0u64;
        let mut total = 0u64;
        let mut next: Vec<u32> = Vec::new();
        let collect_here = collect.map(|(t, _)| t == tau).unwrap_or(false);

        for &u in &frontier {
            let block_u = part.block_of(u);
            for &v in g.neighbors(u) {
                if touched[v as usize] {
                    continue;
                }
                total += 1;
                if block_u != part.block_of(v) {
                    cross += 1;
                }
                if collect_here {
                    let m = classes.as_mut().expect("collect mode");
                    let k_cap = m.k_cap();
                    let ku = capped(g.degree(u), k_cap);
                    let kv = capped(g.degree(v), k_cap);
                    m.add(ku, kv, 1.0);
                    m.add(kv, ku, 1.0);
                }
                if !in_frontier[v as usize] && !in_next[v as usize] {
                    in_next[v as usize] = true;
                    next.push(v);
                }
            }
        }
        messages_total.push(total);
        messages_cross.push(cross);

        for &u in &frontier {
            touched[u as usize] = true;
            in_frontier[u as usize] = false;
        }
        for &v in &next {
            in_next[v as usize] = false;
            in_frontier[v as usize] = true;
        }
        frontier = next;
        tau += 1;
    }

    // a final expansion that emitted nothing carries no information
    if messages_total.last() == Some(&0) {
        messages_total.pop();
        messages_cross.pop();
    }
    let peak_iteration = crate::frontier::peak_index(&frontier_sizes);

    Ok(MessageTrace {
        root,
        frontier_sizes,
        messages_cross,
        messages_total,
        peak_iteration,
        per_edge_class_counts: classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list_labeled;
    use crate::partition::Partition;
    use std::io::BufReader;

    fn one_block(n: usize) -> Partition {
        Partition::new(vec![0; n], 1, 0.0).unwrap()
    }

    /// Figure fixture plus the compact id of each original label.
    fn fixture() -> (Graph, Vec<u32>) {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/figure1.edges");
        let file = std::fs::File::open(path).unwrap();
        let (g, labels) = load_edge_list_labeled(BufReader::new(file)).unwrap();
        let mut by_label = vec![0u32; labels.len() + 1];
        for (id, &label) in labels.iter().enumerate() {
            by_label[label as usize] = id as u32;
        }
        (g, by_label)
    }

    fn fixture_partition(by_label: &[u32], n: usize) -> Partition {
        let groups: [&[usize]; 3] = [&[1, 2, 3], &[4, 5, 6], &[7, 8, 9, 10]];
        let mut blocks = vec![0u32; n];
        for (b, group) in groups.iter().enumerate() {
            for &label in group.iter() {
                blocks[by_label[label] as usize] = b as u32;
            }
        }
        Partition::new(blocks, 3, 1.0).unwrap()
    }

    #[test]
    fn path_graph_trace() {
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        let trace = bfs_trace(&g, &one_block(3), 0).unwrap();
        assert_eq!(trace.frontier_sizes, vec![1, 1, 1]);
        assert_eq!(trace.messages_cross, vec![0, 0]);
        assert_eq!(trace.messages_total, vec![1, 1]);
    }

    #[test]
    fn triangle_intra_frontier_messages() {
        // root 0, every vertex its own block: expanding {0} sends two
        // crossing messages, expanding {1,2} sends two more (the mutual
        // discovery 1->2 and 2->1, both crossing)
        let g = Graph::from_edges(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let part = Partition::new(vec![0, 1, 2], 3, 0.0).unwrap();
        let trace = bfs_trace(&g, &part, 0).unwrap();
        assert_eq!(trace.frontier_sizes, vec![1, 2]);
        assert_eq!(trace.messages_cross, vec![2, 2]);
        assert_eq!(trace.messages_total, vec![2, 2]);
    }

    #[test]
    fn fixture_traversal_counts() {
        let (g, by_label) = fixture();
        let part = fixture_partition(&by_label, g.vertex_count());
        let trace = bfs_trace(&g, &part, by_label[1]).unwrap();
        assert_eq!(trace.frontier_sizes, vec![1, 1, 3, 4, 1]);
        // the expansion of {2,7,5} generates five messages, four crossing
        assert_eq!(trace.messages_total[2], 5);
        assert_eq!(trace.messages_cross[2], 4);
        assert_eq!(trace.peak_iteration, 3);
        // the peak frontier {4,10,3,8} is discovered by that same burst
        assert_eq!(trace.peak_burst_index(), 2);
        assert_eq!(trace.cross_at_peak(), 4);
        assert_eq!(trace.touched_count(), 10);
    }

    #[test]
    fn fixture_class_counts_match_hand_enumeration() {
        // messages while expanding {2,7,5}: 2->8, 7->8, 7->3, 7->4, 5->10
        // with degrees 2:2, 7:4, 5:2, 8:3, 3:1, 4:1, 10:1
        let (g, by_label) = fixture();
        let part = fixture_partition(&by_label, g.vertex_count());
        let m = message_class_counts(&g, &part, by_label[1], 2, 300).unwrap();
        assert_eq!(m.get(2, 3), 1.0); // 2 -> 8
        assert_eq!(m.get(3, 2), 1.0);
        assert_eq!(m.get(4, 3), 1.0); // 7 -> 8
        assert_eq!(m.get(3, 4), 1.0);
        assert_eq!(m.get(4, 1), 2.0); // 7 -> 3 and 7 -> 4
        assert_eq!(m.get(1, 4), 2.0);
        assert_eq!(m.get(2, 1), 1.0); // 5 -> 10
        assert_eq!(m.get(1, 2), 1.0);
        assert_eq!(m.total(), 10.0);
        assert!(m.is_symmetric());
    }

    #[test]
    fn class_counts_beyond_trace_are_zero() {
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        let m = message_class_counts(&g, &one_block(3), 0, 99, 300).unwrap();
        assert_eq!(m.total(), 0.0);
    }

    #[test]
    fn single_message_symmetrized() {
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        // expanding the root {1} (degree 2) notifies 0 and 2 (degree 1)
        let m = message_class_counts(&g, &one_block(3), 1, 0, 300).unwrap();
        assert_eq!(m.get(2, 1), 2.0);
        assert_eq!(m.get(1, 2), 2.0);
        assert_eq!(m.total(), 4.0);
    }

    #[test]
    fn frontier_sizes_ignore_partition() {
        let g = crate::generate::generate_er(200, 600, 4).unwrap();
        let a = bfs_trace(&g, &one_block(200), 7).unwrap();
        let part = crate::partition::random_partition(200, 10, 3).unwrap();
        let b = bfs_trace(&g, &part, 7).unwrap();
        assert_eq!(a.frontier_sizes, b.frontier_sizes);
        assert_eq!(a.messages_total, b.messages_total);
    }

    #[test]
    fn trivial_trace_from_isolated_root() {
        let g = Graph::from_edges(3, vec![(1, 2)]).unwrap();
        let trace = bfs_trace(&g, &one_block(3), 0).unwrap();
        assert_eq!(trace.frontier_sizes, vec![1]);
        assert!(trace.messages_total.is_empty());
        assert_eq!(peak_stats(&trace), (0, 0.0));
    }

    #[test]
    fn peak_share_arithmetic() {
        // frontier peaks at iteration 2, so its burst sits at array index 1
        let trace = MessageTrace {
            root: 0,
            frontier_sizes: vec![1, 2, 9],
            messages_cross: vec![10, 70, 20],
            messages_total: vec![10, 80, 20],
            peak_iteration: 2,
            per_edge_class_counts: None,
        };
        let (peak, share) = peak_stats(&trace);
        assert_eq!(peak, 1);
        assert!((share - 0.7).abs() < 1e-12);
    }

    #[test]
    fn root_out_of_range_rejected() {
        let g = Graph::from_edges(2, vec![(0, 1)]).unwrap();
        assert!(bfs_trace(&g, &one_block(2), 5).is_err());
    }

    #[test]
    fn tree_levels_match_frontier_indices() {
        let (g, by_label) = fixture();
        let (levels, parents) = bfs_tree(&g, by_label[1]).unwrap();
        let expected: [(usize, i64); 10] = [
            (1, 0),
            (6, 1),
            (2, 2),
            (7, 2),
            (5, 2),
            (4, 3),
            (10, 3),
            (3, 3),
            (8, 3),
            (9, 4),
        ];
        for (label, level) in expected {
            assert_eq!(levels[by_label[label] as usize], level, "label {label}");
        }
        // vertex 8 is discovered by both 2 and 7; the lowest compact id wins
        let eight = by_label[8] as usize;
        let two = by_label[2] as i64;
        let seven = by_label[7] as i64;
        assert_eq!(parents[eight], two.min(seven));
    }

    #[test]
    fn determinism() {
        let g = crate::generate::generate_er(300, 900, 12).unwrap();
        let part = crate::partition::random_partition(300, 8, 5).unwrap();
        let a = bfs_trace(&g, &part, 17).unwrap();
        let b = bfs_trace(&g, &part, 17).unwrap();
        assert_eq!(a.frontier_sizes, b.frontier_sizes);
        assert_eq!(a.messages_cross, b.messages_cross);
        assert_eq!(a.messages_total, b.messages_total);
    }
}
