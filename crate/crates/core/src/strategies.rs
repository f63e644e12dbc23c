//! Construction of the competing partitioning inputs.
//!
//! Four inputs are compared throughout: the unweighted baseline, an
//! empirical weighting from a root's own peak message counts (an oracle
//! upper bound, it uses the answer), a smoothed weighting pooled over the
//! burn-in runs, and the model weighting built purely from degree
//! statistics plus a frontier-size estimate.

use std::cmp::Reverse;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bfs::bfs_trace_with_classes;
use crate::error::{Error, Result};
use crate::frontier::{build_frontier_profile, FrontierProfile, WeightTable};
use crate::graph::Graph;
use crate::partition::{Partition, WeightedGraph};
use crate::stats::{capped, ClassMatrix, DegreeStats};

/// Fraction of the maximum weight used as the positive floor; multilevel
/// matching degenerates on zero-weight edges.
const WEIGHT_FLOOR_RATIO: f64 = 1e-6;

/// The competing partitioning strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Baseline,
    Emp,
    Smooth,
    Avg,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Baseline,
        StrategyKind::Emp,
        StrategyKind::Smooth,
        StrategyKind::Avg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::Emp => "emp",
            StrategyKind::Smooth => "smooth",
            StrategyKind::Avg => "avg",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<StrategyKind> {
        match s {
            "baseline" => Ok(StrategyKind::Baseline),
            "emp" => Ok(StrategyKind::Emp),
            "smooth" => Ok(StrategyKind::Smooth),
            "avg" => Ok(StrategyKind::Avg),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy {other:?} (expected baseline, emp, smooth or avg)"
            ))),
        }
    }
}

/// Frontier-size estimate pooled from a handful of BFS runs.
#[derive(Clone, Debug)]
pub struct BurnIn {
    /// Per-iteration mean frontier sizes (ragged traces padded with zeros),
    /// rounded to integers with trailing zeros dropped.
    pub mean_frontier_sizes: Vec<u64>,
    /// Most common peak iteration across the runs (smallest on ties).
    pub modal_peak: usize,
    /// The sampled roots, in run order.
    pub roots: Vec<u32>,
    /// Per-run message class counts at each run's own peak iteration.
    pub peak_class_counts: Vec<ClassMatrix>,
}

/// Runs `runs` BFS traversals from random roots of the largest component
/// and pools their frontier statistics.
pub fn burn_in(
    g: &Arc<Graph>,
    part0: &Partition,
    runs: usize,
    k_cap: usize,
    seed: u64,
) -> Result<BurnIn> {
    if runs == 0 {
        return Err(Error::InvalidArgument("burn-in needs at least one run".into()));
    }
    let comps = g.components();
    let (largest, comp_size) = comps.largest();
    let members = comps.members(largest);
    if members.is_empty() {
        return Err(Error::InvalidArgument("graph has no vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots: Vec<u32> = (0..runs)
        .map(|_| members[rng.gen_range(0..members.len())])
        .collect();

    let traces = roots
        .par_iter()
        .map(|&root| bfs_trace_with_classes(g, part0, root, k_cap))
        .collect::<Result<Vec<_>>>()?;

    let longest = traces
        .iter()
        .map(|t| t.frontier_sizes.len())
        .max()
        .unwrap_or(0);
    let mut sums = vec![0.0f64; longest];
    for trace in &traces {
        for (i, &s) in trace.frontier_sizes.iter().enumerate() {
            sums[i] += s as f64;
        }
    }
    let mut mean_frontier_sizes: Vec<u64> = Vec::with_capacity(longest);
    let mut cum = 0u64;
    for s in &sums {
        let mut size = (s / runs as f64).round() as u64;
        // rounding must not claim more vertices than the component holds
        size = size.min(comp_size.saturating_sub(cum));
        cum += size;
        mean_frontier_sizes.push(size);
    }
    while mean_frontier_sizes.last() == Some(&0) {
        mean_frontier_sizes.pop();
    }

    let mut peak_counts: Vec<(usize, usize)> = Vec::new();
    for trace in &traces {
        match peak_counts.iter_mut().find(|(p, _)| *p == trace.peak_iteration) {
            Some((_, c)) => *c += 1,
            None => peak_counts.push((trace.peak_iteration, 1)),
        }
    }
    peak_counts.sort_by_key(|&(p, c)| (Reverse(c), p));
    let modal_peak = peak_counts.first().map(|&(p, _)| p).unwrap_or(0);

    let peak_class_counts = traces
        .into_iter()
        .map(|t| t.per_edge_class_counts.expect("classes collected"))
        .collect();

    Ok(BurnIn {
        mean_frontier_sizes,
        modal_peak,
        roots,
        peak_class_counts,
    })
}

/// Number of edges per capped class pair, counted in both orientations
/// (the denominator that turns class message counts into per-edge
/// expectations).
pub fn edge_class_frequencies(g: &Graph, k_cap: usize) -> ClassMatrix {
    let mut freq = ClassMatrix::zeros(k_cap);
    for (u, v) in g.edges() {
        let ku = capped(g.degree(u), k_cap);
        let kv = capped(g.degree(v), k_cap);
        freq.add(ku, kv, 1.0);
        freq.add(kv, ku, 1.0);
    }
    freq
}

fn floored_class_weights(g: &Arc<Graph>, class_w: &ClassMatrix) -> Result<WeightedGraph> {
    let max_w = class_w.max_value();
    if max_w <= 0.0 {
        return WeightedGraph::from_fn(Arc::clone(g), |_, _| 1.0);
    }
    let floor = WEIGHT_FLOOR_RATIO * max_w;
    let k_cap = class_w.k_cap();
    let graph = Arc::clone(g);
    WeightedGraph::from_fn(Arc::clone(g), move |u, v| {
        let ku = capped(graph.degree(u), k_cap);
        let kv = capped(graph.degree(v), k_cap);
        class_w.get(ku, kv).max(floor)
    })
}

/// Calibrated per-edge message table from observed class counts: the
/// per-edge message rate `r = m(k,k') / #edges(k,k')` lies in `[0, 2]`
/// (an intra-frontier edge fires in both directions), clamped into the
/// table's unit range. Summing this table over crossing edges estimates
/// the crossing message count of the iteration the counts came from; the
/// clamp makes the estimate a systematic slight underestimate.
pub fn empirical_weight_table(
    g: &Graph,
    class_counts: &ClassMatrix,
    tau: usize,
) -> WeightTable {
    let k_cap = class_counts.k_cap();
    let freq = edge_class_frequencies(g, k_cap);
    let mut weights = ClassMatrix::zeros(k_cap);
    for k in 1..=k_cap {
        for kp in 1..=k_cap {
            let f = freq.get(k, kp);
            if f > 0.0 {
                let r = class_counts.get(k, kp) / f;
                weights.set(k, kp, r.clamp(0.0, 1.0));
            }
        }
    }
    WeightTable { tau, weights }
}

/// Empirical weighting: per-edge expected messages from observed class
/// counts, `weight(u,v) = m(κu, κv) / #edges(κu, κv)`. Zero-count classes
/// are floored to keep the partitioner away from zero-weight matchings.
pub fn build_w_emp(g: &Arc<Graph>, class_counts: &ClassMatrix) -> Result<WeightedGraph> {
    if class_counts.total() <= 0.0 {
        return Err(Error::InvalidArgument(
            "class counts are empty; cannot build the empirical weighting".into(),
        ));
    }
    let k_cap = class_counts.k_cap();
    let freq = edge_class_frequencies(g, k_cap);
    let mut class_w = ClassMatrix::zeros(k_cap);
    for k in 1..=k_cap {
        for kp in 1..=k_cap {
            let f = freq.get(k, kp);
            if f > 0.0 {
                class_w.set(k, kp, class_counts.get(k, kp) / f);
            }
        }
    }
    floored_class_weights(g, &class_w)
}

/// Smoothed weighting: class counts averaged across runs, shifted by a
/// Laplace pseudo-count of `alpha` expected messages per edge for every
/// class pair present in the graph, then converted like [`build_w_emp`].
pub fn build_w_smooth(
    g: &Arc<Graph>,
    per_run: &[ClassMatrix],
    alpha: f64,
) -> Result<WeightedGraph> {
    if per_run.is_empty() {
        return Err(Error::InvalidArgument("no burn-in class counts supplied".into()));
    }
    let k_cap = per_run[0].k_cap();
    let mut mean = ClassMatrix::zeros(k_cap);
    for m in per_run {
        mean.accumulate(m);
    }
    mean.scale(1.0 / per_run.len() as f64);

    let freq = edge_class_frequencies(g, k_cap);
    let mut class_w = ClassMatrix::zeros(k_cap);
    for k in 1..=k_cap {
        for kp in 1..=k_cap {
            let f = freq.get(k, kp);
            if f > 0.0 {
                class_w.set(k, kp, mean.get(k, kp) / f + alpha);
            }
        }
    }
    floored_class_weights(g, &class_w)
}

/// Per-edge message weight table for the transition `tau -> tau + 1`.
///
/// The per-edge firing probability conditions on the edge's endpoint
/// classes, so the joint matrix enters as the correlation lift
/// `q(k,k') / (q_k · q_k')` over its marginals rather than as the raw
/// joint probability (which carries the class frequencies and would
/// misrank per-edge costs). Directions combine as
/// either-fires-but-not-both.
pub fn edge_weight_table(
    profile: &FrontierProfile,
    stats: &DegreeStats,
    tau: usize,
) -> Result<WeightTable> {
    if tau + 1 >= profile.iteration_count() {
        return Err(Error::InvalidArgument(format!(
            "iteration {tau} has no successor in a {}-iteration profile",
            profile.iteration_count()
        )));
    }
    let k_cap = stats.k_cap;
    let mut marginal = vec![0.0f64; k_cap + 1];
    for k in 1..=k_cap {
        for kp in 1..=k_cap {
            marginal[k] += stats.joint.get(k, kp);
        }
    }
    let cur = profile.usage_row(tau);
    let next = profile.usage_row(tau + 1);
    let mut weights = ClassMatrix::zeros(k_cap);
    for k in 1..=k_cap {
        for kp in 1..=k_cap {
            let denom = marginal[k] * marginal[kp];
            if denom <= 0.0 {
                continue;
            }
            let lift = stats.joint.get(k, kp) / denom;
            let a = (cur[k - 1] * lift * next[kp - 1]).clamp(0.0, 1.0);
            let b = (cur[kp - 1] * lift * next[k - 1]).clamp(0.0, 1.0);
            weights.set(k, kp, a + b - a * b);
        }
    }
    Ok(WeightTable { tau, weights })
}

/// Model weighting: builds the frontier profile from the size estimate,
/// takes the per-edge weight table at the peak transition and projects it
/// onto the edges. `peak` overrides the profile's own argmax transition
/// (the experiment driver passes the transition into the burn-in modal
/// peak); it is clamped so the transition has a successor iteration.
pub fn build_w_avg(
    g: &Arc<Graph>,
    stats: &DegreeStats,
    frontier_sizes: &[u64],
    peak: Option<usize>,
) -> Result<(WeightedGraph, WeightTable)> {
    let profile = build_frontier_profile(stats, frontier_sizes)?;
    let iterations = profile.iteration_count();
    if iterations < 2 {
        log::warn!(
            "degenerate {iterations}-iteration profile; falling back to uniform weights"
        );
        let mut weights = ClassMatrix::zeros(stats.k_cap);
        for k in 1..=stats.k_cap {
            for kp in 1..=stats.k_cap {
                weights.set(k, kp, 1.0);
            }
        }
        let table = WeightTable { tau: 0, weights };
        let wg = WeightedGraph::from_fn(Arc::clone(g), |_, _| 1.0)?;
        return Ok((wg, table));
    }
    let tau = peak.unwrap_or_else(|| profile.peak_iteration()).min(iterations - 2);
    let table = edge_weight_table(&profile, stats, tau)?;
    let wg = floored_class_weights(g, &table.weights)?;
    Ok((wg, table))
}
