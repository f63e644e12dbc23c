//! Experiment driver: paired per-root comparison of partitioning
//! strategies, plus machine-readable reports.
//!
//! A run partitions the graph once per shared strategy (baseline, smooth,
//! avg), then traverses from a common set of random roots under every
//! partition and records the cross-partition messages. The empirical
//! strategy is rebuilt per root from that root's own baseline peak counts,
//! which makes it an oracle bound rather than a deployable method. Roots
//! are restricted to the largest connected component. Reports are
//! byte-reproducible for a fixed config.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::bfs::{bfs_trace, bfs_trace_with_classes, peak_stats, MessageTrace};
use crate::error::{Error, Result};
use crate::frontier::expected_cut;
use crate::generate::{generate_er, generate_powerlaw};
use crate::graph::{load_edge_list, Graph};
use crate::multilevel::partition_kway;
use crate::partition::{Partition, WeightedGraph};
use crate::stats::degree_stats;
use crate::strategies::{
    build_w_avg, build_w_emp, build_w_smooth, burn_in, empirical_weight_table, StrategyKind,
};

/// Where the experiment graph comes from.
#[derive(Clone, Debug)]
pub enum GraphSource {
    /// Edge-list file.
    File(PathBuf),
    /// Uniform random graph with `n` vertices and `m` edges.
    Er { n: usize, m: u64 },
    /// Configuration-model graph with `p_k ∝ k^alpha` truncated at the
    /// configured degree cap.
    PowerLaw { n: usize, alpha: f64 },
}

impl GraphSource {
    pub fn load(&self, k_cap: usize, seed: u64) -> Result<Graph> {
        match self {
            GraphSource::File(path) => {
                let file = fs::File::open(path)?;
                load_edge_list(std::io::BufReader::new(file))
            }
            GraphSource::Er { n, m } => generate_er(*n, *m, seed),
            GraphSource::PowerLaw { n, alpha } => generate_powerlaw(*n, *alpha, k_cap, seed),
        }
    }

    fn describe(&self) -> String {
        match self {
            GraphSource::File(path) => format!("file:{}", path.display()),
            GraphSource::Er { n, m } => format!("er:{n}:{m}"),
            GraphSource::PowerLaw { n, alpha } => format!("plaw:{n}:{alpha}"),
        }
    }
}

/// Experiment parameters. Defaults: 100 blocks, 500 roots, 10 burn-in
/// runs, degree cap 300, balance tolerance 0.05.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    pub partitions: usize,
    pub roots: usize,
    pub burn_in_runs: usize,
    pub k_cap: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Strategies to compare; the baseline is always run as the reference.
    pub strategies: Vec<StrategyKind>,
    /// Laplace pseudo-count for the smoothed weighting.
    pub smoothing_alpha: f64,
}

impl ExperimentConfig {
    pub fn new(source: GraphSource) -> ExperimentConfig {
        ExperimentConfig {
            source,
            partitions: 100,
            roots: 500,
            burn_in_runs: 10,
            k_cap: 300,
            epsilon: 0.05,
            seed: 1,
            strategies: vec![StrategyKind::Emp, StrategyKind::Smooth, StrategyKind::Avg],
            smoothing_alpha: 1.0,
        }
    }

    /// Baseline first, then the requested strategies in order, no
    /// duplicates.
    fn strategy_order(&self) -> Vec<StrategyKind> {
        let mut order = vec![StrategyKind::Baseline];
        for &s in &self.strategies {
            if !order.contains(&s) {
                order.push(s);
            }
        }
        order
    }
}

/// One strategy's outcome for one root.
#[derive(Clone, Debug)]
pub struct RootRecord {
    pub root: u32,
    pub strategy: StrategyKind,
    pub peak_iteration: usize,
    pub cross_at_peak: u64,
    pub cross_total: u64,
    /// Percent reduction of peak crossing messages vs the baseline.
    pub rho_peak: f64,
    /// Percent reduction of total crossing messages vs the baseline.
    pub rho_total: f64,
    /// Share of the run's crossing messages emitted at the peak.
    pub peak_share: f64,
}

/// Model estimate vs observation for one root (baseline partition).
#[derive(Clone, Debug)]
pub struct EstimatePair {
    pub root: u32,
    pub expected: f64,
    pub actual: u64,
}

/// Per-strategy aggregates over the paired roots.
#[derive(Clone, Debug)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub mean_rho_peak: f64,
    pub mean_rho_total: f64,
    /// 95% percentile bootstrap interval for the mean peak reduction.
    pub ci95_rho_peak: (f64, f64),
    pub mean_peak_share: f64,
}

/// Complete experiment outcome.
#[derive(Clone, Debug)]
pub struct BenchReport {
    pub source: String,
    pub partitions: usize,
    pub root_count: usize,
    pub seed: u64,
    pub k_cap: usize,
    pub epsilon: f64,
    pub graph_vertices: u64,
    pub graph_edges: u64,
    pub largest_component: u64,
    pub burn_in_peak: usize,
    /// Records in root-major order, strategies in [`strategy order`] within
    /// each root.
    pub records: Vec<RootRecord>,
    pub estimate_pairs: Vec<EstimatePair>,
    pub peak_histogram: BTreeMap<usize, u64>,
    pub summaries: Vec<StrategySummary>,
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x
}

fn percent_reduction(base: u64, value: u64) -> f64 {
    if base == 0 {
        0.0
    } else {
        100.0 * (base as f64 - value as f64) / base as f64
    }
}

fn record_from(trace: &MessageTrace, strategy: StrategyKind, base: &MessageTrace) -> RootRecord {
    let (_, share) = peak_stats(trace);
    RootRecord {
        root: trace.root,
        strategy,
        peak_iteration: trace.peak_iteration,
        cross_at_peak: trace.cross_at_peak(),
        cross_total: trace.cross_total(),
        rho_peak: percent_reduction(base.cross_at_peak(), trace.cross_at_peak()),
        rho_total: percent_reduction(base.cross_total(), trace.cross_total()),
        peak_share: share,
    }
}

/// Runs the full protocol: statistics, baseline partition, burn-in,
/// weighted partitions, then the paired per-root traversals.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BenchReport> {
    let g = Arc::new(cfg.source.load(cfg.k_cap, derive_seed(cfg.seed, 0))?);
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no vertices".into()));
    }
    let comps = g.components();
    let (largest_label, largest_size) = comps.largest();
    let members = comps.members(largest_label);

    let stats = degree_stats(&g, cfg.k_cap)?;
    let unit = WeightedGraph::unit(Arc::clone(&g));
    let base_part = partition_kway(&unit, cfg.partitions, cfg.epsilon, derive_seed(cfg.seed, 1))?;

    let burn = burn_in(
        &g,
        &base_part,
        cfg.burn_in_runs,
        cfg.k_cap,
        derive_seed(cfg.seed, 2),
    )?;

    let order = cfg.strategy_order();

    // shared partitions (everything except the per-root empirical one)
    let mut shared: Vec<(StrategyKind, Partition)> = Vec::new();
    for &s in &order {
        match s {
            StrategyKind::Baseline => shared.push((s, base_part.clone())),
            StrategyKind::Smooth => {
                let wg = build_w_smooth(&g, &burn.peak_class_counts, cfg.smoothing_alpha)?;
                let part =
                    partition_kway(&wg, cfg.partitions, cfg.epsilon, derive_seed(cfg.seed, 3))?;
                shared.push((s, part));
            }
            StrategyKind::Avg => {
                // the table weights the transition into the modal peak
                let (wg, _) = build_w_avg(
                    &g,
                    &stats,
                    &burn.mean_frontier_sizes,
                    Some(burn.modal_peak.saturating_sub(1)),
                )?;
                let part =
                    partition_kway(&wg, cfg.partitions, cfg.epsilon, derive_seed(cfg.seed, 4))?;
                shared.push((s, part));
            }
            StrategyKind::Emp => {}
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 5));
    let roots: Vec<u32> = (0..cfg.roots)
        .map(|_| members[rng.gen_range(0..members.len())])
        .collect();

    struct PerRoot {
        records: Vec<RootRecord>,
        estimate: EstimatePair,
        base_peak: usize,
    }

    let per_root: Vec<PerRoot> = roots
        .par_iter()
        .enumerate()
        .map(|(i, &root)| -> Result<PerRoot> {
            // classes are always collected: the empirical strategy and the
            // estimate-vs-actual pairs both consume them
            let base_trace = bfs_trace_with_classes(&g, &base_part, root, cfg.k_cap)?;

            // per-edge message estimate for this root's peak burst: class
            // counts normalized per edge, summed over crossing edges
            let tau = base_trace.peak_burst_index();
            let estimate = match base_trace.per_edge_class_counts.as_ref() {
                Some(counts) if counts.total() > 0.0 => {
                    let table = empirical_weight_table(&g, counts, tau);
                    EstimatePair {
                        root,
                        expected: expected_cut(&g, &base_part, &table)?,
                        actual: base_trace.cross_at_peak(),
                    }
                }
                _ => EstimatePair {
                    root,
                    expected: 0.0,
                    actual: 0,
                },
            };

            let mut records = Vec::with_capacity(order.len());
            for &s in &order {
                let record = match s {
                    StrategyKind::Baseline => record_from(&base_trace, s, &base_trace),
                    StrategyKind::Emp => {
                        let counts = base_trace
                            .per_edge_class_counts
                            .as_ref()
                            .expect("classes collected for emp");
                        let trace = if counts.total() > 0.0 {
                            let wg = build_w_emp(&g, counts)?;
                            let part = partition_kway(
                                &wg,
                                cfg.partitions,
                                cfg.epsilon,
                                derive_seed(cfg.seed, 1000 + i as u64),
                            )?;
                            bfs_trace(&g, &part, root)?
                        } else {
                            base_trace.clone()
                        };
                        record_from(&trace, s, &base_trace)
                    }
                    StrategyKind::Smooth | StrategyKind::Avg => {
                        let part = &shared
                            .iter()
                            .find(|(kind, _)| *kind == s)
                            .expect("shared partition")
                            .1;
                        let trace = bfs_trace(&g, part, root)?;
                        record_from(&trace, s, &base_trace)
                    }
                };
                records.push(record);
            }
            Ok(PerRoot {
                records,
                estimate,
                base_peak: base_trace.peak_iteration,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(per_root.len() * order.len());
    let mut estimate_pairs = Vec::with_capacity(per_root.len());
    let mut peak_histogram: BTreeMap<usize, u64> = BTreeMap::new();
    for pr in &per_root {
        records.extend(pr.records.iter().cloned());
        estimate_pairs.push(pr.estimate.clone());
        *peak_histogram.entry(pr.base_peak).or_insert(0) += 1;
    }

    let summaries = order
        .iter()
        .map(|&s| summarize(&records, s, derive_seed(cfg.seed, 6)))
        .collect();

    Ok(BenchReport {
        source: cfg.source.describe(),
        partitions: cfg.partitions,
        root_count: cfg.roots,
        seed: cfg.seed,
        k_cap: cfg.k_cap,
        epsilon: cfg.epsilon,
        graph_vertices: n as u64,
        graph_edges: g.edge_count(),
        largest_component: largest_size,
        burn_in_peak: burn.modal_peak,
        records,
        estimate_pairs,
        peak_histogram,
        summaries,
    })
}

fn summarize(records: &[RootRecord], strategy: StrategyKind, seed: u64) -> StrategySummary {
    let rho_peak: Vec<f64> = records
        .iter()
        .filter(|r| r.strategy == strategy)
        .map(|r| r.rho_peak)
        .collect();
    let rho_total: Vec<f64> = records
        .iter()
        .filter(|r| r.strategy == strategy)
        .map(|r| r.rho_total)
        .collect();
    let shares: Vec<f64> = records
        .iter()
        .filter(|r| r.strategy == strategy)
        .map(|r| r.peak_share)
        .collect();
    StrategySummary {
        strategy,
        mean_rho_peak: mean(&rho_peak),
        mean_rho_total: mean(&rho_total),
        ci95_rho_peak: bootstrap_ci(&rho_peak, 1000, seed),
        mean_peak_share: mean(&shares),
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Percentile bootstrap CI for the mean (2.5%/97.5%), deterministic per
/// seed.
pub fn bootstrap_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let total: f64 = (0..values.len())
                .map(|_| values[rng.gen_range(0..values.len())])
                .sum();
            total / values.len() as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = means[(resamples as f64 * 0.025) as usize];
    let hi = means[((resamples as f64 * 0.975) as usize).min(resamples - 1)];
    (lo, hi)
}

/// Writes `results.csv`, `summary.json`, the histogram CSVs and the
/// expected-vs-actual pairs into `dir`. Returns the written paths.
pub fn emit_report(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let results = dir.join("results.csv");
    {
        let mut f = fs::File::create(&results)?;
        writeln!(
            f,
            "root,strategy,peak_iteration,cross_at_peak,cross_total,rho_peak_pct,rho_total_pct"
        )?;
        for r in &report.records {
            writeln!(
                f,
                "{},{},{},{},{},{:.6},{:.6}",
                r.root,
                r.strategy,
                r.peak_iteration,
                r.cross_at_peak,
                r.cross_total,
                r.rho_peak,
                r.rho_total
            )?;
        }
    }
    written.push(results);

    let summary = dir.join("summary.json");
    {
        let strategies: Vec<serde_json::Value> = report
            .summaries
            .iter()
            .map(|s| {
                json!({
                    "strategy": s.strategy.as_str(),
                    "mean_rho_peak_pct": s.mean_rho_peak,
                    "mean_rho_total_pct": s.mean_rho_total,
                    "ci95_rho_peak_pct": [s.ci95_rho_peak.0, s.ci95_rho_peak.1],
                    "mean_peak_share": s.mean_peak_share,
                })
            })
            .collect();
        let rel_errors: Vec<f64> = report
            .estimate_pairs
            .iter()
            .filter(|p| p.actual > 0)
            .map(|p| (p.expected - p.actual as f64) / p.actual as f64)
            .collect();
        let mut sorted_err = rel_errors.clone();
        sorted_err.sort_by(f64::total_cmp);
        let median_err = if sorted_err.is_empty() {
            0.0
        } else {
            sorted_err[sorted_err.len() / 2]
        };
        let doc = json!({
            "source": report.source,
            "partitions": report.partitions,
            "roots": report.root_count,
            "seed": report.seed,
            "k_cap": report.k_cap,
            "epsilon": report.epsilon,
            "graph": {
                "vertices": report.graph_vertices,
                "edges": report.graph_edges,
                "largest_component": report.largest_component,
            },
            "burn_in_peak": report.burn_in_peak,
            "strategies": strategies,
            "estimator": {
                "mean_relative_error": mean(&rel_errors),
                "median_relative_error": median_err,
                "pairs": report.estimate_pairs.len(),
            },
            "peak_histogram": report
                .peak_histogram
                .iter()
                .map(|(k, v)| json!({"iteration": k, "count": v}))
                .collect::<Vec<_>>(),
        });
        fs::write(&summary, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    written.push(summary);

    let peak_hist = dir.join("peak_iteration_hist.csv");
    {
        let mut f = fs::File::create(&peak_hist)?;
        writeln!(f, "iteration,count")?;
        for (iter, count) in &report.peak_histogram {
            writeln!(f, "{iter},{count}")?;
        }
    }
    written.push(peak_hist);

    let share_hist = dir.join("peak_share_hist.csv");
    {
        let shares: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.strategy == StrategyKind::Baseline)
            .map(|r| r.peak_share)
            .collect();
        let mut f = fs::File::create(&share_hist)?;
        writeln!(f, "bin_lo,bin_hi,count")?;
        let bins = 20usize;
        for b in 0..bins {
            let lo = b as f64 / bins as f64;
            let hi = (b + 1) as f64 / bins as f64;
            let count = shares
                .iter()
                .filter(|&&s| s >= lo && (s < hi || (b == bins - 1 && s <= hi)))
                .count();
            writeln!(f, "{lo:.2},{hi:.2},{count}")?;
        }
    }
    written.push(share_hist);

    for summary in &report.summaries {
        if summary.strategy == StrategyKind::Baseline {
            continue;
        }
        let path = dir.join(format!("rho_hist_{}.csv", summary.strategy));
        let values: Vec<f64> = report
            .records
            .iter()
            .filter(|r| r.strategy == summary.strategy)
            .map(|r| r.rho_peak)
            .collect();
        let mut f = fs::File::create(&path)?;
        writeln!(f, "bin_lo,bin_hi,count")?;
        let (lo, hi) = (-100.0f64, 100.0f64);
        let bins = 40usize;
        let width = (hi - lo) / bins as f64;
        for b in 0..bins {
            let b_lo = lo + b as f64 * width;
            let b_hi = b_lo + width;
            let count = values
                .iter()
                .filter(|&&x| x >= b_lo && (x < b_hi || (b == bins - 1 && x <= b_hi)))
                .count();
            writeln!(f, "{b_lo:.1},{b_hi:.1},{count}")?;
        }
        written.push(path);
    }

    let pairs = dir.join("expected_vs_actual.csv");
    {
        let mut f = fs::File::create(&pairs)?;
        writeln!(f, "root,expected,actual")?;
        for p in &report.estimate_pairs {
            writeln!(f, "{},{:.6},{}", p.root, p.expected, p.actual)?;
        }
    }
    written.push(pairs);

    Ok(written)
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Error {
        Error::InvalidArgument(format!("json serialization failed: {err}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(GraphSource::PowerLaw {
            n: 2000,
            alpha: -2.0,
        });
        cfg.partitions = 10;
        cfg.roots = 12;
        cfg.burn_in_runs = 3;
        cfg.seed = 7;
        cfg
    }

    #[test]
    fn baseline_only_rho_is_zero() {
        let mut cfg = small_config();
        cfg.strategies = vec![];
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.records.len(), cfg.roots);
        for r in &report.records {
            assert_eq!(r.strategy, StrategyKind::Baseline);
            assert_eq!(r.rho_peak, 0.0);
            assert_eq!(r.rho_total, 0.0);
        }
        assert_eq!(report.summaries.len(), 1);
    }

    #[test]
    fn paired_design_row_counts() {
        let mut cfg = small_config();
        cfg.strategies = vec![StrategyKind::Avg, StrategyKind::Smooth];
        let report = run_experiment(&cfg).unwrap();
        // baseline + 2 strategies per root
        assert_eq!(report.records.len(), cfg.roots * 3);
        // identical root sequence across strategies
        for chunk in report.records.chunks(3) {
            assert_eq!(chunk[0].root, chunk[1].root);
            assert_eq!(chunk[0].root, chunk[2].root);
            // frontier peaks are partition independent
            assert_eq!(chunk[0].peak_iteration, chunk[1].peak_iteration);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        let mut cfg = small_config();
        cfg.strategies = vec![StrategyKind::Avg];
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        emit_report(&a, dir_a.path()).unwrap();
        emit_report(&b, dir_b.path()).unwrap();
        let csv_a = fs::read(dir_a.path().join("results.csv")).unwrap();
        let csv_b = fs::read(dir_b.path().join("results.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
        let sum_a = fs::read(dir_a.path().join("summary.json")).unwrap();
        let sum_b = fs::read(dir_b.path().join("summary.json")).unwrap();
        assert_eq!(sum_a, sum_b);
    }

    #[test]
    fn csv_round_trip_matches_summary() {
        let mut cfg = small_config();
        cfg.strategies = vec![StrategyKind::Avg];
        let report = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&report, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let entry = sums.entry(fields[1].to_string()).or_insert((0.0, 0));
            entry.0 += fields[5].parse::<f64>().unwrap();
            entry.1 += 1;
        }
        for s in &report.summaries {
            let (total, count) = sums[s.strategy.as_str()];
            assert!((total / count as f64 - s.mean_rho_peak).abs() < 1e-4);
        }
    }

    #[test]
    fn bootstrap_ci_brackets_mean() {
        let values: Vec<f64> = (0..200).map(|i| (i % 7) as f64 - 3.0).collect();
        let m = mean(&values);
        let (lo, hi) = bootstrap_ci(&values, 500, 3);
        assert!(lo <= m && m <= hi);
        assert!(hi - lo < 1.0);
    }

    #[test]
    fn histogram_files_written() {
        let mut cfg = small_config();
        cfg.strategies = vec![StrategyKind::Avg];
        let report = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&report, dir.path()).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert!(names.contains(&"results.csv".to_string()));
        assert!(names.contains(&"summary.json".to_string()));
        assert!(names.contains(&"peak_iteration_hist.csv".to_string()));
        assert!(names.contains(&"peak_share_hist.csv".to_string()));
        assert!(names.contains(&"rho_hist_avg.csv".to_string()));
        assert!(names.contains(&"expected_vs_actual.csv".to_string()));
        let total: u64 = report.peak_histogram.values().sum();
        assert_eq!(total, cfg.roots as u64);
    }
}
