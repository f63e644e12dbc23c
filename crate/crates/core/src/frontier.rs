//! Continuous-time frontier model.
//!
//! The configuration model pairs stubs in an order that can be relabeled
//! onto continuous time `t ∈ [0, 1]`, which gives closed forms for the
//! fraction of vertices touched by BFS before time `t`:
//!
//! - per degree class: `f_k(t) = p_k · (1 − (1 − t)^k)`
//! - overall coverage: `f(t) = 1 − Σ_k p_k · (1 − t)^k`
//!
//! Mapping observed cumulative frontier sizes through `f⁻¹` yields the
//! model time `t_τ` of each iteration, and differencing per-class coverage
//! between consecutive times yields the expected degree mix of each
//! frontier and the usage probability `π_k^τ` of a degree-`k` vertex at
//! iteration `τ`. Combining consecutive usage rows with the joint degree
//! matrix produces the expected per-edge message weight
//! `w = p + p' − p·p'` for each class pair; summing those weights over
//! crossing edges estimates the cross-partition message count of a
//! partition before any BFS is run.

use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::stats::{capped, ClassMatrix, DegreeStats};

/// Expected fraction of vertices of degree class `k` touched before time
/// `t`. `p[i]` is the probability of class `i + 1`.
pub fn touched_fraction_k(p: &[f64], k: usize, t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    if k == 0 {
        return Err(Error::InvalidArgument("degree class must be >= 1".into()));
    }
    if k > p.len() {
        return Ok(0.0);
    }
    Ok(p[k - 1] * (1.0 - (1.0 - t).powi(k as i32)))
}

/// Fraction of vertices of any degree touched before time `t`.
///
/// Satisfies `f(0) = 0`, `f(1) = 1` and is monotone nondecreasing.
pub fn touched_fraction(p: &[f64], t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    let s = 1.0 - t;
    let mut tail = 0.0;
    for (i, &pk) in p.iter().enumerate() {
        tail += pk * s.powi(i as i32 + 1);
    }
    Ok(1.0 - tail)
}

/// Inverts [`touched_fraction`] by bisection: returns `t` with
/// `|f(t) − y| ≤ 1e-10`. The coverage target is clamped into `[0, 1]`.
pub fn invert_touched_fraction(p: &[f64], y: f64) -> Result<f64> {
    let y = y.clamp(0.0, 1.0);
    if y == 0.0 {
        return Ok(0.0);
    }
    if y >= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let fm = touched_fraction(p, mid)?;
        if (fm - y).abs() < 1e-12 {
            return Ok(mid);
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-iteration frontier prediction: sizes, model times and the degree
/// usage matrices.
#[derive(Clone, Debug)]
pub struct FrontierProfile {
    /// Degree cap shared with the source [`DegreeStats`].
    pub k_cap: usize,
    /// Frontier size per iteration (as supplied).
    pub frontier_sizes: Vec<u64>,
    /// Cumulative touched count per iteration.
    pub cumulative: Vec<u64>,
    /// Model time `t_τ = f⁻¹(n_τ / N)` per iteration.
    pub times: Vec<f64>,
    usage: Vec<Vec<f64>>,
    frontier_dist: Vec<Vec<f64>>,
    raw_counts: Vec<Vec<f64>>,
}

impl FrontierProfile {
    pub fn iteration_count(&self) -> usize {
        self.frontier_sizes.len()
    }

    /// Usage row `π_·^tau` (probability a vertex of each class is used at
    /// `tau`, clamped to `[0, 1]`), indexed by class − 1.
    pub fn usage_row(&self, tau: usize) -> &[f64] {
        &self.usage[tau]
    }

    /// Frontier degree distribution row `p_·^tau`; sums to 1 for nonempty
    /// iterations. Indexed by class − 1.
    pub fn dist_row(&self, tau: usize) -> &[f64] {
        &self.frontier_dist[tau]
    }

    /// Unclamped per-class frontier count row (conservation diagnostics).
    pub fn raw_count_row(&self, tau: usize) -> &[f64] {
        &self.raw_counts[tau]
    }

    /// Earliest iteration with the largest frontier.
    pub fn peak_iteration(&self) -> usize {
        peak_index(&self.frontier_sizes)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pi: Vec<f64> = self.usage.iter().flatten().copied().collect();
        json!({
            "k_cap": self.k_cap,
            "frontier_sizes": self.frontier_sizes,
            "times": self.times,
            "pi": pi,
        })
    }
}

/// Earliest index of the maximum value.
pub(crate) fn peak_index(sizes: &[u64]) -> usize {
    let mut best = 0usize;
    for (i, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = i;
        }
    }
    best
}

/// Builds a [`FrontierProfile`] from degree statistics and observed (or
/// estimated) frontier sizes.
///
/// Per-class counts follow the coverage recursion: cumulative class-`k`
/// coverage at `t_τ` minus whatever previous iterations already claimed,
/// floored at zero. Usage divides the per-iteration count by the class
/// population and clamps to `[0, 1]`; classes with `p_k = 0` get zero.
pub fn build_frontier_profile(
    stats: &DegreeStats,
    frontier_sizes: &[u64],
) -> Result<FrontierProfile> {
    if frontier_sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "frontier size list must be nonempty".into(),
        ));
    }
    let population = stats.population;
    let total: u64 = frontier_sizes.iter().sum();
    if total > population {
        return Err(Error::InvalidArgument(format!(
            "frontier sizes cover {total} vertices but the graph has {population}"
        )));
    }
    let p = stats.p_k();
    let k_cap = stats.k_cap;
    let n_model = population as f64;

    let mut cumulative = Vec::with_capacity(frontier_sizes.len());
    let mut times = Vec::with_capacity(frontier_sizes.len());
    let mut usage = Vec::with_capacity(frontier_sizes.len());
    let mut frontier_dist = Vec::with_capacity(frontier_sizes.len());
    let mut raw_counts = Vec::with_capacity(frontier_sizes.len());

    let mut assigned = vec![0.0f64; k_cap];
    let mut cum = 0u64;
    for &size in frontier_sizes {
        cum += size;
        cumulative.push(cum);
        let t = invert_touched_fraction(p, cum as f64 / n_model)?;
        times.push(t);

        let mut row = vec![0.0f64; k_cap];
        let mut row_total = 0.0;
        for k in 1..=k_cap {
            let cum_k = touched_fraction_k(p, k, t)? * n_model;
            let nk = (cum_k - assigned[k - 1]).max(0.0);
            assigned[k - 1] += nk;
            row[k - 1] = nk;
            row_total += nk;
        }
        let dist: Vec<f64> = if row_total > 0.0 {
            row.iter().map(|&x| x / row_total).collect()
        } else {
            vec![0.0; k_cap]
        };
        let pi: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(i, &nk)| {
                let class_pop = p[i] * n_model;
                if class_pop > 0.0 {
                    (nk / class_pop).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        raw_counts.push(row);
        frontier_dist.push(dist);
        usage.push(pi);
    }

    Ok(FrontierProfile {
        k_cap,
        frontier_sizes: frontier_sizes.to_vec(),
        cumulative,
        times,
        usage,
        frontier_dist,
        raw_counts,
    })
}

/// Probability of transitioning from a degree-`k` vertex used at iteration
/// `tau` to a degree-`k'` vertex used at `tau + 1`, for every class pair:
/// `π_k^τ · q(k, k') · π_{k'}^{τ+1}`. Not symmetric in general.
pub fn transition_matrix(
    profile: &FrontierProfile,
    stats: &DegreeStats,
    tau: usize,
) -> Result<ClassMatrix> {
    if tau + 1 >= profile.iteration_count() {
        return Err(Error::InvalidArgument(format!(
            "iteration {tau} has no successor in a {}-iteration profile",
            profile.iteration_count()
        )));
    }
    if profile.k_cap != stats.k_cap {
        return Err(Error::SizeMismatch {
            expected: stats.k_cap,
            got: profile.k_cap,
        });
    }
    let k_cap = stats.k_cap;
    let cur = profile.usage_row(tau);
    let next = profile.usage_row(tau + 1);
    let mut out = ClassMatrix::zeros(k_cap);
    for k in 1..=k_cap {
        if cur[k - 1] == 0.0 {
            continue;
        }
        for kp in 1..=k_cap {
            out.set(k, kp, cur[k - 1] * stats.joint.get(k, kp) * next[kp - 1]);
        }
    }
    Ok(out)
}

/// Expected message indicator per class pair at one iteration.
#[derive(Clone, Debug)]
pub struct WeightTable {
    /// Iteration the table was built for.
    pub tau: usize,
    /// Symmetric weight matrix with entries in `[0, 1]`.
    pub weights: ClassMatrix,
}

impl WeightTable {
    #[inline]
    pub fn weight(&self, k: usize, kp: usize) -> f64 {
        self.weights.get(k, kp)
    }

    pub fn k_cap(&self) -> usize {
        self.weights.k_cap()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "tau": self.tau,
            "k_cap": self.weights.k_cap(),
            "w": self.weights.data(),
        })
    }
}

/// Expected message weight along a `(k, k')` edge at iteration `tau`:
/// either direction fires, but not both, so `w = a + b − a·b` over the two
/// transition directions.
pub fn message_weight_table(
    profile: &FrontierProfile,
    stats: &DegreeStats,
    tau: usize,
) -> Result<WeightTable> {
    let forward = transition_matrix(profile, stats, tau)?;
    let k_cap = forward.k_cap();
    let mut weights = ClassMatrix::zeros(k_cap);
    for k in 1..=k_cap {
        for kp in 1..=k_cap {
            let a = forward.get(k, kp);
            let b = forward.get(kp, k);
            weights.set(k, kp, a + b - a * b);
        }
    }
    Ok(WeightTable { tau, weights })
}

/// Expected cross-partition message count under `table`: the sum of class
/// weights over crossing edges, each undirected edge counted once.
pub fn expected_cut(g: &Graph, part: &Partition, table: &WeightTable) -> Result<f64> {
    if part.len() != g.vertex_count() {
        return Err(Error::SizeMismatch {
            expected: g.vertex_count(),
            got: part.len(),
        });
    }
    let k_cap = table.k_cap();
    let mut total = 0.0;
    for (u, v) in g.edges() {
        if part.block_of(u) != part.block_of(v) {
            let ku = capped(g.degree(u), k_cap);
            let kv = capped(g.degree(v), k_cap);
            total += table.weight(ku, kv);
        }
    }
    Ok(total)
}

fn check_unit_interval(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("time {t} outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn powerlaw_p(alpha: f64, k_max: usize) -> Vec<f64> {
        let mut p: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(alpha)).collect();
        let total: f64 = p.iter().sum();
        for x in &mut p {
            *x /= total;
        }
        p
    }

    /// Two-class toy model: p_1 = p_2 = 0.5 over a population of 4 with a
    /// uniform joint matrix.
    fn toy_stats() -> DegreeStats {
        let mut joint = ClassMatrix::zeros(2);
        for k in 1..=2 {
            for kp in 1..=2 {
                joint.set(k, kp, 0.25);
            }
        }
        DegreeStats::synthetic(vec![0.5, 0.5], joint, 4).unwrap()
    }

    #[test]
    fn coverage_endpoints() {
        let p = powerlaw_p(-2.0, 300);
        for k in [1usize, 5, 300] {
            assert_eq!(touched_fraction_k(&p, k, 0.0).unwrap(), 0.0);
            assert_abs_diff_eq!(
                touched_fraction_k(&p, k, 1.0).unwrap(),
                p[k - 1],
                epsilon = 1e-15
            );
        }
        assert_abs_diff_eq!(touched_fraction(&p, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(touched_fraction(&p, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(touched_fraction(&p, 1.5).is_err());
        assert!(touched_fraction_k(&p, 1, -0.1).is_err());
    }

    #[test]
    fn coverage_spot_value() {
        // f_1(0.19) = p_1 * 0.19 with p_1 = 0.6079 (k^-2 law)
        let p = vec![0.6079, 1.0 - 0.6079];
        let got = touched_fraction_k(&p, 1, 0.19).unwrap();
        assert_abs_diff_eq!(got, 0.1155, epsilon = 1e-4);
    }

    #[test]
    fn coverage_matches_direct_summation() {
        let p = powerlaw_p(-2.0, 300);
        let direct: f64 = 1.0
            - p.iter()
                .enumerate()
                .map(|(i, &pk)| pk * 0.5f64.powi(i as i32 + 1))
                .sum::<f64>();
        assert_abs_diff_eq!(touched_fraction(&p, 0.5).unwrap(), direct, epsilon = 1e-14);
    }

    #[test]
    fn inversion_round_trip() {
        let p = powerlaw_p(-2.0, 300);
        assert_eq!(invert_touched_fraction(&p, 0.0).unwrap(), 0.0);
        assert_eq!(invert_touched_fraction(&p, 1.0).unwrap(), 1.0);
        let y = touched_fraction(&p, 0.3).unwrap();
        let t = invert_touched_fraction(&p, y).unwrap();
        assert_abs_diff_eq!(t, 0.3, epsilon = 1e-8);
    }

    #[test]
    fn published_time_sequence_round_trips() {
        // YouTube-style inputs: alpha = -2, coverage fractions taken as
        // f(t) of the published times
        let p = powerlaw_p(-2.0, 300);
        let published = [0.0006, 0.02, 0.19, 0.53, 0.81, 0.93, 0.97, 0.99, 1.0];
        for &t in &published {
            let y = touched_fraction(&p, t).unwrap();
            let back = invert_touched_fraction(&p, y).unwrap();
            assert!((back - t).abs() < 0.02, "t={t} back={back}");
        }
    }

    #[test]
    fn single_iteration_covers_everything() {
        let stats = toy_stats();
        let profile = build_frontier_profile(&stats, &[4]).unwrap();
        assert_eq!(profile.iteration_count(), 1);
        assert_abs_diff_eq!(profile.times[0], 1.0, epsilon = 1e-12);
        for k in 1..=2 {
            assert_abs_diff_eq!(profile.dist_row(0)[k - 1], stats.p(k), epsilon = 1e-9);
            assert_abs_diff_eq!(profile.usage_row(0)[k - 1], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn two_class_toy_matches_hand_recursion() {
        // frozen from the hand-evaluated recursion: the half-coverage time
        // solves s^2 + s = 1, a golden-ratio split
        let stats = toy_stats();
        let profile = build_frontier_profile(&stats, &[2, 2]).unwrap();
        assert_abs_diff_eq!(profile.times[0], 0.3819660113, epsilon = 1e-8);
        assert_abs_diff_eq!(profile.times[1], 1.0, epsilon = 1e-12);
        let g = 0.6180339887;
        assert_abs_diff_eq!(profile.usage_row(0)[0], 1.0 - g, epsilon = 1e-6);
        assert_abs_diff_eq!(profile.usage_row(0)[1], g, epsilon = 1e-6);
        assert_abs_diff_eq!(profile.usage_row(1)[0], g, epsilon = 1e-6);
        assert_abs_diff_eq!(profile.usage_row(1)[1], 1.0 - g, epsilon = 1e-6);
        assert_abs_diff_eq!(profile.dist_row(0)[0], 1.0 - g, epsilon = 1e-6);
        assert_abs_diff_eq!(profile.dist_row(0)[1], g, epsilon = 1e-6);
        // conservation: per-class counts across iterations sum to p_k * N
        for k in 1..=2usize {
            let total: f64 = (0..2).map(|t| profile.raw_count_row(t)[k - 1]).sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-6);
        }
        // rows sum to 1 on nonempty iterations
        for tau in 0..2 {
            let s: f64 = profile.dist_row(tau).iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn toy_weight_table_matches_hand_arithmetic() {
        let stats = toy_stats();
        let profile = build_frontier_profile(&stats, &[2, 2]).unwrap();
        let table = message_weight_table(&profile, &stats, 0).unwrap();
        // frozen from direct evaluation of the inclusion-exclusion form
        assert_abs_diff_eq!(table.weight(1, 1), 0.11455098, epsilon = 1e-6);
        assert_abs_diff_eq!(table.weight(1, 2), 0.12848301, epsilon = 1e-6);
        assert_abs_diff_eq!(table.weight(2, 1), 0.12848301, epsilon = 1e-6);
        assert_abs_diff_eq!(table.weight(2, 2), 0.11455098, epsilon = 1e-6);
        assert!(table.weights.is_symmetric());
    }

    #[test]
    fn frontier_sizes_exceeding_population_rejected() {
        let stats = toy_stats();
        assert!(build_frontier_profile(&stats, &[3, 3]).is_err());
        assert!(build_frontier_profile(&stats, &[]).is_err());
    }

    #[test]
    fn transition_envelope_and_range_check() {
        let stats = toy_stats();
        let profile = build_frontier_profile(&stats, &[2, 2]).unwrap();
        assert!(transition_matrix(&profile, &stats, 1).is_err());

        // saturated usage on both rows reproduces the joint matrix itself
        let mut saturated = profile.clone();
        saturated.usage = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let trans = transition_matrix(&saturated, &stats, 0).unwrap();
        for k in 1..=2 {
            for kp in 1..=2 {
                assert_abs_diff_eq!(trans.get(k, kp), stats.joint.get(k, kp), epsilon = 1e-12);
            }
        }
        let table = message_weight_table(&saturated, &stats, 0).unwrap();
        for k in 1..=2 {
            for kp in 1..=2 {
                let q = stats.joint.get(k, kp);
                assert_abs_diff_eq!(table.weight(k, kp), 2.0 * q - q * q, epsilon = 1e-12);
            }
        }

        // zero usage gives the zero matrix
        let mut dead = profile.clone();
        dead.usage = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let zero = transition_matrix(&dead, &stats, 0).unwrap();
        assert_eq!(zero.total(), 0.0);
        let table = message_weight_table(&dead, &stats, 0).unwrap();
        assert_eq!(table.weights.total(), 0.0);
    }

    #[test]
    fn two_class_directional_transition() {
        let stats = toy_stats();
        let mut profile = build_frontier_profile(&stats, &[2, 2]).unwrap();
        profile.usage = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let trans = transition_matrix(&profile, &stats, 0).unwrap();
        assert_abs_diff_eq!(trans.get(1, 2), 0.25, epsilon = 1e-12);
        assert_eq!(trans.get(1, 1), 0.0);
        assert_eq!(trans.get(2, 1), 0.0);
        assert_eq!(trans.get(2, 2), 0.0);
    }

    #[test]
    fn weight_inclusion_exclusion_value() {
        // w = a + b - a*b for a = 0.3, b = 0.2
        let (a, b): (f64, f64) = (0.3, 0.2);
        assert_abs_diff_eq!(a + b - a * b, 0.44, epsilon = 1e-12);
    }

    #[test]
    fn youtube_profile_usage_shape() {
        // alpha = -2 with the published time sequence; the mid-run rows show
        // the bias switch: a mid-degree usage peak first, low degrees taking
        // over on the next iteration
        let p = powerlaw_p(-2.0, 300);
        let n: u64 = 1_134_890;
        let published = [0.0006, 0.02, 0.19, 0.53, 0.81, 0.93, 0.97, 0.99, 1.0];
        let mut sizes = Vec::new();
        let mut last = 0u64;
        for &t in &published {
            let cum = (touched_fraction(&p, t).unwrap() * n as f64).round() as u64;
            sizes.push(cum - last);
            last = cum;
        }
        let joint = ClassMatrix::zeros(300);
        let mut uniform = joint.clone();
        for k in 1..=300 {
            for kp in 1..=300 {
                uniform.set(k, kp, 1.0 / (300.0 * 300.0));
            }
        }
        let stats = DegreeStats::synthetic(p.clone(), uniform, n).unwrap();
        let profile = build_frontier_profile(&stats, &sizes).unwrap();

        // times reproduced within ±0.02
        for (got, want) in profile.times.iter().zip(published.iter()) {
            assert!((got - want).abs() < 0.02, "t {got} vs {want}");
        }
        // mid-degree bias row: usage peak within classes 5..=20, pi_1 ≈ 0.15
        let row4 = profile.usage_row(2);
        let argmax = (1..=300)
            .max_by(|&a, &b| row4[a - 1].total_cmp(&row4[b - 1]))
            .unwrap();
        assert!((5..=20).contains(&argmax), "peak class {argmax}");
        assert!((row4[0] - 0.15).abs() < 0.1, "pi_1 = {}", row4[0]);
        // next row: low-degree takeover (pi_1 ≈ 0.4) and mid-degree decay
        let row5 = profile.usage_row(3);
        assert!((row5[0] - 0.4).abs() < 0.1, "pi_1 = {}", row5[0]);
        assert!(row5[0] > row4[0]);
        assert!(row5[9] < row4[9]);
    }

    #[test]
    fn degree_one_share_of_touched_mass() {
        // with p_k ∝ k^-2 on a wide support, degree-1 vertices hold about a
        // quarter of the touched mass at t = 0.19
        let p = powerlaw_p(-2.0, 10_000);
        let t3 = 0.19;
        let share = touched_fraction_k(&p, 1, t3).unwrap() / touched_fraction(&p, t3).unwrap();
        assert!(
            (0.15..=0.35).contains(&share),
            "degree-1 share {share} outside tolerance"
        );
    }

    proptest! {
        #[test]
        fn coverage_is_monotone(
            raw in proptest::collection::vec(0.01f64..1.0, 1..40),
            t1 in 0.0f64..1.0,
            t2 in 0.0f64..1.0,
        ) {
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let f_lo = touched_fraction(&p, lo).unwrap();
            let f_hi = touched_fraction(&p, hi).unwrap();
            prop_assert!(f_lo <= f_hi + 1e-12);
        }

        #[test]
        fn inversion_round_trips_on_interior(
            raw in proptest::collection::vec(0.01f64..1.0, 1..40),
            t in 0.01f64..0.99,
        ) {
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let y = touched_fraction(&p, t).unwrap();
            let back = invert_touched_fraction(&p, y).unwrap();
            prop_assert!((back - t).abs() < 1e-8);
        }
    }
}
