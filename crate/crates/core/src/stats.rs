//! Degree statistics: capped degree distribution, joint degree matrix and
//! assortativity.

use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Caps a degree into the class range `1..=k_cap`.
#[inline]
pub fn capped(degree: usize, k_cap: usize) -> usize {
    degree.min(k_cap)
}

/// Dense square matrix over capped degree classes `1..=k_cap`.
///
/// Accessors are 1-based in the class index; storage is row-major over the
/// `k_cap × k_cap` block.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassMatrix {
    k_cap: usize,
    data: Vec<f64>,
}

impl ClassMatrix {
    pub fn zeros(k_cap: usize) -> Self {
        ClassMatrix {
            k_cap,
            data: vec![0.0; k_cap * k_cap],
        }
    }

    pub fn k_cap(&self) -> usize {
        self.k_cap
    }

    #[inline]
    pub fn get(&self, k: usize, kp: usize) -> f64 {
        debug_assert!(k >= 1 && k <= self.k_cap && kp >= 1 && kp <= self.k_cap);
        self.data[(k - 1) * self.k_cap + (kp - 1)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, kp: usize, value: f64) {
        debug_assert!(k >= 1 && k <= self.k_cap && kp >= 1 && kp <= self.k_cap);
        self.data[(k - 1) * self.k_cap + (kp - 1)] = value;
    }

    #[inline]
    pub fn add(&mut self, k: usize, kp: usize, value: f64) {
        debug_assert!(k >= 1 && k <= self.k_cap && kp >= 1 && kp <= self.k_cap);
        self.data[(k - 1) * self.k_cap + (kp - 1)] += value;
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    /// Adds `other` elementwise; the caps must match.
    pub fn accumulate(&mut self, other: &ClassMatrix) {
        assert_eq!(self.k_cap, other.k_cap);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Returns `self + selfᵀ`.
    pub fn symmetrized(&self) -> ClassMatrix {
        let mut out = ClassMatrix::zeros(self.k_cap);
        for k in 1..=self.k_cap {
            for kp in 1..=self.k_cap {
                out.set(k, kp, self.get(k, kp) + self.get(kp, k));
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        for k in 1..=self.k_cap {
            for kp in (k + 1)..=self.k_cap {
                if self.get(k, kp) != self.get(kp, k) {
                    return false;
                }
            }
        }
        true
    }

    /// Row-major data over classes `1..=k_cap`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Structural statistics of a graph: `p_k`, the joint degree matrix and the
/// degree assortativity coefficient.
#[derive(Clone, Debug)]
pub struct DegreeStats {
    /// Vertex count of the source graph.
    pub n: u64,
    /// Undirected edge count of the source graph.
    pub edge_count: u64,
    /// Number of vertices with degree ≥ 1 (the support of `p_k`).
    pub population: u64,
    /// Degree cap; classes are `1..=k_cap`.
    pub k_cap: usize,
    p_by_class: Vec<f64>,
    /// Joint degree distribution over ordered edge endpoint classes.
    pub joint: ClassMatrix,
    /// Pearson assortativity of capped endpoint degrees (0 for zero variance).
    pub r: f64,
}

impl DegreeStats {
    /// Builds statistics from analytic inputs instead of a graph, for model
    /// studies where `p_k` and the joint matrix are given in closed form.
    ///
    /// `p` is indexed by class − 1 and must sum to 1; `joint` must be a
    /// symmetric distribution over ordered class pairs.
    pub fn synthetic(p: Vec<f64>, joint: ClassMatrix, population: u64) -> Result<DegreeStats> {
        if p.len() != joint.k_cap() {
            return Err(Error::SizeMismatch {
                expected: p.len(),
                got: joint.k_cap(),
            });
        }
        let p_total: f64 = p.iter().sum();
        if (p_total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "degree distribution sums to {p_total}, expected 1"
            )));
        }
        let k_cap = p.len();
        Ok(DegreeStats {
            n: population,
            edge_count: 0,
            population,
            k_cap,
            p_by_class: p,
            joint,
            r: 0.0,
        })
    }

    /// Probability of degree class `k` (1-based, capped).
    #[inline]
    pub fn p(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.k_cap {
            self.p_by_class[k - 1]
        } else {
            0.0
        }
    }

    /// Degree distribution as a slice: `p_k()[i]` is the probability of
    /// class `i + 1`.
    pub fn p_k(&self) -> &[f64] {
        &self.p_by_class
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "N": self.n,
            "E": self.edge_count,
            "k_cap": self.k_cap,
            "p_k": self.p_by_class,
            "q": self.joint.data(),
            "r": self.r,
        })
    }
}

/// Computes [`DegreeStats`] with every degree ≥ `k_cap` folded into the top
/// class. Each undirected edge contributes both endpoint orderings to the
/// joint matrix and to the assortativity samples.
pub fn degree_stats(g: &Graph, k_cap: usize) -> Result<DegreeStats> {
    if k_cap < 1 {
        return Err(Error::InvalidArgument("k_cap must be at least 1".into()));
    }
    let n = g.vertex_count();
    let mut counts = vec![0u64; k_cap + 1];
    let mut population = 0u64;
    for v in 0..n as u32 {
        let d = g.degree(v);
        if d == 0 {
            continue;
        }
        counts[capped(d, k_cap)] += 1;
        population += 1;
    }
    let mut p_by_class = vec![0.0; k_cap];
    if population > 0 {
        for k in 1..=k_cap {
            p_by_class[k - 1] = counts[k] as f64 / population as f64;
        }
    }

    let mut joint = ClassMatrix::zeros(k_cap);
    let samples = (2 * g.edge_count()) as f64;
    let (mut sx, mut sxx, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for (u, v) in g.edges() {
        let ku = capped(g.degree(u), k_cap);
        let kv = capped(g.degree(v), k_cap);
        joint.add(ku, kv, 1.0);
        joint.add(kv, ku, 1.0);
        let (a, b) = (ku as f64, kv as f64);
        sx += a + b;
        sxx += a * a + b * b;
        sxy += 2.0 * a * b;
    }
    if samples > 0.0 {
        joint.scale(1.0 / samples);
    }
    // by symmetry of the ordered samples the x and y moments coincide
    let r = if samples > 0.0 {
        let mean = sx / samples;
        let var = sxx / samples - mean * mean;
        let cov = sxy / samples - mean * mean;
        if var > 1e-12 {
            cov / var
        } else {
            0.0
        }
    } else {
        0.0
    };

    Ok(DegreeStats {
        n: n as u64,
        edge_count: g.edge_count(),
        population,
        k_cap,
        p_by_class,
        joint,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(
            n,
            (0..n as u32).map(|v| (v, (v + 1) % n as u32)),
        )
        .unwrap()
    }

    #[test]
    fn regular_graph_has_zero_assortativity() {
        let stats = degree_stats(&cycle(4), 300).unwrap();
        assert_abs_diff_eq!(stats.p(2), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.joint.get(2, 2), 1.0, epsilon = 1e-12);
        assert_eq!(stats.r, 0.0);
    }

    #[test]
    fn star_graph_statistics() {
        // K_{1,5}: p_1 = 5/6, p_5 = 1/6, q(1,5) = q(5,1) = 1/2, r = -1
        let g = Graph::from_edges(6, (1..6).map(|v| (0u32, v as u32))).unwrap();
        let stats = degree_stats(&g, 300).unwrap();
        assert_abs_diff_eq!(stats.p(1), 5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.p(5), 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.joint.get(1, 5), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.joint.get(5, 1), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.r, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn distributions_are_normalized() {
        let g = crate::generate::generate_er(500, 2000, 11).unwrap();
        let stats = degree_stats(&g, 300).unwrap();
        let p_total: f64 = stats.p_k().iter().sum();
        assert_abs_diff_eq!(p_total, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(stats.joint.total(), 1.0, epsilon = 1e-9);
        assert!(stats.joint.is_symmetric());
        assert!((-1.0..=1.0).contains(&stats.r));
    }

    #[test]
    fn degrees_above_cap_fold_into_top_class() {
        let g = Graph::from_edges(8, (1..8).map(|v| (0u32, v as u32))).unwrap();
        let stats = degree_stats(&g, 3).unwrap();
        // hub degree 7 folds into class 3
        assert_abs_diff_eq!(stats.p(3), 1.0 / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.p(1), 7.0 / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.joint.get(1, 3), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn isolated_vertices_excluded_from_support() {
        let g = Graph::from_edges(4, vec![(0, 1)]).unwrap();
        let stats = degree_stats(&g, 10).unwrap();
        assert_eq!(stats.population, 2);
        assert_abs_diff_eq!(stats.p(1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invariant_under_relabeling() {
        let g = Graph::from_edges(6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]).unwrap();
        // relabel via the permutation v -> (v * 5 + 2) mod 6 (a bijection)
        let perm = |v: u32| ((v * 5 + 2) % 6) as u32;
        let h = Graph::from_edges(6, g.edges().map(|(u, v)| (perm(u), perm(v)))).unwrap();
        let a = degree_stats(&g, 300).unwrap();
        let b = degree_stats(&h, 300).unwrap();
        assert_eq!(a.p_k(), b.p_k());
        assert_eq!(a.joint.data(), b.joint.data());
        assert_abs_diff_eq!(a.r, b.r, epsilon = 1e-12);
    }
}
