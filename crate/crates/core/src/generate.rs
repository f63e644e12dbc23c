//! Synthetic graph generators: Erdős–Rényi and the configuration model.
//!
//! All generators are deterministic for a fixed seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Generates a uniform random simple graph with exactly `m` distinct edges.
///
/// Use [`Graph::components`] to find the largest connected component when an
/// experiment should be restricted to it.
pub fn generate_er(n: usize, m: u64, seed: u64) -> Result<Graph> {
    let max_edges = n as u64 * (n as u64).saturating_sub(1) / 2;
    if m > max_edges {
        return Err(Error::InvalidArgument(format!(
            "requested {m} edges but {n} vertices admit at most {max_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // dense requests: shuffle the full pair universe instead of rejection
    // sampling (only viable at small n, which is also where density happens)
    if m * 2 > max_edges && max_edges <= 20_000_000 {
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(max_edges as usize);
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                pairs.push((u, v));
            }
        }
        pairs.shuffle(&mut rng);
        pairs.truncate(m as usize);
        return Graph::from_edges(n, pairs);
    }

    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(m as usize * 2);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m as usize);
    while edges.len() < m as usize {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Graph::from_edges(n, edges)
}

/// Builds a configuration-model graph by uniform stub pairing.
///
/// Self-loops and multi-edges produced by the pairing are discarded (simple
/// projection), so realized degrees can fall slightly below the targets.
pub fn generate_config_model(degrees: &[usize], seed: u64) -> Result<Graph> {
    let stub_total: usize = degrees.iter().sum();
    if stub_total % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "degree sequence sums to odd stub total {stub_total}"
        )));
    }
    let mut stubs: Vec<u32> = Vec::with_capacity(stub_total);
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat(v as u32).take(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    stubs.shuffle(&mut rng);
    let edges = stubs.chunks_exact(2).map(|pair| (pair[0], pair[1]));
    Graph::from_edges(degrees.len(), edges)
}

/// Samples a degree sequence from `p_k ∝ k^alpha` on support `1..=k_max`,
/// bumping one degree if needed to make the stub total even.
pub fn powerlaw_degree_sequence(n: usize, alpha: f64, k_max: usize, seed: u64) -> Result<Vec<usize>> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let mut cdf: Vec<f64> = Vec::with_capacity(k_max);
    let mut acc = 0.0;
    for k in 1..=k_max {
        acc += (k as f64).powf(alpha);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degrees: Vec<usize> = (0..n)
        .map(|_| {
            let x = rng.gen_range(0.0..total);
            match cdf.binary_search_by(|c| c.partial_cmp(&x).unwrap()) {
                Ok(i) | Err(i) => i + 1,
            }
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 != 0 {
        if let Some(d) = degrees.iter_mut().find(|d| **d < k_max) {
            *d += 1;
        } else {
            degrees[0] += 1;
        }
    }
    Ok(degrees)
}

/// Convenience wrapper: power-law degree sequence plus configuration model.
pub fn generate_powerlaw(n: usize, alpha: f64, k_max: usize, seed: u64) -> Result<Graph> {
    let degrees = powerlaw_degree_sequence(n, alpha, k_max, seed)?;
    generate_config_model(&degrees, seed.wrapping_add(1))
}
