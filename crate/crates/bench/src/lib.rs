//! Seeded benchmark instances.

use cdpp_core::{FeatureMatrix, Graph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// `m×n` factor with entries uniform in `[-1, 1]`.
pub fn random_factor(m: usize, n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    FeatureMatrix::new(values).expect("finite entries")
}

/// Positive integer costs summing to exactly `l1` (requires `l1 ≥ m`).
pub fn spread_costs(m: usize, l1: i64, seed: u64) -> Vec<i64> {
    assert!(l1 >= m as i64, "need at least one unit per element");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut costs = vec![1i64; m];
    for _ in 0..l1 - m as i64 {
        costs[rng.gen_range(0..m)] += 1;
    }
    costs
}

/// Connected graph on `n` vertices with `m` edges: a random spanning tree
/// plus random extra edges.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    while edges.len() < m {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    Graph::new(n, edges).expect("endpoints in range")
}
