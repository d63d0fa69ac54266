//! Seeded instance generators shared by the integration tests.

#![allow(dead_code)]

use cdpp_core::counting::{Allowed, BudgetConstraint, Family, LinearConstraint, LinearFamily, PartitionFamily};
use cdpp_core::matroid::Graph;
use cdpp_core::{FeatureMatrix, Kernel, Q};
use nalgebra::DMatrix;
use num::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `m×n` factor with integer entries in `[-r, r]`, so every minor of
/// `V Vᵀ` is a nonnegative integer.
pub fn int_factor(rng: &mut impl Rng, m: usize, n: usize, r: i64) -> FeatureMatrix {
    let entries = (0..m * n).map(|_| Q::from_integer(BigInt::from(rng.gen_range(-r..=r)))).collect();
    FeatureMatrix::from_rational(m, n, entries).unwrap()
}

/// Factor with entries uniform in `[-1, 1]`.
pub fn float_factor(rng: &mut impl Rng, m: usize, n: usize) -> FeatureMatrix {
    FeatureMatrix::new(DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))).unwrap()
}

pub fn float_kernel(rng: &mut impl Rng, m: usize) -> Kernel {
    let n = rng.gen_range(1..=m);
    Kernel::new(psd_matrix(rng, m, n)).unwrap()
}

/// `G Gᵀ` for a `d×rank` matrix with entries uniform in `[-1, 1]`.
pub fn psd_matrix(rng: &mut impl Rng, d: usize, rank: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, rank, |_, _| rng.gen_range(-1.0..1.0));
    let a = &g * g.transpose();
    (&a + a.transpose()) * 0.5
}

/// Costs in `[-lim, lim]` with `‖c‖₁ ≤ l1`; at least one nonzero entry.
pub fn costs(rng: &mut impl Rng, m: usize, lim: i64, l1: i64) -> Vec<i64> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut c = vec![0i64; m];
    let mut left = rng.gen_range(1..=l1);
    for i in order {
        let r = lim.min(left);
        c[i] = rng.gen_range(-r..=r);
        left -= c[i].abs();
    }
    if c.iter().all(|&v| v == 0) {
        c[rng.gen_range(0..m)] = if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    c
}

pub fn nonneg_costs(rng: &mut impl Rng, m: usize, lim: i64) -> Vec<i64> {
    (0..m).map(|_| rng.gen_range(0..=lim)).collect()
}

/// Range of `c(S)` over all subsets.
pub fn cost_range(c: &[i64]) -> (i64, i64) {
    let lo = c.iter().filter(|v| **v < 0).sum();
    let hi = c.iter().filter(|v| **v > 0).sum();
    (lo, hi)
}

/// One counting query against a family.
#[derive(Clone, Debug)]
pub enum Query {
    Budget(Vec<i64>, i64),
    Equality(Vec<i64>, i64),
    Set(Vec<i64>, Allowed),
    Linear(LinearFamily),
    Partition(PartitionFamily),
}

impl Query {
    pub fn family(&self) -> Family {
        let m = self.m();
        match self {
            Query::Budget(c, b) => Family::Budget(BudgetConstraint {
                costs: c.clone(),
                budget: *b,
            }),
            Query::Equality(c, t) => Family::Linear(
                LinearFamily::new(m, vec![LinearConstraint::new(c.clone(), Allowed::exactly(*t))]).unwrap(),
            ),
            Query::Set(c, k) => {
                Family::Linear(LinearFamily::new(m, vec![LinearConstraint::new(c.clone(), k.clone())]).unwrap())
            }
            Query::Linear(f) => Family::Linear(f.clone()),
            Query::Partition(p) => Family::Partition(p.clone()),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Query::Budget(c, _) | Query::Equality(c, _) | Query::Set(c, _) => c.len(),
            Query::Linear(f) => f.m(),
            Query::Partition(p) => p.m(),
        }
    }

    /// The first cost vector of the query, if any.
    pub fn primary_costs(&self) -> Option<&[i64]> {
        match self {
            Query::Budget(c, _) | Query::Equality(c, _) | Query::Set(c, _) => Some(c),
            Query::Linear(f) => f.constraints().first().map(|c| c.costs.as_slice()),
            Query::Partition(_) => None,
        }
    }
}

fn allowed(rng: &mut impl Rng, lo: i64, hi: i64) -> Allowed {
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(1..=4);
        Allowed::set((0..k).map(|_| rng.gen_range(lo..=hi)))
    } else {
        let a = rng.gen_range(lo..=hi);
        let b = rng.gen_range(lo..=hi);
        Allowed::Interval(a.min(b), a.max(b))
    }
}

/// Query of the given kind (0..5) over `m` elements with `‖c_j‖₁ ≤ l1`.
/// Linear families use `p ≤ 3` constraints whose grid stays below
/// `grid` points.
pub fn query(rng: &mut impl Rng, kind: usize, m: usize, l1: i64, grid: i64) -> Query {
    match kind {
        0 => {
            let c = costs(rng, m, 10, l1);
            let (lo, hi) = cost_range(&c);
            Query::Budget(c, rng.gen_range(lo - 1..=hi))
        }
        1 => {
            let c = costs(rng, m, 10, l1);
            let (lo, hi) = cost_range(&c);
            Query::Equality(c, rng.gen_range(lo..=hi))
        }
        2 => {
            let c = costs(rng, m, 10, l1);
            let (lo, hi) = cost_range(&c);
            let k = allowed(rng, lo, hi);
            Query::Set(c, k)
        }
        3 => {
            let p = rng.gen_range(1..=3usize);
            let per = ((grid as f64).powf(1.0 / p as f64) as i64 - 1).clamp(1, l1);
            let constraints = (0..p)
                .map(|_| {
                    let c = costs(rng, m, per.min(10), per);
                    let (lo, hi) = cost_range(&c);
                    let k = allowed(rng, lo, hi);
                    LinearConstraint::new(c, k)
                })
                .collect();
            Query::Linear(LinearFamily::new(m, constraints).unwrap())
        }
        _ => Query::Partition(partition(rng, m, 3)),
    }
}

/// Random partition of `[m]` into at most `max_parts` nonempty blocks with
/// random quotas.
pub fn partition(rng: &mut impl Rng, m: usize, max_parts: usize) -> PartitionFamily {
    let p = rng.gen_range(1..=max_parts.min(m));
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut parts = vec![Vec::new(); p];
    for (i, e) in order.into_iter().enumerate() {
        let j = if i < p { i } else { rng.gen_range(0..p) };
        parts[j].push(e);
    }
    let quotas = parts.iter().map(|b| rng.gen_range(0..=b.len())).collect();
    PartitionFamily::new(m, parts, quotas).unwrap()
}

/// Connected graph on `n` vertices with `m ≥ n−1` edges (no self-loops;
/// parallel edges allowed).
pub fn connected_graph(rng: &mut impl Rng, n: usize, m: usize) -> Graph {
    let mut edges = Vec::with_capacity(m);
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    while edges.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    edges.shuffle(rng);
    Graph::new(n, edges).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Elements of a bitmask, ascending.
pub fn members(mask: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}
