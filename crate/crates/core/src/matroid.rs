//! Regular-matroid bases: budgeted counting and sampling over totally
//! unimodular representations, graphic matroids, and the reduction from
//! perfect matchings to cost-constrained spanning trees.

use std::fmt;
use std::str::FromStr;

use num::traits::{One, Signed, ToPrimitive, Zero};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::counting::{bcount, ecount, BudgetConstraint, CountConfig, Family, Mass, MassValue};
use crate::error::{Error, Result};
use crate::field::{Field, Q};
use crate::genpoly::matroid_oracle;
use crate::interp::round_to_integer;
use crate::linalg::{bareiss_det, rational_column_basis};
use crate::sampling::Sampler;

/// Largest square submatrix inspected by the unimodularity spot-check.
const TU_CHECK_ORDER: usize = 6;
const TU_CHECK_TRIALS: usize = 64;

/// `m×r` matrix with entries in `{−1, 0, 1}`; row `e` represents element `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TUMatrix {
    m: usize,
    r: usize,
    entries: Vec<i64>,
}

impl TUMatrix {
    /// Row-major entries. Total unimodularity is spot-checked on random
    /// square submatrices up to 6×6; full column rank is checked by
    /// [`matroid_oracle`].
    pub fn new(m: usize, r: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != m * r {
            return Err(Error::DimensionMismatch(format!(
                "expected {m}×{r} entries, got {}",
                entries.len()
            )));
        }
        if let Some(v) = entries.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::InvalidInput(format!("entry {v} is not in {{-1, 0, 1}}")));
        }
        let a = TUMatrix { m, r, entries };
        a.spot_check(0x5eed)?;
        Ok(a)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.r + col]
    }

    fn spot_check(&self, seed: u64) -> Result<()> {
        let order = TU_CHECK_ORDER.min(self.m).min(self.r);
        if order < 2 {
            return Ok(());
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..TU_CHECK_TRIALS {
            let k = rng.gen_range(2..=order);
            let rows = rand::seq::index::sample(&mut rng, self.m, k).into_vec();
            let cols = rand::seq::index::sample(&mut rng, self.r, k).into_vec();
            let sub: Vec<Q> = rows
                .iter()
                .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
                .map(|(i, j)| Q::from_int(self.get(i, j)))
                .collect();
            let det = bareiss_det(&sub, k);
            if det.abs() > Q::one() {
                return Err(Error::InvalidInput(format!(
                    "matrix is not totally unimodular (a {k}×{k} minor equals {det})"
                )));
            }
        }
        Ok(())
    }
}

/// Undirected multigraph on vertices `0..n` (1-indexed in text form).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    costs: Option<Vec<i64>>,
}

impl Graph {
    /// `edges` are 0-indexed pairs; self-loops are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) has an endpoint outside 1..{n}",
                    u + 1,
                    v + 1
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {}", u + 1)));
            }
        }
        Ok(Graph {
            n,
            edges,
            costs: None,
        })
    }

    pub fn with_costs(mut self, costs: Vec<i64>) -> Result<Self> {
        if costs.len() != self.edges.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} costs for {} edges",
                costs.len(),
                self.edges.len()
            )));
        }
        self.costs = Some(costs);
        Ok(self)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, edges).expect("cycle on n ≥ 2 vertices")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn costs(&self) -> Option<&[i64]> {
        self.costs.as_deref()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Edge list with one `u v [cost]` line per edge, 1-indexed vertices.
    /// Blank lines and `#` comments are ignored; the vertex count is the
    /// largest endpoint.
    fn from_str(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut costs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidInput(format!("line {}: expected `u v [cost]`", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(bad());
            }
            let u: usize = fields[0].parse().map_err(|_| bad())?;
            let v: usize = fields[1].parse().map_err(|_| bad())?;
            if u == 0 || v == 0 {
                return Err(bad());
            }
            edges.push((u - 1, v - 1));
            if let Some(c) = fields.get(2) {
                costs.push(c.parse::<i64>().map_err(|_| bad())?);
            }
        }
        if !costs.is_empty() && costs.len() != edges.len() {
            return Err(Error::InvalidInput(
                "either every edge or no edge must carry a cost".into(),
            ));
        }
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let g = Graph::new(n, edges)?;
        if costs.is_empty() {
            Ok(g)
        } else {
            g.with_costs(costs)
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            match &self.costs {
                Some(c) => writeln!(f, "{} {} {}", u + 1, v + 1, c[k])?,
                None => writeln!(f, "{} {}", u + 1, v + 1)?,
            }
        }
        Ok(())
    }
}

/// Signed incidence matrix with the row of vertex 1 deleted: one row per
/// edge, `n − 1` columns. Bases are exactly the spanning trees.
pub fn graphic_representation(g: &Graph) -> Result<TUMatrix> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let r = g.n.saturating_sub(1);
    let mut entries = vec![0i64; g.m() * r];
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        let (tail, head) = (u.min(v), u.max(v));
        if tail > 0 {
            entries[e * r + tail - 1] = 1;
        }
        entries[e * r + head - 1] = -1;
    }
    Ok(TUMatrix {
        m: g.m(),
        r,
        entries,
    })
}

/// Drops linearly dependent columns (left to right) until the matrix has
/// full column rank; the column matroid of the rows is unchanged.
pub fn reduce_to_basis_columns(m: usize, d: usize, entries: &[i64]) -> Result<TUMatrix> {
    if entries.len() != m * d {
        return Err(Error::DimensionMismatch(format!(
            "expected {m}×{d} entries, got {}",
            entries.len()
        )));
    }
    let q: Vec<Q> = entries.iter().map(|&v| Q::from_int(v)).collect();
    let keep = rational_column_basis(&q, m, d);
    let r = keep.len();
    let reduced = (0..m)
        .flat_map(|i| keep.iter().map(move |&j| entries[i * d + j]))
        .collect();
    TUMatrix::new(m, r, reduced)
}

fn integer_mass(mass: &Mass) -> Result<BigInt> {
    match &mass.value {
        MassValue::Float(v) => round_to_integer(*v),
        MassValue::Exact(q) if q.is_integer() => Ok(q.to_integer()),
        MassValue::Exact(q) => Err(Error::NumericalResolutionExceeded {
            value: q.to_f64().unwrap_or(f64::NAN),
            context: "exact basis count is not an integer",
        }),
    }
}

/// Number of bases `B` with `c(B) ≤ budget`.
pub fn count_bases_budgeted(a: &TUMatrix, costs: &[i64], budget: i64, cfg: &CountConfig) -> Result<BigInt> {
    let g = matroid_oracle(a)?;
    integer_mass(&bcount(&g, costs, budget, cfg)?)
}

/// Uniform basis among those with `c(B) ≤ budget` (0-indexed rows).
pub fn sample_basis_budgeted(
    a: &TUMatrix,
    costs: &[i64],
    budget: i64,
    seed: u64,
    cfg: &CountConfig,
) -> Result<Vec<usize>> {
    basis_sampler(a, costs, budget, cfg)?.sample(seed).map(|s| s.subset)
}

/// Sampler over budget-feasible bases, for repeated draws.
pub fn basis_sampler(a: &TUMatrix, costs: &[i64], budget: i64, cfg: &CountConfig) -> Result<Sampler> {
    if costs.len() != a.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} costs for {} elements",
            costs.len(),
            a.m()
        )));
    }
    let fam = Family::Budget(BudgetConstraint {
        costs: costs.to_vec(),
        budget,
    });
    Sampler::new(matroid_oracle(a)?, &fam, *cfg)
}

/// Spanning-tree instance whose cost-`C` trees encode the perfect matchings
/// of the source graph.
#[derive(Clone, Debug, PartialEq)]
pub struct PmReductionInstance {
    /// `G` plus a cost-0 edge for every vertex pair; the original edges come
    /// first.
    pub graph: Graph,
    /// `b^i + b^j` for original edges `{i, j}` (1-indexed vertices), 0 otherwise.
    pub costs: Vec<BigInt>,
    pub target: BigInt,
    pub base: u64,
    /// Number of cost-`C` spanning trees per perfect matching.
    pub alpha_inv: Q,
}

/// Cayley-type count `4^{n/2−1} (n/2)^{n/2−2}` of spanning trees of the
/// complete graph on the contracted matching, each contracted pair joined by
/// four parallel edges.
pub fn pm_alpha_inv(n: usize) -> Q {
    let h = (n / 2) as i64;
    Q::from_int(4).powi(h - 1) * Q::from_int(h).powi(h - 2)
}

pub fn pm_to_st_instance(g: &Graph) -> Result<PmReductionInstance> {
    let n = g.n();
    if n % 2 == 1 {
        return Err(Error::OddVertexCount(n));
    }
    if n == 0 {
        return Err(Error::InvalidInput("graph has no vertices".into()));
    }
    let mut edges = g.edges().to_vec();
    edges.extend((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))));
    let m_prime = edges.len();
    let base = m_prime as u64 + 1;
    let b = BigInt::from(base);
    let pow = |i: usize| num::pow::pow(b.clone(), i + 1);
    let costs = edges
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| {
            if k < g.m() {
                pow(u) + pow(v)
            } else {
                BigInt::zero()
            }
        })
        .collect();
    let target = (0..n).map(pow).sum();
    Ok(PmReductionInstance {
        graph: Graph::new(n, edges)?,
        costs,
        target,
        base,
        alpha_inv: pm_alpha_inv(n),
    })
}

/// Perfect matchings of `g`, computed as the number of spanning trees of the
/// reduction graph with cost exactly `C`, divided by `alpha_inv`.
pub fn count_pm_via_reduction(g: &Graph, cfg: &CountConfig) -> Result<BigInt> {
    let inst = pm_to_st_instance(g)?;
    let norm: BigInt = inst.costs.iter().sum();
    if norm > BigInt::from(cfg.grid_budget) {
        return Err(Error::CostBudgetExceeded(format!(
            "reduction costs have ‖c‖₁ = {norm}, above the grid budget {}",
            cfg.grid_budget
        )));
    }
    let costs: Vec<i64> = inst
        .costs
        .iter()
        .map(|c| c.to_i64().expect("bounded by the grid budget"))
        .collect();
    let target = inst.target.to_i64().expect("bounded by the grid budget");
    let a = graphic_representation(&inst.graph)?;
    let trees = integer_mass(&ecount(&matroid_oracle(&a)?, &costs, target, cfg)?)?;
    let ratio = Q::from_integer(trees) / &inst.alpha_inv;
    if !ratio.is_integer() {
        return Err(Error::NumericalResolutionExceeded {
            value: ratio.to_f64().unwrap_or(f64::NAN),
            context: "tree count is not a multiple of alpha_inv",
        });
    }
    Ok(ratio.to_integer())
}
