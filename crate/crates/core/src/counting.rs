//! Constrained counting: sums of `μ(S)` over budget, equality, membership,
//! linear and partition families.
//!
//! Every count is one tensor of coefficients. Constraint `j` becomes a
//! variable `t_j` substituted as `x_i ↦ x_i t_j^{c_j[i]}`; the coefficient of
//! `∏ t_j^{d_j}` is the mass of sets with `c_j(S) = d_j`. Negative costs are
//! handled by multiplying with `t_j^{s_j}`, `s_j` the sum of the negative
//! entries' magnitudes, so coefficient index `d` stands for cost `d − s_j`.

use std::collections::BTreeSet;
use std::fmt;

use num::traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{format_rational, Backend, Field, C64, Q};
use crate::genpoly::{self, GenPolyOracle, TransformProgram};
use crate::interp::{self, InterpOptions, DEFAULT_GRID_BUDGET};

/// Admissible values `K` of one linear constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Allowed {
    Set(BTreeSet<i64>),
    /// Closed interval `[lo, hi]`.
    Interval(i64, i64),
}

impl Allowed {
    pub fn set(values: impl IntoIterator<Item = i64>) -> Self {
        Allowed::Set(values.into_iter().collect())
    }

    pub fn at_most(hi: i64) -> Self {
        Allowed::Interval(i64::MIN, hi)
    }

    pub fn exactly(v: i64) -> Self {
        Allowed::Interval(v, v)
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Allowed::Set(s) => s.contains(&v),
            Allowed::Interval(lo, hi) => *lo <= v && v <= *hi,
        }
    }
}

/// One constraint `c(S) ∈ K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub costs: Vec<i64>,
    pub allowed: Allowed,
}

impl LinearConstraint {
    pub fn new(costs: Vec<i64>, allowed: Allowed) -> Self {
        LinearConstraint { costs, allowed }
    }

    pub fn value(&self, subset: &[usize]) -> i64 {
        subset.iter().map(|&i| self.costs[i]).sum()
    }
}

/// Intersection of linear constraints over a ground set of size `m`. An empty
/// constraint list is the unconstrained family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFamily {
    m: usize,
    constraints: Vec<LinearConstraint>,
}

impl LinearFamily {
    pub fn new(m: usize, constraints: Vec<LinearConstraint>) -> Result<Self> {
        if let Some(c) = constraints.iter().find(|c| c.costs.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "cost vector of length {} for ground set of size {m}",
                c.costs.len()
            )));
        }
        Ok(LinearFamily { m, constraints })
    }

    pub fn unconstrained(m: usize) -> Self {
        LinearFamily {
            m,
            constraints: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn contains(&self, subset: &[usize]) -> bool {
        self.constraints
            .iter()
            .all(|c| c.allowed.contains(c.value(subset)))
    }
}

/// `c(S) ≤ C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetConstraint {
    pub costs: Vec<i64>,
    pub budget: i64,
}

/// Sets meeting quota `b_j` exactly on every block `P_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionFamily {
    m: usize,
    parts: Vec<Vec<usize>>,
    quotas: Vec<usize>,
}

impl PartitionFamily {
    /// `parts` are 0-indexed and must partition `0..m`.
    pub fn new(m: usize, parts: Vec<Vec<usize>>, quotas: Vec<usize>) -> Result<Self> {
        if parts.len() != quotas.len() {
            return Err(Error::InvalidFamily(format!(
                "{} parts but {} quotas",
                parts.len(),
                quotas.len()
            )));
        }
        let mut seen = vec![false; m];
        for part in &parts {
            if part.is_empty() {
                return Err(Error::InvalidFamily("empty part".into()));
            }
            for &i in part {
                if i >= m || seen[i] {
                    return Err(Error::InvalidFamily(format!(
                        "element {} is out of range or repeated",
                        i + 1
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidFamily(format!("element {} is in no part", i + 1)));
        }
        if let Some((j, _)) = parts
            .iter()
            .zip(&quotas)
            .enumerate()
            .find(|(_, (p, &b))| b > p.len())
        {
            return Err(Error::InvalidFamily(format!(
                "quota {} exceeds size of part {}",
                quotas[j],
                j + 1
            )));
        }
        Ok(PartitionFamily { m, parts, quotas })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn quotas(&self) -> &[usize] {
        &self.quotas
    }

    pub fn to_linear(&self) -> LinearFamily {
        let constraints = self
            .parts
            .iter()
            .zip(&self.quotas)
            .map(|(part, &b)| {
                let mut costs = vec![0; self.m];
                for &i in part {
                    costs[i] = 1;
                }
                LinearConstraint::new(costs, Allowed::exactly(b as i64))
            })
            .collect();
        LinearFamily {
            m: self.m,
            constraints,
        }
    }
}

/// Any family the engine can count over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Unconstrained(usize),
    Budget(BudgetConstraint),
    Linear(LinearFamily),
    Partition(PartitionFamily),
}

impl Family {
    pub fn m(&self) -> usize {
        match self {
            Family::Unconstrained(m) => *m,
            Family::Budget(b) => b.costs.len(),
            Family::Linear(l) => l.m,
            Family::Partition(p) => p.m,
        }
    }

    pub fn to_linear(&self) -> LinearFamily {
        match self {
            Family::Unconstrained(m) => LinearFamily::unconstrained(*m),
            Family::Budget(b) => LinearFamily {
                m: b.costs.len(),
                constraints: vec![LinearConstraint::new(
                    b.costs.clone(),
                    Allowed::at_most(b.budget),
                )],
            },
            Family::Linear(l) => l.clone(),
            Family::Partition(p) => p.to_linear(),
        }
    }

    /// Membership of a 0-indexed subset.
    pub fn contains(&self, subset: &[usize]) -> bool {
        self.to_linear().contains(subset)
    }
}

/// A mass in one of the two backends.
#[derive(Clone, Debug, PartialEq)]
pub enum MassValue {
    Float(f64),
    Exact(Q),
}

impl MassValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MassValue::Float(v) => *v,
            MassValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MassValue::Float(v) => *v == 0.0,
            MassValue::Exact(q) => q.is_zero(),
        }
    }
}

impl fmt::Display for MassValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MassValue::Float(v) => write!(f, "{v}"),
            MassValue::Exact(q) => f.write_str(&format_rational(q)),
        }
    }
}

/// Result of a counting operation.
#[derive(Clone, Debug, PartialEq)]
pub struct Mass {
    pub value: MassValue,
    /// Heuristic absolute error bound (float backend only).
    pub error_bound: Option<f64>,
}

impl Mass {
    pub fn backend(&self) -> Backend {
        match self.value {
            MassValue::Float(_) => Backend::Float,
            MassValue::Exact(_) => Backend::Exact,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn exact(&self) -> Option<&Q> {
        match &self.value {
            MassValue::Exact(q) => Some(q),
            MassValue::Float(_) => None,
        }
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountConfig {
    pub backend: Backend,
    pub grid_budget: u128,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            backend: Backend::Float,
            grid_budget: DEFAULT_GRID_BUDGET,
        }
    }
}

impl CountConfig {
    pub fn exact() -> Self {
        CountConfig {
            backend: Backend::Exact,
            ..Self::default()
        }
    }

    pub fn float() -> Self {
        Self::default()
    }
}

/// Backend-specific post-processing of recovered coefficients.
pub(crate) trait MassField: Field {
    /// Sums the selected entries after cleanup; also returns a float error
    /// estimate.
    fn select_sum(entries: &[Self], selected: &[usize]) -> Result<(Self, Option<f64>)>;

    fn into_mass_value(self) -> MassValue;
}

impl MassField for C64 {
    fn select_sum(entries: &[Self], selected: &[usize]) -> Result<(Self, Option<f64>)> {
        let cleaned = interp::clean_nonnegative(entries)?;
        let total: f64 = selected.iter().map(|&k| cleaned[k]).sum();
        let scale: f64 = entries.iter().map(|c| c.norm()).sum();
        let bound = f64::EPSILON * (entries.len() as f64).sqrt().max(1.0) * scale * 16.0;
        Ok((C64::new(total, 0.0), Some(bound)))
    }

    fn into_mass_value(self) -> MassValue {
        MassValue::Float(self.re)
    }
}

impl MassField for Q {
    fn select_sum(entries: &[Self], selected: &[usize]) -> Result<(Self, Option<f64>)> {
        let mut total = Q::zero();
        for &k in selected {
            total += &entries[k];
        }
        Ok((total, None))
    }

    fn into_mass_value(self) -> MassValue {
        MassValue::Exact(self)
    }
}

/// `Σ μ(S)` over `S ∈ fam` with `forced_in ⊆ S` and `S ∩ forced_out = ∅`.
pub(crate) fn family_mass<F: MassField>(
    oracle: &GenPolyOracle,
    fam: &LinearFamily,
    forced_in: &[usize],
    forced_out: &[usize],
    grid_budget: u128,
) -> Result<(F, Option<f64>)> {
    let m = oracle.arity();
    if fam.m != m {
        return Err(Error::DimensionMismatch(format!(
            "family over {} elements, oracle over {m}",
            fam.m
        )));
    }
    let mut prog = TransformProgram::new(m)
        .zero(forced_out.iter().copied())
        .tag(forced_in.iter().copied());
    for c in &fam.constraints {
        prog = prog.cost_axis(c.costs.clone());
    }
    let kept = prog.kept();
    let transformed = genpoly::transform(oracle, &prog)?;

    // Per-axis shift (negative part) and degree, over the surviving coordinates.
    let mut shifts = Vec::with_capacity(fam.constraints.len());
    let mut bounds = Vec::with_capacity(fam.constraints.len() + 1);
    for c in &fam.constraints {
        let (mut neg, mut pos) = (0i64, 0i64);
        for &i in &kept {
            let v = c.costs[i];
            if v < 0 {
                neg = neg.checked_sub(v).ok_or_else(cost_overflow)?;
            } else {
                pos = pos.checked_add(v).ok_or_else(cost_overflow)?;
            }
        }
        shifts.push(neg);
        let degree = neg.checked_add(pos).ok_or_else(cost_overflow)?;
        bounds.push(usize::try_from(degree).map_err(|_| cost_overflow())?);
    }
    let tagged = !forced_in.is_empty();
    if tagged {
        bounds.push(forced_in.len());
    }

    let k = kept.len();
    let p = fam.constraints.len();
    let opts = InterpOptions {
        grid_budget,
        avoid_zero: shifts.iter().any(|&s| s > 0),
        check_degree: true,
    };
    let ones = vec![F::one(); k];
    let tensor = interp::recover_multivariate(
        |vars: &[F]| {
            let mut point = ones.clone();
            point.extend_from_slice(vars);
            let mut value = transformed.evaluate(&point)?;
            for (t, &s) in vars[..p].iter().zip(&shifts) {
                if s > 0 {
                    value = value * t.powi(s);
                }
            }
            Ok(value)
        },
        &bounds,
        &opts,
    )?;

    let selected: Vec<usize> = tensor
        .iter()
        .enumerate()
        .filter(|(_, (index, _))| {
            let costs_ok = fam
                .constraints
                .iter()
                .zip(&shifts)
                .zip(index.iter())
                .all(|((c, &s), &d)| c.allowed.contains(d as i64 - s));
            costs_ok && (!tagged || index[p] == forced_in.len())
        })
        .map(|(k, _)| k)
        .collect();
    F::select_sum(tensor.entries(), &selected)
}

fn cost_overflow() -> Error {
    Error::CostBudgetExceeded("cost vector norm overflows".into())
}

fn count_linear(oracle: &GenPolyOracle, fam: &LinearFamily, cfg: &CountConfig) -> Result<Mass> {
    match cfg.backend {
        Backend::Float => {
            let (v, bound) = family_mass::<C64>(oracle, fam, &[], &[], cfg.grid_budget)?;
            Ok(Mass {
                value: v.into_mass_value(),
                error_bound: bound,
            })
        }
        Backend::Exact => {
            let (v, _) = family_mass::<Q>(oracle, fam, &[], &[], cfg.grid_budget)?;
            Ok(Mass {
                value: v.into_mass_value(),
                error_bound: None,
            })
        }
    }
}

fn single(oracle: &GenPolyOracle, costs: &[i64], allowed: Allowed) -> Result<LinearFamily> {
    LinearFamily::new(
        oracle.arity(),
        vec![LinearConstraint::new(costs.to_vec(), allowed)],
    )
}

/// `Σ_{c(S) ≤ budget} μ(S)`.
pub fn bcount(oracle: &GenPolyOracle, costs: &[i64], budget: i64, cfg: &CountConfig) -> Result<Mass> {
    count_linear(oracle, &single(oracle, costs, Allowed::at_most(budget))?, cfg)
}

/// `Σ_{c(S) = target} μ(S)`.
pub fn ecount(oracle: &GenPolyOracle, costs: &[i64], target: i64, cfg: &CountConfig) -> Result<Mass> {
    count_linear(oracle, &single(oracle, costs, Allowed::exactly(target))?, cfg)
}

/// `Σ_{c(S) ∈ K} μ(S)`.
pub fn set_count(
    oracle: &GenPolyOracle,
    costs: &[i64],
    allowed: &Allowed,
    cfg: &CountConfig,
) -> Result<Mass> {
    count_linear(oracle, &single(oracle, costs, allowed.clone())?, cfg)
}

pub fn linear_family_count(
    oracle: &GenPolyOracle,
    fam: &LinearFamily,
    cfg: &CountConfig,
) -> Result<Mass> {
    count_linear(oracle, fam, cfg)
}

pub fn partition_count(
    oracle: &GenPolyOracle,
    fam: &PartitionFamily,
    cfg: &CountConfig,
) -> Result<Mass> {
    count_linear(oracle, &fam.to_linear(), cfg)
}

/// `Σ_S μ(S)`, i.e. `g(1,…,1)`.
pub fn total_mass(oracle: &GenPolyOracle, cfg: &CountConfig) -> Result<Mass> {
    let m = oracle.arity();
    match cfg.backend {
        Backend::Float => {
            let v = oracle.evaluate(&vec![C64::new(1.0, 0.0); m])?;
            Ok(Mass {
                value: MassValue::Float(v.re.max(0.0)),
                error_bound: Some(f64::EPSILON * 16.0 * v.norm()),
            })
        }
        Backend::Exact => Ok(Mass {
            value: MassValue::Exact(oracle.evaluate(&vec![Q::from_int(1); m])?),
            error_bound: None,
        }),
    }
}

pub fn family_count(oracle: &GenPolyOracle, fam: &Family, cfg: &CountConfig) -> Result<Mass> {
    if fam.m() != oracle.arity() {
        return Err(Error::DimensionMismatch(format!(
            "family over {} elements, oracle over {}",
            fam.m(),
            oracle.arity()
        )));
    }
    match fam {
        Family::Unconstrained(_) => total_mass(oracle, cfg),
        other => count_linear(oracle, &other.to_linear(), cfg),
    }
}
