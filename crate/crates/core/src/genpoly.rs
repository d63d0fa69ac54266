//! Set-function measures and their generating-polynomial oracles.
//!
//! A measure `μ: 2^[m] → ℝ≥0` is only ever touched through
//! `g(x) = Σ_S μ(S) ∏_{i∈S} x_i`. Three backends are provided (determinantal,
//! regular matroid, explicit table) plus [`transform`], which wraps an oracle
//! with zeroing, auxiliary-variable tagging and monomial cost substitutions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num::traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{rational_from_f64, Field, C64, Q};
use crate::linalg::{self, bareiss_det, complex_det, PSD_TOLERANCE};
use crate::matroid::TUMatrix;

/// Largest ground set an explicit table may describe.
pub const EXPLICIT_MAX_M: usize = 20;

/// Evaluation oracle for a generating polynomial.
///
/// Implementations are immutable; both methods must be pure functions of the
/// point.
pub trait GenPoly: Send + Sync {
    fn arity(&self) -> usize;

    /// Rough number of arithmetic operations per evaluation.
    fn cost_hint(&self) -> f64;

    fn eval_float(&self, point: &[C64]) -> C64;

    fn eval_exact(&self, point: &[Q]) -> Result<Q>;
}

/// Shared handle to an oracle.
#[derive(Clone)]
pub struct GenPolyOracle {
    inner: Arc<dyn GenPoly>,
}

impl fmt::Debug for GenPolyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenPolyOracle")
            .field("arity", &self.arity())
            .field("cost_hint", &self.cost_hint())
            .finish()
    }
}

impl GenPolyOracle {
    pub fn new<G: GenPoly + 'static>(oracle: G) -> Self {
        GenPolyOracle {
            inner: Arc::new(oracle),
        }
    }

    pub fn arity(&self) -> usize {
        self.inner.arity()
    }

    pub fn cost_hint(&self) -> f64 {
        self.inner.cost_hint()
    }

    pub fn evaluate<F: Field>(&self, point: &[F]) -> Result<F> {
        evaluate(self, point)
    }

    pub(crate) fn as_dyn(&self) -> &dyn GenPoly {
        self.inner.as_ref()
    }
}

/// Evaluates `g` at `point`.
pub fn evaluate<F: Field>(oracle: &GenPolyOracle, point: &[F]) -> Result<F> {
    if point.len() != oracle.arity() {
        return Err(Error::ArityMismatch {
            expected: oracle.arity(),
            got: point.len(),
        });
    }
    F::evaluate(oracle.as_dyn(), point)
}

/// Result of a PSD validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub symmetry_defect: f64,
    /// Absolute tolerance that was applied (`τ_psd·‖L‖_max`).
    pub tolerance: f64,
}

pub(crate) fn check_psd(values: &DMatrix<f64>) -> Result<PsdReport> {
    if values.nrows() != values.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "kernel must be square, got {}×{}",
            values.nrows(),
            values.ncols()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("kernel has non-finite entries".into()));
    }
    let tolerance = PSD_TOLERANCE * linalg::max_abs(values);
    let symmetry_defect = linalg::symmetry_defect(values);
    if symmetry_defect > tolerance {
        return Err(Error::NotSymmetric {
            defect: symmetry_defect,
        });
    }
    let min_eigenvalue = linalg::min_eigenvalue(values);
    if min_eigenvalue < -tolerance {
        return Err(Error::NotPsd {
            value: min_eigenvalue,
        });
    }
    Ok(PsdReport {
        min_eigenvalue,
        symmetry_defect,
        tolerance,
    })
}

/// Symmetric PSD similarity matrix `L` defining `μ(S) = det(L_{S,S})`.
#[derive(Clone, Debug)]
pub struct Kernel {
    values: DMatrix<f64>,
    exact: Vec<Q>,
}

impl Kernel {
    /// Validates symmetry and positive semidefiniteness.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::InvalidInput("kernel must have m ≥ 1".into()));
        }
        check_psd(&values)?;
        let exact = values
            .transpose()
            .iter()
            .map(|&v| rational_from_f64(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Kernel { values, exact })
    }

    /// Kernel from exact row-major entries; the float copy is rounded.
    pub fn from_rational(m: usize, entries: Vec<Q>) -> Result<Self> {
        if m == 0 || entries.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {m}×{m} entries, got {}",
                entries.len()
            )));
        }
        for i in 0..m {
            for j in i + 1..m {
                if entries[i * m + j] != entries[j * m + i] {
                    return Err(Error::NotSymmetric {
                        defect: (&entries[i * m + j] - &entries[j * m + i])
                            .to_f64()
                            .unwrap_or(f64::INFINITY)
                            .abs(),
                    });
                }
            }
        }
        let values = DMatrix::from_row_iterator(
            m,
            m,
            entries.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)),
        );
        check_psd(&values)?;
        Ok(Kernel {
            values,
            exact: entries,
        })
    }

    pub fn identity(m: usize) -> Self {
        Kernel::diagonal(&vec![1.0; m]).expect("identity is PSD")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Kernel::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    /// `L = V Vᵀ`, exact when the factor carries exact entries.
    pub fn from_factor(v: &FeatureMatrix) -> Result<Self> {
        match &v.exact {
            Some(q) => {
                let (m, n) = (v.m(), v.n());
                let mut entries = vec![Q::zero(); m * m];
                for i in 0..m {
                    for j in 0..m {
                        let mut acc = Q::zero();
                        for k in 0..n {
                            acc += &q[i * n + k] * &q[j * n + k];
                        }
                        entries[i * m + j] = acc;
                    }
                }
                Kernel::from_rational(m, entries)
            }
            None => Kernel::new(&v.values * v.values.transpose()),
        }
    }

    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Row-major exact entries.
    pub fn exact_entries(&self) -> &[Q] {
        &self.exact
    }
}

/// Factor `V` (`m×n`) with `L = V Vᵀ`.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    values: DMatrix<f64>,
    exact: Option<Vec<Q>>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("factor has non-finite entries".into()));
        }
        let exact = values
            .transpose()
            .iter()
            .map(|&v| rational_from_f64(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix {
            values,
            exact: Some(exact),
        })
    }

    pub fn from_rational(m: usize, n: usize, entries: Vec<Q>) -> Result<Self> {
        if entries.len() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {m}×{n} entries, got {}",
                entries.len()
            )));
        }
        let values = DMatrix::from_row_iterator(
            m,
            n,
            entries.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)),
        );
        Ok(FeatureMatrix {
            values,
            exact: Some(entries),
        })
    }

    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Row-major exact entries, when the factor is known exactly.
    pub fn exact_entries(&self) -> Option<&[Q]> {
        self.exact.as_deref()
    }
}

/// Pivoted Cholesky factor of a kernel; zero pivots are dropped so `n` is the
/// numerical rank.
pub fn cholesky_factor(kernel: &Kernel) -> Result<FeatureMatrix> {
    let v = linalg::pivoted_cholesky(&kernel.values, PSD_TOLERANCE)?;
    Ok(FeatureMatrix {
        values: v,
        exact: None,
    })
}

/// Explicit table of nonnegative masses over all subsets (bitmask-indexed).
#[derive(Clone, Debug)]
pub struct ExplicitSetFunction {
    m: usize,
    table: Vec<Q>,
}

impl ExplicitSetFunction {
    pub fn new(m: usize, table: Vec<Q>) -> Result<Self> {
        if m > EXPLICIT_MAX_M {
            return Err(Error::TooLarge {
                what: "explicit ground set",
                size: m,
                limit: EXPLICIT_MAX_M,
            });
        }
        if table.len() != 1 << m {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, expected {}",
                table.len(),
                1usize << m
            )));
        }
        if let Some(bad) = table.iter().find(|q| !linalg::is_nonnegative(q)) {
            return Err(Error::InvalidInput(format!("negative mass {bad}")));
        }
        Ok(ExplicitSetFunction { m, table })
    }

    /// Table built from a mass function of the bitmask.
    pub fn from_fn(m: usize, f: impl Fn(usize) -> Q) -> Result<Self> {
        if m > EXPLICIT_MAX_M {
            return Err(Error::TooLarge {
                what: "explicit ground set",
                size: m,
                limit: EXPLICIT_MAX_M,
            });
        }
        ExplicitSetFunction::new(m, (0..1usize << m).map(f).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mass(&self, mask: usize) -> &Q {
        &self.table[mask]
    }
}

/// Coordinate rewrite applied by [`transform`].
///
/// The transformed oracle takes the non-zeroed `x` coordinates (ascending),
/// then one variable `t_j` per cost axis, then `y` if any coordinate is
/// tagged. Coordinate `i` becomes `x_i · ∏_j t_j^{c_j[i]} · (y if i tagged)`;
/// zeroed coordinates become 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformProgram {
    m: usize,
    zeroed: BTreeSet<usize>,
    tagged: BTreeSet<usize>,
    costs: Vec<Vec<i64>>,
}

impl TransformProgram {
    pub fn new(m: usize) -> Self {
        TransformProgram {
            m,
            zeroed: BTreeSet::new(),
            tagged: BTreeSet::new(),
            costs: Vec::new(),
        }
    }

    pub fn zero(mut self, coords: impl IntoIterator<Item = usize>) -> Self {
        self.zeroed.extend(coords);
        self
    }

    pub fn tag(mut self, coords: impl IntoIterator<Item = usize>) -> Self {
        self.tagged.extend(coords);
        self
    }

    pub fn cost_axis(mut self, costs: Vec<i64>) -> Self {
        self.costs.push(costs);
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn zeroed(&self) -> &BTreeSet<usize> {
        &self.zeroed
    }

    pub fn tagged(&self) -> &BTreeSet<usize> {
        &self.tagged
    }

    pub fn costs(&self) -> &[Vec<i64>] {
        &self.costs
    }

    pub fn kept(&self) -> Vec<usize> {
        (0..self.m).filter(|i| !self.zeroed.contains(i)).collect()
    }

    pub fn output_arity(&self) -> usize {
        self.m - self.zeroed.len() + self.costs.len() + usize::from(!self.tagged.is_empty())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&i) = self.zeroed.iter().chain(&self.tagged).find(|&&i| i >= self.m) {
            return Err(Error::InvalidProgram(format!(
                "coordinate {i} out of range for m = {}",
                self.m
            )));
        }
        if let Some(&i) = self.zeroed.intersection(&self.tagged).next() {
            return Err(Error::VariableClash(i));
        }
        if let Some(c) = self.costs.iter().find(|c| c.len() != self.m) {
            return Err(Error::InvalidProgram(format!(
                "cost vector of length {} for m = {}",
                c.len(),
                self.m
            )));
        }
        Ok(())
    }
}

struct DppOracle {
    m: usize,
    n: usize,
    /// Row-major `m×n` factor.
    factor: Vec<f64>,
    exact: ExactForm,
}

enum ExactForm {
    /// Row-major exact factor: evaluate `det(I_n + Vᵀ X V)`.
    Factor(Vec<Q>),
    /// Row-major exact kernel: evaluate `det(I_m + X L)`, equal by Sylvester.
    Kernel(Vec<Q>),
    None,
}

impl GenPoly for DppOracle {
    fn arity(&self) -> usize {
        self.m
    }

    fn cost_hint(&self) -> f64 {
        let (m, n) = (self.m as f64, self.n as f64);
        m * n * n / 2.0 + n * n * n / 3.0
    }

    fn eval_float(&self, x: &[C64]) -> C64 {
        let n = self.n;
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        let mut scaled = vec![C64::new(0.0, 0.0); n];
        for (i, xi) in x.iter().enumerate() {
            if *xi == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.factor[i * n..(i + 1) * n];
            for (s, &v) in scaled.iter_mut().zip(row) {
                *s = xi * v;
            }
            for (r, &va) in row.iter().enumerate() {
                if va == 0.0 {
                    continue;
                }
                let dst = &mut a[r * n..(r + 1) * n];
                for c in r..n {
                    dst[c] += scaled[c] * va;
                }
            }
        }
        for r in 0..n {
            a[r * n + r] += C64::new(1.0, 0.0);
            for c in 0..r {
                a[r * n + c] = a[c * n + r];
            }
        }
        complex_det(a, n)
    }

    fn eval_exact(&self, x: &[Q]) -> Result<Q> {
        match &self.exact {
            ExactForm::Factor(v) => {
                let n = self.n;
                let mut a = vec![Q::zero(); n * n];
                for (i, xi) in x.iter().enumerate() {
                    if xi.is_zero() {
                        continue;
                    }
                    let row = &v[i * n..(i + 1) * n];
                    for r in 0..n {
                        if row[r].is_zero() {
                            continue;
                        }
                        let t = xi * &row[r];
                        for c in r..n {
                            a[r * n + c] += &t * &row[c];
                        }
                    }
                }
                for r in 0..n {
                    a[r * n + r] += crate::field::q_one();
                    for c in 0..r {
                        a[r * n + c] = a[c * n + r].clone();
                    }
                }
                Ok(bareiss_det(&a, n))
            }
            ExactForm::Kernel(l) => {
                let m = self.m;
                let mut a = vec![Q::zero(); m * m];
                for i in 0..m {
                    if !x[i].is_zero() {
                        for j in 0..m {
                            a[i * m + j] = &x[i] * &l[i * m + j];
                        }
                    }
                    a[i * m + i] += crate::field::q_one();
                }
                Ok(bareiss_det(&a, m))
            }
            ExactForm::None => Err(Error::ExactUnsupported(
                "determinantal oracle built from a floating-point factorization".into(),
            )),
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

/// Oracle `x ↦ det(Vᵀ X V + I_n)` for `μ(S) = det(V_S V_Sᵀ)`.
pub fn dpp_oracle(v: &FeatureMatrix) -> GenPolyOracle {
    GenPolyOracle::new(DppOracle {
        m: v.m(),
        n: v.n(),
        factor: row_major(&v.values),
        exact: match &v.exact {
            Some(q) => ExactForm::Factor(q.clone()),
            None => ExactForm::None,
        },
    })
}

/// Determinantal oracle for a kernel: floats go through the pivoted Cholesky
/// factor, exact evaluation uses `det(I_m + X L)` on the exact entries.
pub fn dpp_oracle_from_kernel(kernel: &Kernel) -> Result<GenPolyOracle> {
    let v = cholesky_factor(kernel)?;
    Ok(GenPolyOracle::new(DppOracle {
        m: v.m(),
        n: v.n(),
        factor: row_major(&v.values),
        exact: ExactForm::Kernel(kernel.exact.clone()),
    }))
}

struct MatroidOracle {
    m: usize,
    r: usize,
    rows: Vec<i64>,
}

impl GenPoly for MatroidOracle {
    fn arity(&self) -> usize {
        self.m
    }

    fn cost_hint(&self) -> f64 {
        let (m, r) = (self.m as f64, self.r as f64);
        m * r * r + r * r * r / 3.0
    }

    fn eval_float(&self, x: &[C64]) -> C64 {
        let r = self.r;
        let mut a = vec![C64::new(0.0, 0.0); r * r];
        for (e, xe) in x.iter().enumerate() {
            let row = &self.rows[e * r..(e + 1) * r];
            for i in 0..r {
                if row[i] == 0 {
                    continue;
                }
                let t = xe * row[i] as f64;
                for j in 0..r {
                    if row[j] != 0 {
                        a[i * r + j] += t * row[j] as f64;
                    }
                }
            }
        }
        complex_det(a, r)
    }

    fn eval_exact(&self, x: &[Q]) -> Result<Q> {
        let r = self.r;
        let mut a = vec![Q::zero(); r * r];
        for (e, xe) in x.iter().enumerate() {
            if xe.is_zero() {
                continue;
            }
            let row = &self.rows[e * r..(e + 1) * r];
            for i in 0..r {
                for j in 0..r {
                    let p = row[i] * row[j];
                    if p != 0 {
                        a[i * r + j] += xe * Q::from_int(p);
                    }
                }
            }
        }
        Ok(bareiss_det(&a, r))
    }
}

/// Oracle `x ↦ det(Aᵀ X A)`: the basis generating polynomial of the regular
/// matroid represented by `a` (Cauchy–Binet with unimodular minors).
pub fn matroid_oracle(a: &TUMatrix) -> Result<GenPolyOracle> {
    let entries: Vec<Q> = a.entries().iter().map(|&v| Q::from_int(v)).collect();
    let rank = linalg::rational_column_basis(&entries, a.m(), a.r()).len();
    if rank < a.r() {
        return Err(Error::RankDeficient {
            rank,
            expected: a.r(),
        });
    }
    Ok(GenPolyOracle::new(MatroidOracle {
        m: a.m(),
        r: a.r(),
        rows: a.entries().to_vec(),
    }))
}

struct ExplicitOracle {
    m: usize,
    table: Vec<Q>,
    table_f64: Vec<f64>,
}

fn subset_sum<F: Field>(table: impl Fn(usize) -> F, x: &[F]) -> F {
    let size = 1usize << x.len();
    let mut products: Vec<F> = Vec::with_capacity(size);
    products.push(F::one());
    let mut total = table(0);
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let p = products[mask & (mask - 1)].clone() * x[low].clone();
        total = total + table(mask) * p.clone();
        products.push(p);
    }
    total
}

impl GenPoly for ExplicitOracle {
    fn arity(&self) -> usize {
        self.m
    }

    fn cost_hint(&self) -> f64 {
        (1u64 << self.m) as f64
    }

    fn eval_float(&self, x: &[C64]) -> C64 {
        subset_sum(|mask| C64::new(self.table_f64[mask], 0.0), x)
    }

    fn eval_exact(&self, x: &[Q]) -> Result<Q> {
        Ok(subset_sum(|mask| self.table[mask].clone(), x))
    }
}

/// Oracle summing `μ(S) x^S` directly over the table.
pub fn explicit_oracle(f: &ExplicitSetFunction) -> Result<GenPolyOracle> {
    if f.m > EXPLICIT_MAX_M {
        return Err(Error::TooLarge {
            what: "explicit ground set",
            size: f.m,
            limit: EXPLICIT_MAX_M,
        });
    }
    Ok(GenPolyOracle::new(ExplicitOracle {
        m: f.m,
        table_f64: f.table.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect(),
        table: f.table.clone(),
    }))
}

struct TransformedOracle {
    inner: GenPolyOracle,
    kept: Vec<usize>,
    tagged: Vec<bool>,
    costs: Vec<Vec<i64>>,
    m: usize,
    has_y: bool,
}

impl TransformedOracle {
    fn substitute<F: Field>(&self, point: &[F]) -> Vec<F> {
        let k = self.kept.len();
        let axes = &point[k..k + self.costs.len()];
        let y = if self.has_y {
            Some(&point[k + self.costs.len()])
        } else {
            None
        };
        let mut full = vec![F::zero(); self.m];
        for (slot, &i) in self.kept.iter().enumerate() {
            let mut v = point[slot].clone();
            for (t, c) in axes.iter().zip(&self.costs) {
                if c[i] != 0 {
                    v = v * t.powi(c[i]);
                }
            }
            if self.tagged[i] {
                if let Some(y) = y {
                    v = v * y.clone();
                }
            }
            full[i] = v;
        }
        full
    }
}

impl GenPoly for TransformedOracle {
    fn arity(&self) -> usize {
        self.kept.len() + self.costs.len() + usize::from(self.has_y)
    }

    fn cost_hint(&self) -> f64 {
        self.inner.cost_hint() + (self.m * (self.costs.len() + 1)) as f64
    }

    fn eval_float(&self, point: &[C64]) -> C64 {
        let full = self.substitute(point);
        self.inner.as_dyn().eval_float(&full)
    }

    fn eval_exact(&self, point: &[Q]) -> Result<Q> {
        let full = self.substitute(point);
        self.inner.as_dyn().eval_exact(&full)
    }
}

/// Wraps `oracle` with the coordinate rewrite described by `prog`.
pub fn transform(oracle: &GenPolyOracle, prog: &TransformProgram) -> Result<GenPolyOracle> {
    prog.validate()?;
    if prog.m != oracle.arity() {
        return Err(Error::InvalidProgram(format!(
            "program is for m = {}, oracle has arity {}",
            prog.m,
            oracle.arity()
        )));
    }
    let mut tagged = vec![false; prog.m];
    for &i in &prog.tagged {
        tagged[i] = true;
    }
    Ok(GenPolyOracle::new(TransformedOracle {
        inner: oracle.clone(),
        kept: prog.kept(),
        tagged,
        costs: prog.costs.clone(),
        m: prog.m,
        has_y: !prog.tagged.is_empty(),
    }))
}

/// Point with every coordinate equal to one.
pub fn ones<F: Field>(n: usize) -> Vec<F> {
    vec![F::one(); n]
}
