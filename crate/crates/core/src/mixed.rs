//! Mixed discriminants and mixed characteristic polynomials.
//!
//! Conventions: `D(A_1..A_d) = (1/d!) ∂^d/∂z_1…∂z_d det(Σ z_i A_i)` is the
//! normalized mixed discriminant (so `D(A,…,A) = det A`), while
//! `D̃(A_1..A_k) = (1/(d−k)!) ∂^d det(Σ z_i A_i + Σ z_j I)` uses the raw
//! derivative, which is what makes
//! `μ[A_1..A_m](x) = Σ_k (−1)^k x^{d−k} Σ_{|S|=k} D̃(A_S)` hold.

use nalgebra::DMatrix;

use crate::counting::{ecount, partition_count, CountConfig, PartitionFamily};
use crate::error::{Error, Result};
use crate::field::C64;
use crate::genpoly::{self, dpp_oracle, FeatureMatrix};
use crate::interp::{self, InterpOptions};
use crate::linalg::{self, complex_det, PSD_TOLERANCE};

/// Largest dimension handled by the polarization formula.
pub const BRUTEFORCE_MAX_DIM: usize = 8;
/// Largest `n` for the cost-vector reduction (its degree grows like `n^{2n}`).
pub const ECOUNT_MAX_DIM: usize = 4;
/// Limits of the interpolation-based characteristic polynomial.
pub const CHAR_BRUTEFORCE_MAX: usize = 4;

/// Symmetric PSD `d×d` matrices `A_1..A_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    d: usize,
    mats: Vec<DMatrix<f64>>,
}

impl MatrixTuple {
    pub fn new(d: usize, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        for a in &mats {
            if a.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "expected {d}×{d}, got {}×{}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            genpoly::check_psd(a)?;
        }
        Ok(MatrixTuple { d, mats })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.mats.len()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }
}

/// Coefficients of a monic degree-`d` polynomial; `coeffs[k]` multiplies
/// `x^{d−k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedCharCoeffs {
    pub d: usize,
    pub coeffs: Vec<f64>,
}

impl MixedCharCoeffs {
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    /// Ascending coefficients (constant term first), when all are known.
    pub fn ascending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Normalized mixed discriminant of `d` matrices by polarization:
/// `(1/d!) Σ_{S⊆[d]} (−1)^{d−|S|} det(Σ_{i∈S} A_i)`.
pub fn mixed_discriminant_bruteforce(t: &MatrixTuple) -> Result<f64> {
    mixed_discriminant_of(t.d, &t.mats)
}

fn mixed_discriminant_of(d: usize, mats: &[DMatrix<f64>]) -> Result<f64> {
    if mats.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "mixed discriminant needs {d} matrices, got {}",
            mats.len()
        )));
    }
    if d > BRUTEFORCE_MAX_DIM {
        return Err(Error::TooLarge {
            what: "mixed discriminant dimension",
            size: d,
            limit: BRUTEFORCE_MAX_DIM,
        });
    }
    let mut total = 0.0;
    for mask in 0usize..1 << d {
        let mut sum = DMatrix::<f64>::zeros(d, d);
        for (i, a) in mats.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum += a;
            }
        }
        let sign = if (d - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * sum.determinant();
    }
    Ok(total / factorial(d))
}

/// Columns of a pivoted Cholesky factor, padded with zero vectors to `d`
/// rank-one terms: `A = Σ_k v_k v_kᵀ`.
fn rank_one_terms(a: &DMatrix<f64>, d: usize) -> Result<Vec<Vec<f64>>> {
    let v = linalg::pivoted_cholesky(a, PSD_TOLERANCE)?;
    let mut terms: Vec<Vec<f64>> = (0..v.ncols())
        .map(|k| v.column(k).iter().copied().collect())
        .collect();
    terms.resize(d, vec![0.0; d]);
    Ok(terms)
}

fn stacked_factor(rows: &[Vec<f64>], d: usize) -> Result<FeatureMatrix> {
    FeatureMatrix::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// `D(A_1..A_n)` through one equality count: each `A_i` contributes its `n`
/// rank-one terms at cost `B^i` (`B = n²+1`), and the determinantal mass at
/// total cost `Σ B^i` is `n!·D`.
pub fn mixed_disc_via_ecount(t: &MatrixTuple, cfg: &CountConfig) -> Result<f64> {
    let n = t.d;
    if t.m() != n {
        return Err(Error::DimensionMismatch(format!(
            "mixed discriminant needs {n} matrices, got {}",
            t.m()
        )));
    }
    if n > ECOUNT_MAX_DIM {
        return Err(Error::CostBudgetExceeded(format!(
            "n = {n} exceeds {ECOUNT_MAX_DIM}; the cost vector norm grows like n^(2n)"
        )));
    }
    let base = (n * n + 1) as i64;
    let mut rows = Vec::with_capacity(n * n);
    let mut costs = Vec::with_capacity(n * n);
    let mut weight = 1i64;
    let mut target = 0i64;
    for a in &t.mats {
        weight *= base;
        target += weight;
        for v in rank_one_terms(a, n)? {
            rows.push(v);
            costs.push(weight);
        }
    }
    let oracle = dpp_oracle(&stacked_factor(&rows, n)?);
    let mass = ecount(&oracle, &costs, target, cfg)?;
    Ok(mass.to_f64() / factorial(n))
}

/// `D̃(A_1..A_k)` in dimension `d` as a partition count: parts hold the
/// rank-one terms of each `A_i` (quota 1) and the unit vectors (quota `d−k`).
pub fn restricted_mixed_disc(mats: &[DMatrix<f64>], d: usize, cfg: &CountConfig) -> Result<f64> {
    let k = mats.len();
    if k > d {
        return Err(Error::DimensionMismatch(format!("k = {k} exceeds d = {d}")));
    }
    let mut rows = Vec::with_capacity((k + 1) * d);
    let mut parts = Vec::with_capacity(k + 1);
    for a in mats {
        if a.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "expected {d}×{d}, got {}×{}",
                a.nrows(),
                a.ncols()
            )));
        }
        parts.push((rows.len()..rows.len() + d).collect::<Vec<_>>());
        rows.extend(rank_one_terms(a, d)?);
    }
    parts.push((rows.len()..rows.len() + d).collect());
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        rows.push(e);
    }
    let mut quotas = vec![1; k];
    quotas.push(d - k);
    let fam = PartitionFamily::new(rows.len(), parts, quotas)?;
    let oracle = dpp_oracle(&stacked_factor(&rows, d)?);
    Ok(partition_count(&oracle, &fam, cfg)?.to_f64())
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Coefficients of `x^d, …, x^{d−k_max}` in the mixed characteristic
/// polynomial, each a signed sum of `C(m,k)` restricted mixed discriminants.
pub fn mixed_char_top_coeffs(t: &MatrixTuple, k_max: usize, cfg: &CountConfig) -> Result<MixedCharCoeffs> {
    if k_max > t.d {
        return Err(Error::DimensionMismatch(format!(
            "k_max = {k_max} exceeds d = {}",
            t.d
        )));
    }
    let mut coeffs = vec![1.0];
    for k in 1..=k_max {
        // Padding zero matrices (d > m) contribute nothing.
        let mut sum = 0.0;
        if k <= t.m() {
            for s in subsets(t.m(), k) {
                let chosen: Vec<DMatrix<f64>> = s.iter().map(|&i| t.mats[i].clone()).collect();
                sum += restricted_mixed_disc(&chosen, t.d, cfg)?;
            }
        }
        coeffs.push(if k % 2 == 0 { sum } else { -sum });
    }
    Ok(MixedCharCoeffs { d: t.d, coeffs })
}

/// `Σ_{|S|=k} D̃(A_S)` through one mixed discriminant of dimension
/// `m+d−k`: `B_i = A_i ⊕ I_{m−k}` for every `i`, plus `d−k` copies of
/// `I_d ⊕ 0_{m−k}`.
pub fn block_reduction_sum(t: &MatrixTuple, k: usize) -> Result<f64> {
    let (m, d) = (t.m(), t.d);
    if k > m || k > d {
        return Err(Error::DimensionMismatch(format!(
            "k = {k} must not exceed m = {m} or d = {d}"
        )));
    }
    let dim = m + d - k;
    if dim > BRUTEFORCE_MAX_DIM {
        return Err(Error::DimensionBudgetExceeded(format!(
            "block dimension {dim} exceeds {BRUTEFORCE_MAX_DIM}"
        )));
    }
    let mut blocks = Vec::with_capacity(dim);
    for a in &t.mats {
        let mut b = DMatrix::<f64>::zeros(dim, dim);
        b.view_mut((0, 0), (d, d)).copy_from(a);
        for i in d..dim {
            b[(i, i)] = 1.0;
        }
        blocks.push(b);
    }
    for _ in 0..d - k {
        let mut b = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..d {
            b[(i, i)] = 1.0;
        }
        blocks.push(b);
    }
    let disc = mixed_discriminant_of(dim, &blocks)?;
    Ok(disc * factorial(dim) / (factorial(m - k) * factorial(d - k)))
}

/// Full mixed characteristic polynomial `∏(1 − ∂_{z_i}) det(xI + Σ z_i A_i)`
/// at `z = 0`, read off the interpolated coefficients in `(x, z_1..z_m)`.
pub fn mixed_char_bruteforce(t: &MatrixTuple) -> Result<MixedCharCoeffs> {
    let (m, d) = (t.m(), t.d);
    if m > CHAR_BRUTEFORCE_MAX || d > CHAR_BRUTEFORCE_MAX {
        return Err(Error::TooLarge {
            what: "mixed characteristic polynomial (m, d)",
            size: m.max(d),
            limit: CHAR_BRUTEFORCE_MAX,
        });
    }
    let mats: Vec<Vec<C64>> = t.mats.iter().map(linalg::to_complex).collect();
    let bounds = vec![d; m + 1];
    let tensor = interp::recover_multivariate(
        |p: &[C64]| {
            let mut a = vec![C64::new(0.0, 0.0); d * d];
            for i in 0..d {
                a[i * d + i] = p[0];
            }
            for (z, mat) in p[1..].iter().zip(&mats) {
                for (dst, v) in a.iter_mut().zip(mat) {
                    *dst += z * v;
                }
            }
            Ok(complex_det(a, d))
        },
        &bounds,
        &InterpOptions::default(),
    )?;
    let mut ascending = vec![0.0; d + 1];
    for mask in 0usize..1 << m {
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let mut index = vec![0; m + 1];
        for (i, slot) in index[1..].iter_mut().enumerate() {
            *slot = mask >> i & 1;
        }
        for (j, c) in ascending.iter_mut().enumerate() {
            index[0] = j;
            *c += sign * tensor.get(&index).re;
        }
    }
    Ok(MixedCharCoeffs {
        d,
        coeffs: ascending.into_iter().rev().collect(),
    })
}
