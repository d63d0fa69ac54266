//! Dense determinant and factorization kernels.

use nalgebra::DMatrix;
use num::integer::Integer;
use num::traits::{One, Signed, Zero};
use num::BigInt;

use crate::error::{Error, Result};
use crate::field::{C64, Q};

/// Relative pivot tolerance for PSD checks and pivoted Cholesky.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Determinant of a row-major `n×n` complex matrix by LU with partial pivoting.
pub fn complex_det(mut a: Vec<C64>, n: usize) -> C64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].norm_sqr();
        for i in k + 1..n {
            let v = a[i * n + k].norm_sqr();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != k {
            for j in k..n {
                a.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        let inv = pivot.inv();
        for i in k + 1..n {
            let factor = a[i * n + k] * inv;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= factor * t;
            }
        }
    }
    det
}

/// Determinant of a row-major `n×n` rational matrix, fraction-free.
///
/// Rows are first scaled to integers; Bareiss elimination then keeps every
/// intermediate entry an integer minor of the scaled matrix.
pub fn bareiss_det(rows: &[Q], n: usize) -> Q {
    debug_assert_eq!(rows.len(), n * n);
    if n == 0 {
        return Q::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<BigInt> = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = &rows[i * n..(i + 1) * n];
        let lcm = row
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        for q in row {
            a.push(q.numer() * (&lcm / q.denom()));
        }
        scale *= lcm;
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        a.swap(k * n + j, i * n + j);
                    }
                    sign = !sign;
                }
                None => return Q::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    let det = Q::new(a[n * n - 1].clone(), scale);
    if sign {
        -det
    } else {
        det
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Largest `|m_ij - m_ji|`.
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// Diagonally pivoted Cholesky: returns `V` (`m×rank`, rows in the original
/// order) with `V Vᵀ ≈ L`.
///
/// Elimination stops once the largest remaining pivot is at most
/// `tol·‖L‖_max`; a remaining diagonal entry below `-tol·‖L‖_max` means `L`
/// is not PSD.
pub fn pivoted_cholesky(l: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let m = l.nrows();
    if l.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "kernel is {}×{}",
            l.nrows(),
            l.ncols()
        )));
    }
    let threshold = tol * max_abs(l).max(f64::MIN_POSITIVE);
    let mut work = l.clone();
    let mut done = vec![false; m];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    loop {
        let mut piv = None;
        let mut best = f64::NEG_INFINITY;
        for i in 0..m {
            if !done[i] && work[(i, i)] > best {
                best = work[(i, i)];
                piv = Some(i);
            }
        }
        let Some(p) = piv else { break };
        if best <= threshold {
            if let Some(worst) = (0..m)
                .filter(|&i| !done[i])
                .map(|i| work[(i, i)])
                .find(|&d| d < -threshold)
            {
                return Err(Error::NotPsd { value: worst });
            }
            // A PSD remainder with a negligible diagonal is negligible everywhere.
            for i in 0..m {
                for j in 0..m {
                    if !done[i] && !done[j] && work[(i, j)].abs() > 10.0 * threshold {
                        return Err(Error::NotPsd {
                            value: -work[(i, j)].abs(),
                        });
                    }
                }
            }
            break;
        }
        let root = best.sqrt();
        let col: Vec<f64> = (0..m)
            .map(|i| if done[i] { 0.0 } else { work[(i, p)] / root })
            .collect();
        for i in 0..m {
            if done[i] || col[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                if !done[j] {
                    work[(i, j)] -= col[i] * col[j];
                }
            }
        }
        done[p] = true;
        columns.push(col);
    }
    let rank = columns.len();
    Ok(DMatrix::from_fn(m, rank, |i, k| columns[k][i]))
}

/// Rank of a row-major rational matrix by Gaussian elimination, along with
/// the indices of a maximal independent set of columns (greedy, left to right).
pub fn rational_column_basis(entries: &[Q], rows: usize, cols: usize) -> Vec<usize> {
    let mut a = entries.to_vec();
    let mut basis = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&i| !a[i * cols + col].is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..cols {
                a.swap(p * cols + j, row * cols + j);
            }
        }
        let pivot = a[row * cols + col].clone();
        for i in row + 1..rows {
            if a[i * cols + col].is_zero() {
                continue;
            }
            let f = &a[i * cols + col] / &pivot;
            for j in col..cols {
                let t = &f * &a[row * cols + j];
                a[i * cols + j] -= t;
            }
        }
        basis.push(col);
        row += 1;
    }
    basis
}

/// Row-major copy of a real matrix as complex numbers.
pub fn to_complex(m: &DMatrix<f64>) -> Vec<C64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(C64::new(m[(i, j)], 0.0));
        }
    }
    out
}

pub(crate) fn is_nonnegative(q: &Q) -> bool {
    !q.is_negative()
}
