//! Coefficient recovery from black-box polynomial evaluations.
//!
//! Each axis is sampled on the nodes of its field (roots of unity or
//! consecutive integers), the full tensor grid is evaluated once, and the
//! samples are inverted one axis at a time.

use num::traits::FromPrimitive;
use num::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Backend, Field, C64};

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_BUDGET: u128 = 100_000_000;

/// Relative tolerance below which negative float coefficients are clamped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-6;

/// Largest distance from an integer accepted when rounding a float count.
pub const ROUNDING_SLACK: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterpOptions {
    pub grid_budget: u128,
    /// Keep exact nodes away from zero (needed when the evaluator divides).
    pub avoid_zero: bool,
    /// Compare against one held-out evaluation to detect a violated bound.
    pub check_degree: bool,
}

impl Default for InterpOptions {
    fn default() -> Self {
        InterpOptions {
            grid_budget: DEFAULT_GRID_BUDGET,
            avoid_zero: false,
            check_degree: true,
        }
    }
}

/// Ascending coefficients `c_0..c_D`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateCoefficients<F> {
    pub coeffs: Vec<F>,
}

impl<F: Field> UnivariateCoefficients<F> {
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, d: usize) -> F {
        self.coeffs.get(d).cloned().unwrap_or_else(F::zero)
    }
}

/// Dense coefficient tensor; entry `(d_1..d_p)` is the coefficient of
/// `∏ y_j^{d_j}`. Stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTensor<F> {
    dims: Vec<usize>,
    entries: Vec<F>,
}

impl<F: Field> CoefficientTensor<F> {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[F] {
        &self.entries
    }

    pub fn get(&self, index: &[usize]) -> &F {
        &self.entries[self.flat(index)]
    }

    fn flat(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Multi-index of a flat position.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for (slot, &d) in index.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        index
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &F)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(k, v)| (self.unflatten(k), v))
    }
}

/// Smallest `N ≥ n` of the form `2^a 3^b 5^c 7^d`.
pub fn smooth_size(n: usize) -> usize {
    let mut candidate = n.max(1);
    loop {
        let mut r = candidate;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return candidate;
        }
        candidate += 1;
    }
}

fn grid_len<F: Field>(coefficients: usize) -> usize {
    match F::BACKEND {
        Backend::Float => smooth_size(coefficients),
        Backend::Exact => coefficients,
    }
}

/// Coefficients of a univariate polynomial of degree at most `degree_bound`.
pub fn recover_univariate<F, E>(
    eval: E,
    degree_bound: usize,
    opts: &InterpOptions,
) -> Result<UnivariateCoefficients<F>>
where
    F: Field,
    E: Fn(&F) -> Result<F> + Sync,
{
    let tensor = recover_multivariate(|p: &[F]| eval(&p[0]), &[degree_bound], opts)?;
    Ok(UnivariateCoefficients {
        coeffs: tensor.entries,
    })
}

/// Coefficient tensor of a polynomial with per-variable degree bounds.
pub fn recover_multivariate<F, E>(
    eval: E,
    bounds: &[usize],
    opts: &InterpOptions,
) -> Result<CoefficientTensor<F>>
where
    F: Field,
    E: Fn(&[F]) -> Result<F> + Sync,
{
    let wanted: Vec<usize> = bounds.iter().map(|&d| d + 1).collect();
    let requested = wanted
        .iter()
        .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
        .unwrap_or(u128::MAX);
    if requested > opts.grid_budget {
        return Err(Error::GridTooLarge {
            size: requested,
            budget: opts.grid_budget,
        });
    }
    let sizes: Vec<usize> = wanted.iter().map(|&n| grid_len::<F>(n)).collect();
    let nodes: Vec<Vec<F>> = sizes
        .iter()
        .map(|&n| F::nodes(n, opts.avoid_zero))
        .collect();
    let total: usize = sizes.iter().product();

    let mut values: Vec<F> = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut point = vec![F::zero(); sizes.len()];
            for a in (0..sizes.len()).rev() {
                point[a] = nodes[a][flat % sizes[a]].clone();
                flat /= sizes[a];
            }
            eval(&point)
        })
        .collect::<Result<Vec<F>>>()?;

    let mut line: Vec<F> = Vec::new();
    let mut stride = total;
    for &n in &sizes {
        stride /= n;
        if n == 1 {
            continue;
        }
        let block = n * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                line.clear();
                line.extend((0..n).map(|k| values[outer + inner + k * stride].clone()));
                F::interpolate(&mut line, opts.avoid_zero);
                for (k, v) in line.drain(..).enumerate() {
                    values[outer + inner + k * stride] = v;
                }
            }
        }
    }

    let tensor = CoefficientTensor {
        entries: truncate(&values, &sizes, &wanted),
        dims: wanted,
    };

    if opts.check_degree {
        let held: Vec<F> = sizes
            .iter()
            .map(|&n| F::held_out(n, opts.avoid_zero))
            .collect();
        let actual = eval(&held)?;
        let powers: Vec<Vec<F>> = held
            .iter()
            .zip(&tensor.dims)
            .map(|(h, &d)| {
                let mut p = Vec::with_capacity(d);
                let mut acc = F::one();
                for _ in 0..d {
                    p.push(acc.clone());
                    acc = acc * h.clone();
                }
                p
            })
            .collect();
        let mut predicted = F::zero();
        let mut scale = actual.magnitude();
        let mut abs_sum = 0.0;
        for (index, c) in tensor.iter() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (a, &i) in index.iter().enumerate() {
                term = term * powers[a][i].clone();
            }
            abs_sum += term.magnitude();
            predicted = predicted + term;
        }
        scale = scale.max(abs_sum);
        let residual = (actual - predicted).magnitude();
        if !F::residual_ok(residual, scale) {
            return Err(Error::DegreeExceeded {
                bound: bounds.iter().copied().max().unwrap_or(0),
                residual,
            });
        }
    }
    Ok(tensor)
}

fn truncate<F: Clone>(values: &[F], sizes: &[usize], wanted: &[usize]) -> Vec<F> {
    if sizes == wanted {
        return values.to_vec();
    }
    let count: usize = wanted.iter().product();
    (0..count)
        .map(|mut flat| {
            let mut src = 0;
            let mut mult = 1;
            for a in (0..wanted.len()).rev() {
                src += (flat % wanted[a]) * mult;
                flat /= wanted[a];
                mult *= sizes[a];
            }
            values[src].clone()
        })
        .collect()
}

/// Rounds a float count to the nearest integer, refusing values that are not
/// clearly resolved.
pub fn round_to_integer(value: f64) -> Result<BigInt> {
    let rounded = value.round();
    if !value.is_finite() || (value - rounded).abs() > ROUNDING_SLACK {
        return Err(Error::NumericalResolutionExceeded {
            value,
            context: "count is not within 0.25 of an integer",
        });
    }
    BigInt::from_f64(rounded).ok_or(Error::NumericalResolutionExceeded {
        value,
        context: "count does not fit an integer",
    })
}

/// Real parts of float coefficients of a nonnegative measure, with small
/// negatives (relative to the largest magnitude) clamped to zero.
pub fn clean_nonnegative(coeffs: &[C64]) -> Result<Vec<f64>> {
    let largest = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
    let tolerance = NEGATIVE_TOLERANCE * largest;
    coeffs
        .iter()
        .map(|c| {
            let v = c.re;
            if v >= 0.0 {
                Ok(v)
            } else if -v <= tolerance {
                Ok(0.0)
            } else {
                Err(Error::NegativeCoefficient {
                    value: v,
                    tolerance,
                })
            }
        })
        .collect()
}
