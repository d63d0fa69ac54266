//! Scalar fields the engine evaluates oracles over.
//!
//! Two backends exist. `C64` evaluates at complex roots of unity and inverts
//! with a DFT; `Q` evaluates at consecutive integers and inverts exactly with
//! Newton divided differences.

use std::cell::RefCell;
use std::fmt::{self, Debug};
use std::ops::Neg;
use std::str::FromStr;

use num::traits::{Num, One, ToPrimitive, Zero};
use num::{BigInt, BigRational, Complex};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::genpoly::GenPoly;

pub type C64 = Complex<f64>;
pub type Q = BigRational;

/// Arithmetic backend selector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    #[default]
    Float,
    Exact,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Float => "float",
            Backend::Exact => "exact",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "float" => Ok(Backend::Float),
            "exact" => Ok(Backend::Exact),
            other => Err(Error::InvalidInput(format!("unknown backend `{other}`"))),
        }
    }
}

/// A field the oracles can be evaluated over, together with its
/// interpolation scheme.
pub trait Field: Clone + Debug + PartialEq + Send + Sync + Num + Neg<Output = Self> + 'static {
    const BACKEND: Backend;

    fn from_int(v: i64) -> Self;

    /// Integer power; negative exponents invert (the base must be nonzero).
    fn powi(&self, exp: i64) -> Self;

    fn evaluate(oracle: &dyn GenPoly, point: &[Self]) -> Result<Self>;

    /// Interpolation nodes for an axis carrying `len` coefficients.
    fn nodes(len: usize, avoid_zero: bool) -> Vec<Self>;

    /// A point outside `nodes(len, avoid_zero)`, used to detect degree violations.
    fn held_out(len: usize, avoid_zero: bool) -> Self;

    /// Replaces samples taken at `nodes(values.len(), avoid_zero)` by the
    /// ascending coefficients of the interpolating polynomial.
    fn interpolate(values: &mut [Self], avoid_zero: bool);

    /// Absolute value as a float (approximate for rationals).
    fn magnitude(&self) -> f64;

    /// Whether a held-out residual is acceptable relative to `scale`.
    fn residual_ok(residual: f64, scale: f64) -> bool;
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

impl Field for C64 {
    const BACKEND: Backend = Backend::Float;

    fn from_int(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn powi(&self, exp: i64) -> Self {
        if exp >= 0 {
            Complex::powu(self, exp as u32)
        } else {
            Complex::powu(self, exp.unsigned_abs() as u32).inv()
        }
    }

    fn evaluate(oracle: &dyn GenPoly, point: &[Self]) -> Result<Self> {
        Ok(oracle.eval_float(point))
    }

    fn nodes(len: usize, _avoid_zero: bool) -> Vec<Self> {
        let n = len as f64;
        (0..len)
            .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n))
            .collect()
    }

    fn held_out(len: usize, _avoid_zero: bool) -> Self {
        C64::from_polar(1.0, std::f64::consts::PI / len as f64)
    }

    fn interpolate(values: &mut [Self], _avoid_zero: bool) {
        let n = values.len();
        if n <= 1 {
            return;
        }
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
        fft.process(values);
        let scale = 1.0 / n as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn residual_ok(residual: f64, scale: f64) -> bool {
        residual <= 1e-8 * scale.max(1e-300)
    }
}

impl Field for Q {
    const BACKEND: Backend = Backend::Exact;

    fn from_int(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }

    fn powi(&self, exp: i64) -> Self {
        let p = num::pow::pow(self.clone(), exp.unsigned_abs() as usize);
        if exp >= 0 {
            p
        } else {
            p.recip()
        }
    }

    fn evaluate(oracle: &dyn GenPoly, point: &[Self]) -> Result<Self> {
        oracle.eval_exact(point)
    }

    fn nodes(len: usize, avoid_zero: bool) -> Vec<Self> {
        let start = i64::from(avoid_zero);
        (0..len as i64).map(|k| Q::from_int(start + k)).collect()
    }

    fn held_out(len: usize, avoid_zero: bool) -> Self {
        Q::from_int(i64::from(avoid_zero) + len as i64)
    }

    fn interpolate(values: &mut [Self], avoid_zero: bool) {
        let n = values.len();
        if n <= 1 {
            return;
        }
        let start = i64::from(avoid_zero);
        // Divided differences on the equispaced nodes start, start+1, ...
        for k in 1..n {
            let step = Q::from_int(k as i64);
            for i in (k..n).rev() {
                let diff = &values[i] - &values[i - 1];
                values[i] = diff / &step;
            }
        }
        // Newton form to monomial form, innermost term first.
        let mut poly: Vec<Q> = vec![values[n - 1].clone()];
        for i in (0..n - 1).rev() {
            let node = Q::from_int(start + i as i64);
            let mut next = vec![Q::zero(); poly.len() + 1];
            for (j, c) in poly.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= &node * c;
            }
            next[0] += &values[i];
            poly = next;
        }
        for (slot, c) in values.iter_mut().zip(poly) {
            *slot = c;
        }
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }

    fn residual_ok(residual: f64, _scale: f64) -> bool {
        residual == 0.0
    }
}

/// Lossless conversion of a finite float into a rational.
pub fn rational_from_f64(v: f64) -> Result<Q> {
    Q::from_float(v).ok_or_else(|| Error::InvalidInput(format!("non-finite value {v}")))
}

/// Parses `"a"`, `"a/b"` or a decimal literal (`"-1.25e-3"`) exactly.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse `{s}` as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = Q::from_integer(all.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exponent - frac_part.len() as i32;
    let ten = Q::from_int(10);
    value *= ten.powi(i64::from(shift));
    Ok(if neg { -value } else { value })
}

/// Formats a rational as `"n"` or `"n/d"`.
pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn q_one() -> Q {
    Q::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_eval<F: Field>(coeffs: &[F], x: &F) -> F {
        coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    #[test]
    fn exact_interpolation_recovers_binomial() {
        for avoid_zero in [false, true] {
            let nodes = Q::nodes(3, avoid_zero);
            let mut values: Vec<Q> = nodes
                .iter()
                .map(|z| (Q::one() + z) * (Q::one() + z))
                .collect();
            Q::interpolate(&mut values, avoid_zero);
            assert_eq!(values, vec![Q::from_int(1), Q::from_int(2), Q::from_int(1)]);
        }
    }

    #[test]
    fn dft_interpolation_recovers_cubic() {
        let coeffs = [1.0, -2.0, 0.5, 3.0].map(|c| C64::new(c, 0.0));
        let mut values: Vec<C64> = C64::nodes(4, false)
            .iter()
            .map(|z| poly_eval(&coeffs, z))
            .collect();
        C64::interpolate(&mut values, false);
        for (a, b) in values.iter().zip(coeffs.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3").unwrap(), Q::from_int(3));
        assert_eq!(parse_rational("-1/4").unwrap(), Q::new(BigInt::from(-1), BigInt::from(4)));
        assert_eq!(parse_rational("0.1").unwrap(), Q::new(BigInt::from(1), BigInt::from(10)));
        assert_eq!(parse_rational("2.5e2").unwrap(), Q::from_int(250));
        assert_eq!(parse_rational("-1e-2").unwrap(), Q::new(BigInt::from(-1), BigInt::from(100)));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&Q::new(BigInt::from(6), BigInt::from(4))), "3/2");
    }

    #[test]
    fn powers_handle_negative_exponents() {
        assert_eq!(Q::from_int(2).powi(-3), Q::new(BigInt::from(1), BigInt::from(8)));
        let z = C64::from_polar(1.0, 0.3);
        assert!((z.powi(-2) * z.powi(2) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
