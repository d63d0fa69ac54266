//! File and flag parsing for the command-line front end.

use std::fs;
use std::path::Path;

use cdpp_core::counting::{Allowed, LinearConstraint, PartitionFamily};
use cdpp_core::field::parse_rational;
use cdpp_core::{FeatureMatrix, Graph, Kernel, Q};
use nalgebra::DMatrix;
use num::ToPrimitive;
use serde_json::Value;

use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| parse_err(format!("{}: {e}", path.display())))
}

/// A JSON number (kept verbatim) or a string such as `"3/4"`.
fn scalar(v: &Value) -> Result<Q, CliError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(parse_err(format!("expected a number, got {other}"))),
    };
    parse_rational(&text).map_err(|e| parse_err(e.to_string()))
}

/// Rows of a nested array, or a flat row-major array with `cols` columns.
fn matrix(v: &Value, cols: Option<usize>) -> Result<(usize, usize, Vec<Q>), CliError> {
    let items = v.as_array().ok_or_else(|| parse_err("matrix must be an array"))?;
    if items.iter().all(Value::is_array) {
        let rows = items.len();
        let width = items.first().and_then(Value::as_array).map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows * width);
        for row in items {
            let row = row.as_array().unwrap();
            if row.len() != width {
                return Err(parse_err("matrix rows have different lengths"));
            }
            for x in row {
                entries.push(scalar(x)?);
            }
        }
        Ok((rows, width, entries))
    } else {
        let cols = cols.ok_or_else(|| parse_err("flat matrix needs a known column count"))?;
        if cols == 0 || items.len() % cols != 0 {
            return Err(parse_err("flat matrix length is not a multiple of the column count"));
        }
        let entries = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
        Ok((items.len() / cols, cols, entries))
    }
}

/// Measure input: a kernel `L` or a factor `V` with `L = V Vᵀ`.
#[derive(Clone, Debug)]
pub enum KernelInput {
    Kernel(Kernel),
    Factor(FeatureMatrix),
}

impl KernelInput {
    pub fn m(&self) -> usize {
        match self {
            KernelInput::Kernel(k) => k.m(),
            KernelInput::Factor(v) => v.m(),
        }
    }
}

/// `{"m": int, "L": [[…]]}` or `{"V": [[…]]}`.
pub fn kernel(path: &Path) -> Result<KernelInput, CliError> {
    parse_kernel(&json(path)?)
}

pub fn parse_kernel(doc: &Value) -> Result<KernelInput, CliError> {
    let declared = match doc.get("m") {
        Some(v) => Some(v.as_u64().ok_or_else(|| parse_err("`m` must be a nonnegative integer"))? as usize),
        None => None,
    };
    if let Some(l) = doc.get("L") {
        let (rows, cols, entries) = matrix(l, declared)?;
        if rows != cols {
            return Err(parse_err(format!("L must be square, got {rows}×{cols}")));
        }
        if declared.is_some_and(|m| m != rows) {
            return Err(parse_err(format!("m = {} but L is {rows}×{rows}", declared.unwrap())));
        }
        return Ok(KernelInput::Kernel(Kernel::from_rational(rows, entries)?));
    }
    if let Some(v) = doc.get("V") {
        let (rows, cols, entries) = matrix(v, None)?;
        if declared.is_some_and(|m| m != rows) {
            return Err(parse_err(format!("m = {} but V has {rows} rows", declared.unwrap())));
        }
        return Ok(KernelInput::Factor(FeatureMatrix::from_rational(rows, cols, entries)?));
    }
    Err(parse_err("kernel file needs an `L` or a `V` field"))
}

pub fn graph(path: &Path) -> Result<Graph, CliError> {
    Ok(read(path)?.parse::<Graph>()?)
}

/// `{"d": int, "matrices": [[[…]], …]}`.
pub fn matrices(path: &Path) -> Result<(usize, Vec<DMatrix<f64>>), CliError> {
    parse_matrices(&json(path)?)
}

pub fn parse_matrices(doc: &Value) -> Result<(usize, Vec<DMatrix<f64>>), CliError> {
    let list = doc
        .get("matrices")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("expected a `matrices` array"))?;
    let declared = doc.get("d").and_then(Value::as_u64).map(|d| d as usize);
    let mut out = Vec::with_capacity(list.len());
    for item in list {
        let (rows, cols, entries) = matrix(item, declared)?;
        if rows != cols {
            return Err(parse_err(format!("matrix is {rows}×{cols}, not square")));
        }
        let values = entries.iter().map(|q| q.to_f64().unwrap_or(f64::NAN));
        out.push(DMatrix::from_row_iterator(rows, cols, values));
    }
    let d = match (declared, out.first()) {
        (Some(d), _) => d,
        (None, Some(a)) => a.nrows(),
        (None, None) => return Err(parse_err("cannot infer d from an empty tuple")),
    };
    Ok((d, out))
}

/// Comma-separated integers, e.g. `1,-2,3`.
pub fn int_list(text: &str) -> Result<Vec<i64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| parse_err(format!("`{}` is not an integer", s.trim())))
        })
        .collect()
}

/// `"1,2|3,4"` with 1-indexed elements.
pub fn partition(text: &str, quotas: &str, m: usize) -> Result<PartitionFamily, CliError> {
    let mut parts = Vec::new();
    for block in text.split('|') {
        let mut part = Vec::new();
        for e in int_list(block)? {
            if e < 1 || e as usize > m {
                return Err(parse_err(format!("element {e} is outside 1..{m}")));
            }
            part.push(e as usize - 1);
        }
        parts.push(part);
    }
    let quotas = int_list(quotas)?
        .into_iter()
        .map(|q| usize::try_from(q).map_err(|_| parse_err(format!("quota {q} is negative"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PartitionFamily::new(m, parts, quotas)?)
}

/// `[{"c": […], "K": {"set": […]} | {"interval": [lo, hi]}}, …]`.
pub fn linear(path: &Path) -> Result<Vec<LinearConstraint>, CliError> {
    parse_linear(&json(path)?)
}

pub fn parse_linear(doc: &Value) -> Result<Vec<LinearConstraint>, CliError> {
    let list = doc.as_array().ok_or_else(|| parse_err("constraints must be an array"))?;
    let int = |v: &Value| v.as_i64().ok_or_else(|| parse_err(format!("`{v}` is not an integer")));
    list.iter()
        .map(|item| {
            let costs = item
                .get("c")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("constraint needs a `c` array"))?
                .iter()
                .map(int)
                .collect::<Result<Vec<_>, _>>()?;
            let k = item.get("K").ok_or_else(|| parse_err("constraint needs a `K` field"))?;
            let allowed = if let Some(set) = k.get("set").and_then(Value::as_array) {
                Allowed::set(set.iter().map(int).collect::<Result<Vec<_>, _>>()?)
            } else if let Some(iv) = k.get("interval").and_then(Value::as_array) {
                match iv.as_slice() {
                    [lo, hi] => Allowed::Interval(int(lo)?, int(hi)?),
                    _ => return Err(parse_err("`interval` needs exactly two bounds")),
                }
            } else {
                return Err(parse_err("`K` must hold `set` or `interval`"));
            };
            Ok(LinearConstraint::new(costs, allowed))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn kernel_forms() {
        let k = parse_kernel(&json!({"m": 2, "L": [[1, 0.5], [0.5, 1]]})).unwrap();
        match k {
            KernelInput::Kernel(k) => assert_eq!(k.exact_entries()[1], Q::new(1.into(), 2.into())),
            _ => panic!(),
        }
        let flat = parse_kernel(&json!({"m": 2, "L": [2, "1/3", "1/3", 1]})).unwrap();
        assert_eq!(flat.m(), 2);
        let v = parse_kernel(&json!({"V": [[1, 0], [0, 1], [1, 1]]})).unwrap();
        assert!(matches!(v, KernelInput::Factor(ref f) if f.m() == 3 && f.n() == 2));
        assert!(parse_kernel(&json!({"m": 3, "L": [[1, 0], [0, 1]]})).is_err());
        assert!(matches!(
            parse_kernel(&json!({"L": [[1, 2], [2, 1]]})),
            Err(CliError::Domain(cdpp_core::Error::NotPsd { .. }))
        ));
    }

    #[test]
    fn partition_flags() {
        let p = partition("1,2|3,4", "1,1", 4).unwrap();
        assert_eq!(p.parts(), &[vec![0, 1], vec![2, 3]]);
        assert!(partition("1,5", "1", 4).is_err());
        assert!(partition("1,2|3,4", "1,-1", 4).is_err());
    }

    #[test]
    fn linear_file() {
        let c = parse_linear(&json!([
            {"c": [1, 2, 3], "K": {"set": [0, 3]}},
            {"c": [1, 1, 1], "K": {"interval": [1, 2]}}
        ]))
        .unwrap();
        assert_eq!(c.len(), 2);
        assert!(c[0].allowed.contains(3) && !c[0].allowed.contains(1));
        assert!(c[1].allowed.contains(2) && !c[1].allowed.contains(3));
        assert!(parse_linear(&json!([{"c": [1], "K": {"interval": [1]}}])).is_err());
    }

    #[test]
    fn integer_lists() {
        assert_eq!(int_list("1, -2,3").unwrap(), vec![1, -2, 3]);
        assert!(int_list("1,x").is_err());
    }
}
