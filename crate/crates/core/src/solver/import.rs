use std::collections::HashMap;

use serde::Serialize;

use super::{mps_names, Solution, Status};
use crate::error::{Error, Result};
use crate::lp::LpInstance;

const IMPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    pub name: String,
    pub amount: f64,
}

#[derive(Debug, Clone)]
pub struct Imported {
    pub solution: Solution,
    /// Rows and column bounds violated by more than the import tolerance.
    pub violations: Vec<RowViolation>,
}

/// Reads `NAME VALUE` lines produced by an external solver. Names may be
/// either the LP's own names or the mangled MPS names.
pub fn import_solution(lp: &LpInstance, text: &str) -> Result<Imported> {
    let names = mps_names(lp)?;
    let mut lookup: HashMap<&str, usize> = HashMap::new();
    for (j, c) in lp.columns.iter().enumerate() {
        lookup.insert(c.name.as_str(), j);
        lookup.insert(names.cols[j].as_str(), j);
    }
    let mut values = vec![f64::NAN; lp.num_cols()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('*') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(name), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Import(format!("line {}: expected `NAME VALUE`", lineno + 1)));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Import(format!("line {}: bad number {value:?}", lineno + 1)))?;
        match lookup.get(name) {
            Some(&j) => values[j] = value,
            None => log::warn!("ignoring unknown variable {name} in solution file"),
        }
    }
    let missing: Vec<&str> = lp
        .columns
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_nan())
        .map(|(c, _)| c.name.as_str())
        .collect();
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).copied().collect();
        return Err(Error::Import(format!(
            "{} variable(s) missing, e.g. {}",
            missing.len(),
            shown.join(", ")
        )));
    }

    let mut solution = Solution::from_values(lp, Status::Optimal, values);
    let mut violations = Vec::new();
    for (row, &slack) in lp.rows.iter().zip(&solution.slack) {
        if -slack > IMPORT_TOL * row.rhs.abs().max(1.0) {
            violations.push(RowViolation { name: row.name.clone(), amount: -slack });
        }
    }
    for (c, &v) in lp.columns.iter().zip(&solution.values) {
        let amount = (c.lower - v).max(v - c.upper);
        if amount > IMPORT_TOL * v.abs().max(1.0) {
            violations.push(RowViolation { name: c.name.clone(), amount });
        }
    }
    if !violations.is_empty() {
        solution.status = Status::Infeasible;
    }
    Ok(Imported { solution, violations })
}
