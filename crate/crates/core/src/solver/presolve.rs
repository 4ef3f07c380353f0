//! Singleton-row elimination. Rows with a single nonzero become column
//! bounds; the source row is remembered so its dual can be recovered from
//! the column's reduced cost.

use crate::lp::{LpInstance, Relation};

#[derive(Debug, Clone, Copy)]
pub(crate) struct BoundSource {
    pub row: usize,
    pub coeff: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Presolved {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Original indices of the rows kept for the simplex.
    pub kept_rows: Vec<usize>,
    pub lower_source: Vec<Option<BoundSource>>,
    pub upper_source: Vec<Option<BoundSource>>,
}

pub(crate) enum PresolveOutcome {
    Reduced(Presolved),
    Infeasible(String),
}

pub(crate) fn presolve(lp: &LpInstance, tol: f64) -> PresolveOutcome {
    let n = lp.num_cols();
    let mut lower: Vec<f64> = lp.columns.iter().map(|c| c.lower).collect();
    let mut upper: Vec<f64> = lp.columns.iter().map(|c| c.upper).collect();
    let mut lower_source = vec![None; n];
    let mut upper_source = vec![None; n];
    let mut kept_rows = Vec::with_capacity(lp.num_rows());

    for (i, row) in lp.rows.iter().enumerate() {
        let nz: Vec<(usize, f64)> = row.coeffs.iter().copied().filter(|&(_, a)| a != 0.0).collect();
        match nz.as_slice() {
            [] => {
                let ok = match row.relation {
                    Relation::Le => row.rhs >= -tol,
                    Relation::Ge => row.rhs <= tol,
                    Relation::Eq => row.rhs.abs() <= tol,
                };
                if !ok {
                    return PresolveOutcome::Infeasible(format!(
                        "empty row {} requires 0 {} {}",
                        row.name, row.relation, row.rhs
                    ));
                }
            }
            [(j, a)] => {
                let (j, a) = (*j, *a);
                let bound = row.rhs / a;
                let src = Some(BoundSource { row: i, coeff: a });
                let (tighten_upper, tighten_lower) = match (row.relation, a > 0.0) {
                    (Relation::Eq, _) => (true, true),
                    (Relation::Le, true) | (Relation::Ge, false) => (true, false),
                    (Relation::Le, false) | (Relation::Ge, true) => (false, true),
                };
                if tighten_upper && bound < upper[j] {
                    upper[j] = bound;
                    upper_source[j] = src;
                }
                if tighten_lower && bound > lower[j] {
                    lower[j] = bound;
                    lower_source[j] = src;
                }
            }
            _ => kept_rows.push(i),
        }
    }
    for j in 0..n {
        if lower[j] > upper[j] {
            if lower[j] - upper[j] <= tol * (1.0 + lower[j].abs()) {
                upper[j] = lower[j];
            } else {
                return PresolveOutcome::Infeasible(format!(
                    "column {} needs {} <= x <= {}",
                    lp.columns[j].name, lower[j], upper[j]
                ));
            }
        }
    }
    PresolveOutcome::Reduced(Presolved { lower, upper, kept_rows, lower_source, upper_source })
}
