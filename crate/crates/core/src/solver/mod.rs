//! LP solving: the built-in simplex, MPS export for external solvers, and
//! import of their solutions.

mod import;
mod mps;
mod presolve;
mod scaling;
mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpInstance, Relation};

pub use import::{import_solution, Imported, RowViolation};
pub use mps::{export_mps, mps_names, MpsNames};

use presolve::{presolve, PresolveOutcome};
use simplex::{StdForm, VarState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotRule {
    Bland,
    DantzigBland,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub pivot_rule: PivotRule,
    pub scaling: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            max_iterations: 200_000,
            pivot_rule: PivotRule::DantzigBland,
            scaling: true,
        }
    }
}

impl SolveOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0) || !(self.optimality_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::IterationLimit => "iteration-limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub values: Vec<f64>,
    /// Objective including the constant offset.
    pub objective: f64,
    pub activity: Vec<f64>,
    /// Per-row slack in the feasible direction (see [`crate::lp::Row::slack`]).
    pub slack: Vec<f64>,
    /// Row duals, `d objective / d rhs`.
    pub duals: Option<Vec<f64>>,
    pub iterations: usize,
}

impl Solution {
    /// Evaluates a point against the LP.
    pub fn from_values(lp: &LpInstance, status: Status, values: Vec<f64>) -> Self {
        let activity: Vec<f64> = lp.rows.iter().map(|r| r.activity(&values)).collect();
        let slack = lp.rows.iter().zip(&activity).map(|(r, &a)| r.slack(a)).collect();
        Solution {
            status,
            objective: lp.objective(&values),
            values,
            activity,
            slack,
            duals: None,
            iterations: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Largest absolute violation of any row or column bound.
pub fn primal_residual(lp: &LpInstance, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (c, &v) in lp.columns.iter().zip(x) {
        worst = worst.max(c.lower - v).max(v - c.upper);
    }
    for r in &lp.rows {
        worst = worst.max(-r.slack(r.activity(x)));
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    /// Largest sign violation among duals and reduced costs.
    pub dual_infeasibility: f64,
    pub primal_residual: f64,
}

/// Builds the dual objective `b.y + sum of bound terms` from the row duals
/// and checks dual feasibility against the original LP.
pub fn duality_report(lp: &LpInstance, sol: &Solution) -> Option<DualityReport> {
    let y = sol.duals.as_ref()?;
    let mut d: Vec<f64> = lp.columns.iter().map(|c| c.cost).collect();
    let mut dual_obj = lp.offset();
    let mut infeas = 0.0f64;
    for (row, &yi) in lp.rows.iter().zip(y) {
        for &(j, a) in &row.coeffs {
            d[j] -= a * yi;
        }
        dual_obj += row.rhs * yi;
        infeas = infeas.max(match row.relation {
            Relation::Le => yi,
            Relation::Ge => -yi,
            Relation::Eq => 0.0,
        });
    }
    for (c, &dj) in lp.columns.iter().zip(&d) {
        if dj > 0.0 {
            if c.lower.is_finite() {
                dual_obj += dj * c.lower;
            } else {
                infeas = infeas.max(dj);
            }
        } else if dj < 0.0 {
            if c.upper.is_finite() {
                dual_obj += dj * c.upper;
            } else {
                infeas = infeas.max(-dj);
            }
        }
    }
    let primal = sol.objective;
    Some(DualityReport {
        primal_objective: primal,
        dual_objective: dual_obj,
        relative_gap: (primal - dual_obj).abs() / primal.abs().max(1.0),
        dual_infeasibility: infeas,
        primal_residual: primal_residual(lp, &sol.values),
    })
}

/// Solves `lp` with the built-in simplex.
pub fn solve(lp: &LpInstance, opts: &SolveOptions) -> Result<Solution> {
    opts.check()?;
    lp.check()?;
    let n = lp.num_cols();
    let pre = match presolve(lp, opts.feasibility_tol) {
        PresolveOutcome::Infeasible(why) => {
            log::info!("presolve detected infeasibility: {why}");
            let zeros = vec![0.0; n];
            return Ok(Solution::from_values(lp, Status::Infeasible, zeros));
        }
        PresolveOutcome::Reduced(p) => p,
    };

    let m = pre.kept_rows.len();
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (new_i, &i) in pre.kept_rows.iter().enumerate() {
        for &(j, a) in &lp.rows[i].coeffs {
            if a == 0.0 {
                continue;
            }
            match entries[j].last_mut() {
                Some(last) if last.0 == new_i => last.1 += a,
                _ => entries[j].push((new_i, a)),
            }
        }
    }
    let mut col_start = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    col_start.push(0);
    for col in &entries {
        for &(i, a) in col {
            row_idx.push(i);
            vals.push(a);
        }
        col_start.push(row_idx.len());
    }
    let cost: Vec<f64> = lp.columns.iter().map(|c| c.cost).collect();
    let sc = if opts.scaling {
        scaling::equilibrate(m, &col_start, &row_idx, &vals, &cost)
    } else {
        scaling::Scaling::identity(m, n)
    };

    for j in 0..n {
        for k in col_start[j]..col_start[j + 1] {
            vals[k] *= sc.row[row_idx[k]] * sc.col[j];
        }
    }
    let mut lower = Vec::with_capacity(n + m);
    let mut upper = Vec::with_capacity(n + m);
    for j in 0..n {
        lower.push(pre.lower[j] / sc.col[j]);
        upper.push(pre.upper[j] / sc.col[j]);
    }
    let mut b = Vec::with_capacity(m);
    for (new_i, &i) in pre.kept_rows.iter().enumerate() {
        let row = &lp.rows[i];
        let (lo, up) = match row.relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        };
        lower.push(lo);
        upper.push(up);
        b.push(row.rhs * sc.row[new_i]);
    }
    let std = StdForm {
        m,
        n,
        col_start,
        row_idx,
        vals,
        cost: cost.iter().zip(&sc.col).map(|(c, s)| c * s / sc.objective).collect(),
        lower,
        upper,
        b,
    };

    let res = simplex::run(&std, opts);
    log::debug!("simplex finished: {} after {} iterations", res.status, res.iterations);

    let values: Vec<f64> = (0..n).map(|j| res.x[j] * sc.col[j]).collect();
    let mut sol = Solution::from_values(lp, res.status, values);
    sol.iterations = res.iterations;
    if res.status == Status::Optimal {
        let mut duals = vec![0.0; lp.num_rows()];
        for (new_i, &i) in pre.kept_rows.iter().enumerate() {
            duals[i] = res.y[new_i] * sc.row[new_i] * sc.objective;
        }
        for j in 0..n {
            let dj = res.d[j] * sc.objective / sc.col[j];
            let source = match res.state[j] {
                VarState::AtLower => pre.lower_source[j],
                VarState::AtUpper => pre.upper_source[j],
                _ => None,
            };
            if let Some(src) = source {
                duals[src.row] = dj / src.coeff;
            }
        }
        sol.duals = Some(duals);
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{RowTag, Symbol, VarKey};

    fn lp_with(cols: &[(f64, f64, f64)], rows: &[(&[(usize, f64)], Relation, f64)]) -> LpInstance {
        let mut lp = LpInstance::new();
        for (j, &(lo, up, c)) in cols.iter().enumerate() {
            lp.add_column(VarKey::capacity(Symbol::XOn, j), format!("x{j}"), lo, up, c);
        }
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            lp.add_row(format!("r{i}"), RowTag::EnergyBalance, coeffs.to_vec(), *rel, *rhs);
        }
        lp
    }

    #[test]
    fn single_lower_bound_row() {
        let lp = lp_with(&[(0.0, f64::INFINITY, 1.0)], &[(&[(0, 1.0)], Relation::Ge, 3.0)]);
        let s = solve(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.values[0] - 3.0).abs() < 1e-9);
        assert!((s.objective - 3.0).abs() < 1e-9);
        assert!((s.duals.unwrap()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_variable_vertex() {
        // Vertices of {x + y >= 4, x <= 3, x, y >= 0} with finite cost:
        // (3, 1) -> 9, (0, 4) -> 12; the brute-force optimum is (3, 1).
        let lp = lp_with(
            &[(0.0, f64::INFINITY, 2.0), (0.0, f64::INFINITY, 3.0)],
            &[(&[(0, 1.0), (1, 1.0)], Relation::Ge, 4.0), (&[(0, 1.0)], Relation::Le, 3.0)],
        );
        for rule in [PivotRule::Bland, PivotRule::DantzigBland] {
            let opts = SolveOptions { pivot_rule: rule, ..Default::default() };
            let s = solve(&lp, &opts).unwrap();
            assert_eq!(s.status, Status::Optimal);
            assert!((s.values[0] - 3.0).abs() < 1e-9);
            assert!((s.values[1] - 1.0).abs() < 1e-9);
            assert!((s.objective - 9.0).abs() < 1e-9);
            let dr = duality_report(&lp, &s).unwrap();
            assert!(dr.relative_gap < 1e-9, "{dr:?}");
            assert!(dr.dual_infeasibility < 1e-9, "{dr:?}");
        }
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let lp = lp_with(
            &[(0.0, f64::INFINITY, 1.0)],
            &[(&[(0, 1.0)], Relation::Le, 1.0), (&[(0, 1.0)], Relation::Ge, 2.0)],
        );
        assert_eq!(solve(&lp, &SolveOptions::default()).unwrap().status, Status::Infeasible);
        // The same conflict expressed through a coupled row reaches phase one.
        let lp = lp_with(
            &[(0.0, f64::INFINITY, 1.0), (0.0, f64::INFINITY, 1.0)],
            &[
                (&[(0, 1.0), (1, 1.0)], Relation::Le, 1.0),
                (&[(0, 1.0), (1, 2.0)], Relation::Ge, 3.0),
            ],
        );
        assert_eq!(solve(&lp, &SolveOptions::default()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let lp = lp_with(
            &[(0.0, f64::INFINITY, -1.0), (0.0, f64::INFINITY, 0.0)],
            &[(&[(0, 1.0), (1, -1.0)], Relation::Le, 1.0)],
        );
        assert_eq!(solve(&lp, &SolveOptions::default()).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn equality_rows_and_upper_bounds() {
        // min -x - 2y  s.t. x + y = 5, y <= 3 (column bound), x - y >= -10
        let lp = lp_with(
            &[(0.0, f64::INFINITY, -1.0), (0.0, 3.0, -2.0)],
            &[(&[(0, 1.0), (1, 1.0)], Relation::Eq, 5.0), (&[(0, 1.0), (1, -1.0)], Relation::Ge, -10.0)],
        );
        let s = solve(&lp, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.values[0] - 2.0).abs() < 1e-9);
        assert!((s.values[1] - 3.0).abs() < 1e-9);
        assert!((s.objective + 8.0).abs() < 1e-9);
        let dr = duality_report(&lp, &s).unwrap();
        assert!(dr.relative_gap < 1e-9 && dr.dual_infeasibility < 1e-9, "{dr:?}");
    }

    #[test]
    fn nan_is_rejected_before_solving() {
        let lp = lp_with(&[(0.0, f64::INFINITY, f64::NAN)], &[]);
        assert!(matches!(solve(&lp, &SolveOptions::default()), Err(Error::InvalidLp(_))));
    }

    #[test]
    fn offset_is_reported() {
        let mut lp = lp_with(&[(0.0, f64::INFINITY, 1.0)], &[(&[(0, 1.0)], Relation::Ge, 1.0)]);
        lp.add_offset("fixed", 10.0);
        let s = solve(&lp, &SolveOptions::default()).unwrap();
        assert!((s.objective - 11.0).abs() < 1e-12);
        let dr = duality_report(&lp, &s).unwrap();
        assert!(dr.relative_gap < 1e-12);
    }
}
