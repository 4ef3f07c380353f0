mod common;

use captrans::fixture::two_node_48h;
use captrans::lp::{LpInstance, Relation, RowTag, Symbol, VarKey};
use captrans::model::ScenarioConfig;
use captrans::runner::{prepare, solve_prepared, SolverChoice, Solved};
use captrans::solver::{
    duality_report, export_mps, import_solution, primal_residual, solve, SolveOptions, Status,
};
use captrans::Error;
use common::*;
use proptest::prelude::*;

type Row = (Vec<f64>, Relation, f64);

fn dense_lp(cost: &[f64], upper: &[f64], rows: &[Row]) -> LpInstance {
    let mut lp = LpInstance::new();
    for (j, (&c, &u)) in cost.iter().zip(upper).enumerate() {
        lp.add_column(VarKey::capacity(Symbol::XOn, j), format!("x{j}"), 0.0, u, c);
    }
    for (i, (a, rel, b)) in rows.iter().enumerate() {
        let coeffs = a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect();
        lp.add_row(format!("r{i}"), RowTag::EnergyBalance, coeffs, *rel, *b);
    }
    lp
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-9 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Brute-force optimum of a boxed LP over all basic solutions.
fn vertex_optimum(cost: &[f64], upper: &[f64], rows: &[Row]) -> Option<f64> {
    let n = cost.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0));
        planes.push((e, upper[j]));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7;
        x.iter().zip(upper).all(|(&v, &u)| v >= -tol && v <= u + tol)
            && rows.iter().all(|(a, rel, b)| {
                let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                match rel {
                    Relation::Le => lhs <= b + tol,
                    Relation::Ge => lhs >= b - tol,
                    Relation::Eq => (lhs - b).abs() <= tol,
                }
            })
    };
    let mut best: Option<f64> = None;
    let m = planes.len();
    let mut pick = vec![0usize; n];
    fn combos(start: usize, depth: usize, m: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if depth == pick.len() {
            f(pick);
            return;
        }
        for i in start..m {
            pick[depth] = i;
            combos(i + 1, depth + 1, m, pick, f);
        }
    }
    combos(0, 0, m, &mut pick, &mut |idx| {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let z: f64 = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(z, |v: f64| v.min(z)));
            }
        }
    });
    best
}

fn small_int() -> impl Strategy<Value = f64> {
    (-4i32..=4).prop_map(f64::from)
}

fn random_lp() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<Row>)> {
    (2usize..=3).prop_flat_map(|n| {
        let relation = prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)];
        let row = (prop::collection::vec(small_int(), n), relation, (-6i32..=12).prop_map(f64::from));
        (
            prop::collection::vec(small_int(), n),
            prop::collection::vec((1i32..=8).prop_map(f64::from), n),
            prop::collection::vec(row, 1..=3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_agrees_with_vertex_enumeration((cost, upper, rows) in random_lp()) {
        let lp = dense_lp(&cost, &upper, &rows);
        let s = solve(&lp, &SolveOptions::default()).unwrap();
        match vertex_optimum(&cost, &upper, &rows) {
            Some(z) => {
                prop_assert_eq!(s.status, Status::Optimal);
                prop_assert!((s.objective - z).abs() <= 1e-6 * (1.0 + z.abs()), "{} vs {}", s.objective, z);
                prop_assert!(primal_residual(&lp, &s.values) <= 1e-7);
            }
            None => prop_assert_eq!(s.status, Status::Infeasible),
        }
    }
}

fn fixture_solve(config: &ScenarioConfig) -> Solved {
    let bundle = two_node_48h();
    let p = prepare(&bundle, config).unwrap();
    solve_prepared(&p, &SolverChoice::default()).unwrap().unwrap()
}

fn solution_text(lp: &LpInstance, x: &[f64]) -> String {
    lp.columns.iter().zip(x).map(|(c, v)| format!("{} {v:?}\n", c.name)).collect()
}

/// Reads the objective from the comment line the external script writes.
fn external_objective(text: &str) -> f64 {
    let first = text.lines().next().unwrap();
    first.rsplit(' ').next().unwrap().parse().unwrap()
}

#[test]
fn fixture_solution_is_primal_and_dual_optimal() {
    let s = fixture_solve(&ScenarioConfig::lcp_hve(0.8, 0.5));
    let dr = duality_report(&s.lp, &s.solution).unwrap();
    assert!(dr.primal_residual <= 1e-7, "{dr:?}");
    assert!(dr.relative_gap <= 1e-6, "{dr:?}");
    assert!((s.solution.objective - s.lp.objective(&s.solution.values)).abs() <= 1e-9 * s.solution.objective.abs());
}

#[test]
fn scaling_does_not_change_the_optimum() {
    let bundle = one_day_fixture();
    let p = prepare(&bundle, &ScenarioConfig::ghg_lcp(0.3, 0.5)).unwrap();
    let objective = |scaling: bool| {
        let opts = SolveOptions { scaling, ..Default::default() };
        solve_prepared(&p, &SolverChoice::Builtin(opts)).unwrap().unwrap().solution.objective
    };
    let (a, b) = (objective(true), objective(false));
    assert!(rel_diff(a, b) < 1e-7, "{a} vs {b}");
}

#[test]
fn perturbed_solutions_are_not_better() {
    // Moving along any single coordinate either breaks feasibility or
    // does not lower the cost.
    let s = fixture_solve(&ScenarioConfig::lcp_hve(0.4, 0.0));
    let base = s.solution.objective;
    let mut x = s.solution.values.clone();
    for j in (0..x.len()).step_by(7) {
        for step in [-1e-3, 1e-3] {
            let keep = x[j];
            x[j] = keep + step * keep.abs().max(1.0);
            if primal_residual(&s.lp, &x) <= 1e-9 {
                assert!(s.lp.objective(&x) >= base - 1e-6 * base.abs(), "column {}", s.lp.columns[j].name);
            }
            x[j] = keep;
        }
    }
}

#[test]
fn import_round_trips_the_builtin_solution() {
    let s = fixture_solve(&ScenarioConfig::ghg_hve(0.5, 0.5));
    let imported = import_solution(&s.lp, &solution_text(&s.lp, &s.solution.values)).unwrap();
    assert!(imported.violations.is_empty(), "{:?}", imported.violations);
    assert_eq!(imported.solution.status, Status::Optimal);
    assert!(rel_diff(imported.solution.objective, s.solution.objective) < 1e-12);
}

#[test]
fn import_flags_an_infeasible_point() {
    let s = fixture_solve(&ScenarioConfig::lcp_hve(0.4, 0.0));
    let zeros = vec![0.0; s.lp.num_cols()];
    let imported = import_solution(&s.lp, &solution_text(&s.lp, &zeros)).unwrap();
    assert!(!imported.violations.is_empty());
    assert_eq!(imported.solution.status, Status::Infeasible);
    assert!(imported.violations.iter().any(|v| v.name.starts_with("balance[")));
}

#[test]
fn import_requires_every_variable() {
    let s = fixture_solve(&ScenarioConfig::lcp_hve(0.4, 0.0));
    let text = solution_text(&s.lp, &s.solution.values);
    let partial: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert!(matches!(import_solution(&s.lp, &partial), Err(Error::Import(_))));
    assert!(matches!(import_solution(&s.lp, "x0 1 2\n"), Err(Error::Import(_))));
}

#[test]
fn mps_export_is_stable_and_records_the_offset() {
    let s = fixture_solve(&ScenarioConfig::lcp_hve(0.4, 0.0));
    let a = export_mps(&s.lp, "fixture").unwrap();
    let b = export_mps(&fixture_solve(&ScenarioConfig::lcp_hve(0.4, 0.0)).lp, "fixture").unwrap();
    assert_eq!(a, b);
    let first = a.lines().next().unwrap();
    assert_eq!(first, format!("* objective offset: {:?}", s.lp.offset()));
    assert!(s.lp.offset() > 0.0);
    assert!(a.trim_end().ends_with("ENDATA"));
}

#[test]
fn external_solver_agrees_on_a_two_variable_problem() {
    let lp = dense_lp(
        &[2.0, 3.0],
        &[f64::INFINITY, f64::INFINITY],
        &[(vec![1.0, 1.0], Relation::Ge, 4.0), (vec![1.0, 0.0], Relation::Le, 3.0)],
    );
    let text = external_solve(&export_mps(&lp, "tiny").unwrap()).expect("HiGHS solve");
    assert!((external_objective(&text) - 9.0).abs() < 1e-9, "{text}");
    let imported = import_solution(&lp, &text).unwrap();
    assert!(imported.violations.is_empty());
    assert!((imported.solution.objective - 9.0).abs() < 1e-9);
}

#[test]
fn external_solver_agrees_on_the_fixture() {
    let s = fixture_solve(&ScenarioConfig::ghg_lcp(0.3, 0.5));
    let text = external_solve(&export_mps(&s.lp, "fixture").unwrap()).expect("HiGHS solve");
    let external = external_objective(&text) + s.lp.offset();
    assert!(rel_diff(external, s.solution.objective) < 1e-6, "{external} vs {}", s.solution.objective);
    let imported = import_solution(&s.lp, &text).unwrap();
    assert!(imported.violations.is_empty(), "{:?}", imported.violations);
}
