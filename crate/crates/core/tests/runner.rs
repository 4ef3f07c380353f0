mod common;

use captrans::fixture::two_node_48h;
use captrans::io::read_json;
use captrans::model::{ScenarioConfig, ScenarioMode};
use captrans::runner::{
    min_lcoe_search, run_scenario, run_sweep, write_artifacts, write_sweep_csv, RunStatus, SearchMethod, SolverChoice,
    Stage, SweepSpec, OPERATIONS_CSV, REPORT_CSV, REPORT_JSON, SEARCH_TOL,
};
use captrans::solver::{SolveOptions, Status};
use captrans::Error;
use common::*;

fn sweep_csv(bundle: &captrans::io::Bundle, spec: &SweepSpec) -> Vec<u8> {
    let cells = run_sweep(bundle, spec, &SolveOptions::default());
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &cells).unwrap();
    out
}

#[test]
fn config_file_run_writes_artifacts_and_meets_target() {
    let bundle = two_node_48h();
    let config: ScenarioConfig = read_json(&config_dir().join("lcp40_hve0.json")).unwrap();
    let run = run_scenario(&bundle, &config, &SolverChoice::default()).unwrap();
    assert_eq!(run.status, RunStatus::Solved(Status::Optimal));
    let report = run.report.as_ref().unwrap();
    assert_eq!(report.hve_pct, 0.0);
    assert!((report.lcp_realized_pct - 40.0).abs() < 1e-6, "{}", report.lcp_realized_pct);

    let dir = tempfile::tempdir().unwrap();
    let written = write_artifacts(dir.path(), &bundle, &config, &run).unwrap();
    for name in [REPORT_JSON, REPORT_CSV, OPERATIONS_CSV] {
        let path = dir.path().join(name);
        assert!(written.contains(&path), "{name} not reported");
        assert!(std::fs::metadata(&path).unwrap().len() > 0, "{name} is empty");
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap()).unwrap();
    assert!((json["objective"].as_f64().unwrap() - report.objective).abs() < 1e-9);
}

#[test]
fn every_fixture_config_runs() {
    let bundle = two_node_48h();
    for name in ["lcp40_hve0.json", "ghg50_hve50.json", "ghg30_lcp50.json"] {
        let config: ScenarioConfig = read_json(&config_dir().join(name)).unwrap();
        let run = run_scenario(&bundle, &config, &SolverChoice::default()).unwrap();
        assert_eq!(run.status.exit_code(), 0, "{name}");
    }
}

#[test]
fn fossil_only_system_cannot_be_fully_clean() {
    let run = run_scenario(&fossil_only_fixture(), &ScenarioConfig::lcp_hve(1.0, 0.0), &SolverChoice::default()).unwrap();
    assert_eq!(run.status, RunStatus::Solved(Status::Infeasible));
    assert_eq!(run.status.exit_code(), 2);
    assert!(run.report.is_none());
}

#[test]
fn zero_reduction_target_keeps_emissions_at_or_below_reference() {
    let run = run_scenario(&two_node_48h(), &ScenarioConfig::ghg_hve(0.0, 0.5), &SolverChoice::default()).unwrap();
    let e = &run.report.unwrap().emissions;
    assert!(e.total() <= e.reference * (1.0 + 1e-9), "{} > {}", e.total(), e.reference);
}

#[test]
fn invalid_config_fails_at_validation() {
    let err = run_scenario(&two_node_48h(), &ScenarioConfig::lcp_hve(1.5, 0.0), &SolverChoice::default()).unwrap_err();
    assert_eq!(err.stage, Stage::Validate);
    assert!(err.to_string().starts_with("validate stage failed"), "{err}");
}

#[test]
fn lcoe_search_requires_the_builtin_solver() {
    let solver = SolverChoice::Export { mps_out: std::env::temp_dir().join("unused.mps"), sol_in: None };
    let err = run_scenario(&two_node_48h(), &ScenarioConfig::min_lcoe(0.3), &solver).unwrap_err();
    assert_eq!(err.stage, Stage::Validate);
}

#[test]
fn export_then_import_matches_builtin() {
    let bundle = two_node_48h();
    let config = ScenarioConfig::lcp_hve(0.8, 0.5);
    let dir = tempfile::tempdir().unwrap();
    let mps = dir.path().join("model.mps");
    let exported = run_scenario(&bundle, &config, &SolverChoice::Export { mps_out: mps.clone(), sol_in: None }).unwrap();
    assert_eq!(exported.status, RunStatus::Exported);
    assert_eq!(exported.status.exit_code(), 0);

    let text = external_solve(&std::fs::read_to_string(&mps).unwrap()).expect("HiGHS solve");
    let sol = dir.path().join("model.sol");
    std::fs::write(&sol, text).unwrap();
    let imported = run_scenario(&bundle, &config, &SolverChoice::Export { mps_out: mps, sol_in: Some(sol) }).unwrap();
    let builtin = run_scenario(&bundle, &config, &SolverChoice::default()).unwrap();
    let (a, b) = (imported.report.unwrap().objective, builtin.report.unwrap().objective);
    assert!(rel_diff(a, b) < 1e-6, "{a} vs {b}");
}

#[test]
fn two_by_two_sweep_has_one_row_per_cell() {
    let spec = SweepSpec::lcp_hve(&[0.4, 0.6], &[0.0, 0.5], &ScenarioConfig::lcp_hve(0.0, 0.0), 1).unwrap();
    let text = String::from_utf8(sweep_csv(&two_node_48h(), &spec)).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let records: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 4);
    for r in &records {
        assert_eq!(&r[1], "optimal");
    }
}

#[test]
fn objective_is_nondecreasing_in_clean_share() {
    let lcp = [0.2, 0.4, 0.6, 0.8];
    let spec = SweepSpec::lcp_hve(&lcp, &[0.0], &ScenarioConfig::lcp_hve(0.0, 0.0), 1).unwrap();
    let cells = run_sweep(&two_node_48h(), &spec, &SolveOptions::default());
    let objectives: Vec<f64> = cells.iter().map(|c| c.report.as_ref().unwrap().objective).collect();
    for w in objectives.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-9), "{objectives:?}");
    }
}

#[test]
fn sweep_output_is_reproducible_and_independent_of_threads() {
    let bundle = one_day_fixture();
    let serial = SweepSpec::omega_hve(&[0.0, 0.3], &[0.0, 1.0], &ScenarioConfig::ghg_hve(0.0, 0.0), 1).unwrap();
    let threaded = SweepSpec { jobs: 3, ..serial.clone() };
    let first = sweep_csv(&bundle, &serial);
    assert_eq!(first, sweep_csv(&bundle, &serial));
    assert_eq!(first, sweep_csv(&bundle, &threaded));
}

#[test]
fn repeated_runs_are_identical() {
    let bundle = two_node_48h();
    let config = ScenarioConfig::ghg_lcp(0.3, 0.5);
    let a = run_scenario(&bundle, &config, &SolverChoice::default()).unwrap();
    let b = run_scenario(&bundle, &config, &SolverChoice::default()).unwrap();
    assert_eq!(a.solved.unwrap().solution.values, b.solved.unwrap().solution.values);
    assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
}

#[test]
fn lcoe_search_matches_a_grid_of_direct_runs() {
    let bundle = one_day_fixture();
    let omega = -1.0;
    let found = min_lcoe_search(&bundle, &ScenarioConfig::min_lcoe(omega), SearchMethod::default(), &SolveOptions::default())
        .unwrap();
    let search = found.search.as_ref().unwrap();
    assert_eq!(found.report.as_ref().unwrap().mode, ScenarioMode::MinLcoe.to_string());

    // Oracle: 21 independent ghg+hve runs.
    let grid: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let hve = i as f64 / 20.0;
            let run = run_scenario(&bundle, &ScenarioConfig::ghg_hve(omega, hve), &SolverChoice::default()).unwrap();
            (hve, run.report.unwrap().lcoe)
        })
        .collect();
    let (best_hve, best) = grid.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!(search.lcoe <= best + 1e-9, "{} > {best}", search.lcoe);
    assert!((search.hve - best_hve).abs() <= 0.05 + SEARCH_TOL, "{} vs {best_hve}", search.hve);
    assert_eq!(found.report.unwrap().lcoe, search.lcoe);
}

#[test]
fn unreachable_target_reports_no_feasible_point() {
    let err = min_lcoe_search(&fossil_only_fixture(), &ScenarioConfig::min_lcoe(0.99), SearchMethod::default(), &SolveOptions::default())
        .unwrap_err();
    assert!(matches!(err.source, Error::NoFeasiblePoint(_)), "{err}");
}

#[test]
fn fixture_files_match_the_builtin_bundle() {
    let loaded = captrans::io::load_bundle(&fixture_dir()).unwrap();
    assert!(loaded == two_node_48h(), "fixtures/two_node_48h is stale; regenerate with `captrans write-fixture`");
}
