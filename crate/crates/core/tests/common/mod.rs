#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use captrans::demand::synthesize;
use captrans::fixture::two_node_48h;
use captrans::io::Bundle;
use captrans::lp::{LpInstance, Symbol, VarKey};
use captrans::model::{
    CostTable, InterfaceSpec, NetworkSpec, NodeCosts, NodeSpec, ScenarioConfig, SeriesKind, TechParams,
    TimeSeriesSet,
};
use captrans::resources::{prepare_biofuel, prepare_hydro};
use captrans::runner::{solve_prepared, Prepared, SolverChoice, Solved};
use captrans::solver::Solution;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/two_node_48h")
}

pub fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/configs")
}

pub fn solve_script() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/solve_mps.py")
}

/// Gas-fired node with `gas` MW of existing capacity.
pub fn gas_node(id: &str, gas: f64) -> NodeSpec {
    let mut n = NodeSpec::new(id);
    n.existing.gas = gas;
    n
}

pub fn gas_costs(c_ff: f64) -> NodeCosts {
    NodeCosts { c_ff: Some(c_ff), ..Default::default() }
}

/// A bundle with the given nodes and per-node hourly electricity demand.
pub fn small_bundle(nodes: Vec<(NodeSpec, NodeCosts, Vec<f64>)>, interfaces: Vec<InterfaceSpec>) -> Bundle {
    let hours = nodes.first().map_or(0, |n| n.2.len());
    let mut series = TimeSeriesSet::new(hours);
    let mut costs = CostTable::default();
    let mut specs = Vec::new();
    for (spec, c, demand) in nodes {
        series.insert(SeriesKind::DemandElec, spec.id.clone(), demand);
        costs.nodes.insert(spec.id.clone(), c);
        specs.push(spec);
    }
    Bundle {
        network: NetworkSpec { nodes: specs, interfaces, offshore_cap_total: 0.0 },
        series,
        costs,
        params: TechParams::default(),
        emissions: Default::default(),
        btm: Default::default(),
    }
}

/// Prepares without input validation, so horizons shorter than a day work.
pub fn prepare_unchecked<'a>(bundle: &'a Bundle, config: &ScenarioConfig) -> Prepared<'a> {
    let demand = synthesize(&bundle.network, &bundle.series, config, bundle.params.eta_veh, &bundle.btm).unwrap();
    let hydro = prepare_hydro(&bundle.network, &bundle.series).unwrap();
    Prepared { bundle, config: config.clone(), demand, hydro, biofuel: prepare_biofuel(&bundle.network) }
}

pub fn solve_unchecked(bundle: &Bundle, config: &ScenarioConfig) -> Solved {
    let p = prepare_unchecked(bundle, config);
    solve_prepared(&p, &SolverChoice::default()).unwrap().unwrap()
}

pub fn value(lp: &LpInstance, sol: &Solution, sym: Symbol, owner: usize, t: usize) -> f64 {
    lp.value(&sol.values, VarKey::hourly(sym, owner, t))
}

/// The fixture cut to its first day.
pub fn one_day_fixture() -> Bundle {
    let mut b = two_node_48h();
    b.series.hours = 24;
    for (kind, by_node) in b.series.series.iter_mut() {
        let keep = if kind.resolution() == captrans::model::Resolution::Daily { 1 } else { 24 };
        for v in by_node.values_mut() {
            v.truncate(keep);
        }
    }
    b
}

/// The fixture with every low-carbon resource removed.
pub fn fossil_only_fixture() -> Bundle {
    let mut b = two_node_48h();
    for n in &mut b.network.nodes {
        let gas = n.existing.gas;
        let mut bare = NodeSpec::new(n.id.clone());
        bare.existing.gas = gas;
        bare.existing_tx_flow = n.existing_tx_flow;
        *n = bare;
    }
    b.network.offshore_cap_total = 0.0;
    for kind in [SeriesKind::HydroFixed, SeriesKind::HydroFlexDaily, SeriesKind::Nuclear] {
        b.series.series.remove(&kind);
    }
    b
}

/// Solves an MPS file with HiGHS through the bundled script. Returns the
/// solution text, or an explanation when the external solver is missing
/// or fails.
pub fn external_solve(mps: &str) -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mps_path = dir.path().join("model.mps");
    let sol_path = dir.path().join("model.sol");
    std::fs::write(&mps_path, mps).map_err(|e| e.to_string())?;
    let out = Command::new("python3")
        .arg(solve_script())
        .arg(&mps_path)
        .arg(&sol_path)
        .output()
        .map_err(|e| format!("could not start python3: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "external solver exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    std::fs::read_to_string(&sol_path).map_err(|e| e.to_string())
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
