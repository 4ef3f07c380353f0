//! Input bundle reading and writing.
//!
//! A bundle directory holds `model.json` (horizon, network, costs, technical
//! parameters, emission inputs) and one `<series>.csv` per input series with
//! the header `node,t,value`. Monthly hydro totals live in
//! `hydro_monthly.csv` with the header `node,year,month,mwh`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::demand::BtmLogistic;
use crate::emissions::EmissionsConfig;
use crate::error::{Error, Result};
use crate::model::{CostTable, NetworkSpec, SeriesKind, TechParams, TimeSeriesSet};

pub const MODEL_FILE: &str = "model.json";
pub const HYDRO_MONTHLY_FILE: &str = "hydro_monthly.csv";

/// Everything a scenario needs apart from its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub network: NetworkSpec,
    pub series: TimeSeriesSet,
    pub costs: CostTable,
    pub params: TechParams,
    pub emissions: EmissionsConfig,
    pub btm: BtmLogistic,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    hours: usize,
    network: NetworkSpec,
    costs: CostTable,
    #[serde(default)]
    params: TechParams,
    #[serde(default)]
    emissions: EmissionsConfig,
    #[serde(default)]
    btm: BtmLogistic,
}

#[derive(Serialize, Deserialize)]
struct SeriesRecord {
    node: String,
    t: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct MonthlyRecord {
    node: String,
    year: i32,
    month: u32,
    mwh: f64,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv { path: path.to_path_buf(), source: e }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_series(path: &Path, kind: SeriesKind, series: &mut TimeSeriesSet) -> Result<()> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut by_node: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for rec in reader.deserialize() {
        let r: SeriesRecord = rec.map_err(csv_err(path))?;
        if by_node.entry(r.node.clone()).or_default().insert(r.t, r.value).is_some() {
            return Err(Error::Data(format!("{}: duplicate entry for {} at t={}", path.display(), r.node, r.t)));
        }
    }
    for (node, values) in by_node {
        let n = values.len();
        if values.keys().copied().ne(0..n) {
            return Err(Error::Data(format!("{}: indices for {node} are not 0..{n}", path.display())));
        }
        series.insert(kind, node, values.into_values().collect());
    }
    Ok(())
}

fn read_monthly(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut by_node: BTreeMap<String, BTreeMap<(i32, u32), f64>> = BTreeMap::new();
    for rec in reader.deserialize() {
        let r: MonthlyRecord = rec.map_err(csv_err(path))?;
        if !(1..=12).contains(&r.month) {
            return Err(Error::Data(format!("{}: month {} out of range", path.display(), r.month)));
        }
        by_node.entry(r.node).or_default().insert((r.year, r.month), r.mwh);
    }
    Ok(by_node.into_iter().map(|(k, v)| (k, v.into_values().collect())).collect())
}

/// Loads a bundle directory. Series files that are absent are treated as
/// missing series, which validation reports where they are required.
pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let model: ModelFile = read_json(&dir.join(MODEL_FILE))?;
    let mut series = TimeSeriesSet::new(model.hours);
    for kind in SeriesKind::ALL {
        let path = dir.join(format!("{}.csv", kind.name()));
        if path.exists() {
            read_series(&path, kind, &mut series)?;
        }
    }
    let monthly = dir.join(HYDRO_MONTHLY_FILE);
    if monthly.exists() {
        series.hydro_monthly = read_monthly(&monthly)?;
    }
    Ok(Bundle {
        network: model.network,
        series,
        costs: model.costs,
        params: model.params,
        emissions: model.emissions,
        btm: model.btm,
    })
}

/// Writes `bundle` so that [`load_bundle`] reads it back unchanged.
/// Monthly hydro is written with consecutive months starting in January of
/// year 1.
pub fn write_bundle(bundle: &Bundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let model = ModelFile {
        hours: bundle.series.hours,
        network: bundle.network.clone(),
        costs: bundle.costs.clone(),
        params: bundle.params.clone(),
        emissions: bundle.emissions.clone(),
        btm: bundle.btm,
    };
    let path = dir.join(MODEL_FILE);
    write_json(&path, &model)?;
    written.push(path);
    for (kind, by_node) in &bundle.series.series {
        let path = dir.join(format!("{}.csv", kind.name()));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        for (node, values) in by_node {
            for (t, &value) in values.iter().enumerate() {
                w.serialize(SeriesRecord { node: node.clone(), t, value }).map_err(csv_err(&path))?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    if !bundle.series.hydro_monthly.is_empty() {
        let path = dir.join(HYDRO_MONTHLY_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        for (node, values) in &bundle.series.hydro_monthly {
            for (m, &mwh) in values.iter().enumerate() {
                let rec = MonthlyRecord { node: node.clone(), year: 1 + (m / 12) as i32, month: 1 + (m % 12) as u32, mwh };
                w.serialize(rec).map_err(csv_err(&path))?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut bundle = fixture::two_node_48h();
        bundle.series.hydro_monthly.insert("up".into(), (0..14).map(|m| 100.0 + m as f64).collect());
        write_bundle(&bundle, dir.path()).unwrap();
        let back = load_bundle(dir.path()).unwrap();
        assert_eq!(back, bundle);
    }

    #[test]
    fn gaps_in_time_index_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = fixture::two_node_48h();
        write_bundle(&bundle, dir.path()).unwrap();
        fs::write(dir.path().join("nuclear.csv"), "node,t,value\ndown,0,1\ndown,2,1\n").unwrap();
        assert!(matches!(load_bundle(dir.path()), Err(Error::Data(_))));
    }
}
