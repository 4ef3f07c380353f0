//! Scenario metrics derived from a solved LP: LCOE, per-resource costs,
//! curtailment, excess low-carbon generation and hourly operations.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::emissions::EmissionsLedger;
use crate::error::{Error, Result};
use crate::lp::{BuildInputs, LpInstance, RowTag, ServedDemand, Symbol, VarKey};
use crate::model::{SeriesKind, HOURS_PER_DAY};
use crate::solver::Solution;

/// Total cost over net demand. Errors when the denominator is not positive.
pub fn compute_lcoe(total_cost: f64, net_demand: f64) -> Result<f64> {
    if net_demand > 0.0 {
        Ok(total_cost / net_demand)
    } else {
        Err(Error::InvalidParameter(format!("net demand {net_demand} is not positive")))
    }
}

/// Attributed cost over delivered energy; `None` when nothing was delivered.
pub fn resource_lcoe(cost: f64, delivered: f64) -> Option<f64> {
    (delivered > 0.0).then(|| cost / delivered)
}

/// Splits `slack` between wind and solar in proportion to their potential
/// generation. Returns `(wind, solar, other)`.
pub fn split_curtailment(wind: f64, solar: f64, slack: f64) -> (f64, f64, f64) {
    let total = wind + solar;
    if total > 0.0 {
        (slack * wind / total, slack * solar / total, 0.0)
    } else {
        (0.0, 0.0, slack)
    }
}

/// Hourly excess of low-carbon supply over demand, and the excess as a
/// fraction of all low-carbon supply.
pub fn excess_low_carbon(low_carbon: &[f64], demand: &[f64]) -> (Vec<f64>, f64) {
    let excess: Vec<f64> = low_carbon.iter().zip(demand).map(|(s, d)| (s - d).max(0.0)).collect();
    let supply: f64 = low_carbon.iter().sum();
    let share = if supply > 0.0 { excess.iter().sum::<f64>() / supply } else { 0.0 };
    (excess, share)
}

/// Hourly flows in MWh by node and resource.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Operations {
    pub flows: BTreeMap<String, BTreeMap<&'static str, Vec<f64>>>,
}

impl Operations {
    /// Flows that deliver energy to a node's bus.
    pub const SUPPLY: [&'static str; 14] = [
        "wind_onshore",
        "wind_offshore",
        "utility_solar",
        "btm_solar",
        "hydro_fixed",
        "hydro_flex",
        "nuclear",
        "gas_existing",
        "gas_new",
        "biofuel",
        "imports",
        "batt_discharge",
        "h2_discharge",
        "tx_in",
    ];
    /// Flows that draw energy from a node's bus. Curtailment is the balance
    /// row slack.
    pub const CONSUMING: [&'static str; 8] = [
        "batt_charge",
        "h2_charge",
        "tx_out",
        "demand_elec",
        "demand_heat",
        "demand_veh",
        "demand_veh_flex",
        "curtailment",
    ];

    fn add(&mut self, node: &str, resource: &'static str, t: usize, hours: usize, v: f64) {
        let series = self
            .flows
            .entry(node.to_string())
            .or_default()
            .entry(resource)
            .or_insert_with(|| vec![0.0; hours]);
        series[t] += v;
    }

    pub fn get(&self, node: &str, resource: &str) -> Option<&[f64]> {
        self.flows.get(node).and_then(|m| m.get(resource)).map(Vec::as_slice)
    }

    fn at(&self, node: &str, resource: &str, t: usize) -> f64 {
        self.get(node, resource).map_or(0.0, |s| s[t])
    }

    /// Supply minus consumption at one node and hour; zero when the energy
    /// balance closes.
    pub fn closure(&self, node: &str, t: usize) -> f64 {
        let supply: f64 = Self::SUPPLY.iter().map(|r| self.at(node, r, t)).sum();
        let used: f64 = Self::CONSUMING.iter().map(|r| self.at(node, r, t)).sum();
        supply - used
    }

    /// Largest absolute closure error over all nodes and hours.
    pub fn max_closure_error(&self, hours: usize) -> f64 {
        self.flows
            .keys()
            .flat_map(|n| (0..hours).map(move |t| self.closure(n, t).abs()))
            .fold(0.0, f64::max)
    }

    /// Writes `node,t,resource,mwh` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
        let wrap = |e: csv::Error| Error::Csv { path: path.to_path_buf(), source: e };
        w.write_record(["node", "t", "resource", "mwh"]).map_err(wrap)?;
        for (node, by_res) in &self.flows {
            for (res, values) in by_res {
                for (t, v) in values.iter().enumerate() {
                    w.write_record([node.as_str(), &t.to_string(), res, &v.to_string()]).map_err(wrap)?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Electrification rates realized by a solution, per node.
pub fn realized_rates(inp: &BuildInputs, lp: &LpInstance, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    match inp.fixed_rates()? {
        Some(r) => Ok(r),
        None => {
            let n = inp.network.nodes.len();
            let ph = lp.value(x, VarKey::scalar(Symbol::PHeat));
            let pv = lp.value(x, VarKey::scalar(Symbol::PVeh));
            Ok((vec![ph; n], vec![pv; n]))
        }
    }
}

/// Builds the hourly operations record and checks it against the LP rows.
pub fn operations(inp: &BuildInputs, lp: &LpInstance, sol: &Solution) -> Result<Operations> {
    let x = &sol.values;
    let hours = inp.series.hours;
    let free = inp.config.electrification_free();
    let (ph, pv) = (lp.value(x, VarKey::scalar(Symbol::PHeat)), lp.value(x, VarKey::scalar(Symbol::PVeh)));
    let mut ops = Operations::default();
    let balance: HashMap<&str, usize> =
        lp.rows_with_tag(RowTag::EnergyBalance).map(|(i, r)| (r.name.as_str(), i)).collect();
    let loss = inp.params.tx_loss;
    for (i, node) in inp.network.nodes.iter().enumerate() {
        let id = node.id.as_str();
        let ex = &node.existing;
        let d = inp.demand.node(id)?;
        let total = |sym: Symbol, existing: f64| existing + lp.value(x, VarKey::capacity(sym, i));
        let on = total(Symbol::XOn, ex.onshore_wind);
        let off = total(Symbol::XOff, ex.offshore_wind);
        let us = total(Symbol::XUsSolar, ex.utility_solar);
        let hydro = inp.hydro.get(id);
        for t in 0..hours {
            let v = |sym: Symbol| lp.value(x, VarKey::hourly(sym, i, t));
            let wind = on * inp.series.at(SeriesKind::WindOnshore, id, t)
                + off * inp.series.at(SeriesKind::WindOffshore, id, t);
            let solar = us * inp.series.at(SeriesKind::UtilitySolar, id, t) + inp.btm_generation(id, t)?;
            let entries: [(&'static str, f64); 19] = [
                ("wind_onshore", on * inp.series.at(SeriesKind::WindOnshore, id, t)),
                ("wind_offshore", off * inp.series.at(SeriesKind::WindOffshore, id, t)),
                ("utility_solar", us * inp.series.at(SeriesKind::UtilitySolar, id, t)),
                ("btm_solar", inp.btm_generation(id, t)?),
                ("hydro_fixed", hydro.map_or(0.0, |h| h.fixed_hourly[t])),
                ("hydro_flex", v(Symbol::HFlex)),
                ("nuclear", inp.nuclear(id, t)),
                ("gas_existing", v(Symbol::GExisting)),
                ("gas_new", v(Symbol::GNew)),
                ("biofuel", v(Symbol::L)),
                ("imports", v(Symbol::V)),
                ("batt_charge", v(Symbol::GammaBatt)),
                ("batt_discharge", v(Symbol::DeltaBatt)),
                ("h2_charge", v(Symbol::GammaH2)),
                ("h2_discharge", v(Symbol::DeltaH2)),
                ("demand_elec", d.elec[t]),
                ("demand_heat", if free { ph * d.heat[t] } else { d.heat[t] }),
                ("demand_veh", if free { pv * d.veh_fixed[t] } else { d.veh_fixed[t] }),
                ("demand_veh_flex", v(Symbol::DVehFlex)),
            ];
            for (r, val) in entries {
                ops.add(id, r, t, hours, val);
            }
            let name = format!("balance[{id},{t}]");
            let row = *balance.get(name.as_str()).ok_or_else(|| Error::Formulation(format!("missing row {name}")))?;
            let slack = sol.slack[row].max(0.0);
            let (cw, cs, co) = split_curtailment(wind, solar, slack);
            ops.add(id, "curtailment", t, hours, slack);
            ops.add(id, "curtailment_wind", t, hours, cw);
            ops.add(id, "curtailment_solar", t, hours, cs);
            ops.add(id, "curtailment_other", t, hours, co);
            ops.add(id, "tx_in", t, hours, 0.0);
            ops.add(id, "tx_out", t, hours, 0.0);
        }
    }
    for (k, iface) in inp.network.interfaces.iter().enumerate() {
        for (arc, (src, dst)) in [(&iface.from, &iface.to), (&iface.to, &iface.from)].into_iter().enumerate() {
            for t in 0..hours {
                let z = lp.value(x, VarKey::hourly(Symbol::Z, 2 * k + arc, t));
                ops.add(dst, "tx_in", t, hours, (1.0 - loss) * z);
                ops.add(src, "tx_out", t, hours, z);
            }
        }
    }
    Ok(ops)
}

/// Costs attributed to each resource. Their sum equals the objective.
pub fn cost_breakdown(lp: &LpInstance, x: &[f64]) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for (c, v) in lp.columns.iter().zip(x) {
        let bucket = match c.key.symbol {
            Symbol::XOn => "onshore_wind",
            Symbol::XOff => "offshore_wind",
            Symbol::XUsSolar => "utility_solar",
            Symbol::XBattE | Symbol::XBattP => "battery",
            Symbol::XH2E | Symbol::XH2P => "hydrogen",
            Symbol::XFf | Symbol::GNew | Symbol::GNewDiff => "new_gas",
            Symbol::GExisting | Symbol::GExistingDiff => "existing_gas",
            Symbol::XTx => "transmission",
            Symbol::HFlex => "hydro",
            Symbol::L => "biofuel",
            Symbol::V => "imports",
            Symbol::GammaBatt | Symbol::DeltaBatt | Symbol::GammaH2 | Symbol::DeltaH2 | Symbol::Z => "nominal",
            Symbol::PHeat | Symbol::PVeh | Symbol::EBatt | Symbol::EH2 | Symbol::DVehFlex => continue,
        };
        *out.entry(bucket.to_string()).or_insert(0.0) += c.cost * v;
    }
    for (label, v) in &lp.offset_parts {
        let bucket = match label.as_str() {
            "fixed_hydro_energy" => "hydro",
            "nuclear_energy" => "nuclear",
            other => other,
        };
        *out.entry(bucket.to_string()).or_insert(0.0) += v;
    }
    out
}

const LOW_CARBON: [&str; 7] =
    ["wind_onshore", "wind_offshore", "utility_solar", "btm_solar", "hydro_fixed", "hydro_flex", "nuclear"];
const DEMAND: [&str; 4] = ["demand_elec", "demand_heat", "demand_veh", "demand_veh_flex"];

/// Delivered energy below this many MWh is solver noise, not use.
const DELIVERY_EPS: f64 = 1e-6;

fn sum(s: Option<&[f64]>) -> f64 {
    s.map_or(0.0, |v| v.iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub mode: String,
    pub status: String,
    pub lcp_target: Option<f64>,
    pub omega_target: Option<f64>,
    /// `-omega * 100`; positive means emissions above the reference.
    pub ghg_change_pct: f64,
    pub hve_pct: f64,
    pub lcp_realized_pct: f64,
    pub average_load_gw: f64,
    /// GW for power, GWh for energy capacity; totals including existing.
    pub capacities: BTreeMap<String, f64>,
    /// Average GWh per hour.
    pub generation: BTreeMap<String, f64>,
    pub battery_throughput_gwh: f64,
    pub objective: f64,
    pub lcoe: f64,
    pub resource_lcoe: BTreeMap<String, Option<f64>>,
    pub costs: BTreeMap<String, f64>,
    pub curtailment_mwh: f64,
    pub curtailment_wind_mwh: f64,
    pub curtailment_solar_mwh: f64,
    pub excess_low_carbon_pct: f64,
    #[serde(skip)]
    pub excess_low_carbon_series: Vec<f64>,
    pub emissions: EmissionsLedger,
    pub iterations: usize,
}

/// Inputs to the share rows evaluated at a solution.
fn realized_share(inp: &BuildInputs, ops: &Operations, served: f64) -> f64 {
    let mut fossil = 0.0;
    let mut imports = 0.0;
    for node in &inp.network.nodes {
        for r in ["gas_existing", "gas_new", "biofuel"] {
            fossil += sum(ops.get(&node.id, r));
        }
        imports += sum(ops.get(&node.id, "imports"));
    }
    let denom = served - imports;
    if denom > 0.0 {
        1.0 - fossil / denom
    } else {
        0.0
    }
}

pub fn summarize(
    inp: &BuildInputs,
    lp: &LpInstance,
    sol: &Solution,
    ledger: EmissionsLedger,
) -> Result<ScenarioReport> {
    let x = &sol.values;
    let hours = inp.series.hours as f64;
    let ops = operations(inp, lp, sol)?;
    let served = ServedDemand::from_inputs(inp)?;
    let (ph, pv) = realized_rates(inp, lp, x)?;
    let p_mean = |p: &[f64]| if p.is_empty() { 0.0 } else { p.iter().sum::<f64>() / p.len() as f64 };
    let (ph_s, pv_s) = (
        lp.value(x, VarKey::scalar(Symbol::PHeat)),
        lp.value(x, VarKey::scalar(Symbol::PVeh)),
    );
    let net_demand = served.total(ph_s, pv_s);
    let lcoe = compute_lcoe(sol.objective, net_demand)?;

    let network = inp.network;
    let nodes = || network.nodes.iter().map(|n| n.id.as_str());
    let total_of = |r: &str| nodes().map(|n| sum(ops.get(n, r))).sum::<f64>();

    let mut capacities = BTreeMap::new();
    let cap = |sym: Symbol, existing: &dyn Fn(&crate::model::ExistingCapacity) -> f64| -> f64 {
        network
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| existing(&n.existing) + lp.value(x, VarKey::capacity(sym, i)))
            .sum::<f64>()
            / 1000.0
    };
    capacities.insert("onshore_wind_gw".into(), cap(Symbol::XOn, &|e| e.onshore_wind));
    capacities.insert("offshore_wind_gw".into(), cap(Symbol::XOff, &|e| e.offshore_wind));
    capacities.insert("utility_solar_gw".into(), cap(Symbol::XUsSolar, &|e| e.utility_solar));
    capacities.insert("battery_power_gw".into(), cap(Symbol::XBattP, &|e| e.battery_power));
    capacities.insert("battery_energy_gwh".into(), cap(Symbol::XBattE, &|e| e.battery_energy));
    capacities.insert("h2_power_gw".into(), cap(Symbol::XH2P, &|_| 0.0));
    capacities.insert("h2_energy_gwh".into(), cap(Symbol::XH2E, &|_| 0.0));
    capacities.insert("new_gas_gw".into(), cap(Symbol::XFf, &|_| 0.0));
    capacities.insert(
        "btm_solar_gw".into(),
        nodes().map(|n| inp.demand.node(n).map_or(0.0, |d| d.btm_capacity)).sum::<f64>() / 1000.0,
    );
    capacities.insert(
        "new_transmission_gw".into(),
        (0..network.interfaces.len()).map(|k| lp.value(x, VarKey::capacity(Symbol::XTx, k))).sum::<f64>() / 1000.0,
    );

    let gen_names = [
        "wind_onshore",
        "wind_offshore",
        "utility_solar",
        "btm_solar",
        "hydro_fixed",
        "hydro_flex",
        "nuclear",
        "gas_existing",
        "gas_new",
        "biofuel",
        "imports",
        "batt_discharge",
        "h2_discharge",
    ];
    let generation: BTreeMap<String, f64> =
        gen_names.iter().map(|r| (r.to_string(), total_of(r) / hours / 1000.0)).collect();

    let costs = cost_breakdown(lp, x);
    let cost = |k: &str| costs.get(k).copied().unwrap_or(0.0);
    let curt_wind = total_of("curtailment_wind");
    let curt_solar = total_of("curtailment_solar");
    // Delivered energy of new-build capacity, after its share of curtailment.
    let new_share = |sym: Symbol, existing: &dyn Fn(&crate::model::ExistingCapacity) -> f64, series: &[&str], curtailed: f64| {
        let new: f64 = (0..network.nodes.len()).map(|i| lp.value(x, VarKey::capacity(sym, i))).sum();
        let all: f64 = network.nodes.iter().map(|n| existing(&n.existing)).sum::<f64>() + new;
        let produced: f64 = series.iter().map(|r| total_of(r)).sum();
        if all > 0.0 {
            (produced - curtailed).max(0.0) * new / all
        } else {
            0.0
        }
    };
    let wind_potential = total_of("wind_onshore") + total_of("wind_offshore");
    let solar_potential = total_of("utility_solar") + total_of("btm_solar");
    let frac = |part: f64, whole: f64| if whole > 0.0 { part / whole } else { 0.0 };
    let on_curt = curt_wind * frac(total_of("wind_onshore"), wind_potential);
    let off_curt = curt_wind * frac(total_of("wind_offshore"), wind_potential);
    let us_curt = curt_solar * frac(total_of("utility_solar"), solar_potential);
    let resource_lcoe = |cost: f64, delivered: f64| resource_lcoe(cost, if delivered > DELIVERY_EPS { delivered } else { 0.0 });
    let mut per_resource = BTreeMap::new();
    per_resource.insert(
        "onshore_wind".into(),
        resource_lcoe(cost("onshore_wind"), new_share(Symbol::XOn, &|e| e.onshore_wind, &["wind_onshore"], on_curt)),
    );
    per_resource.insert(
        "offshore_wind".into(),
        resource_lcoe(cost("offshore_wind"), new_share(Symbol::XOff, &|e| e.offshore_wind, &["wind_offshore"], off_curt)),
    );
    per_resource.insert(
        "utility_solar".into(),
        resource_lcoe(cost("utility_solar"), new_share(Symbol::XUsSolar, &|e| e.utility_solar, &["utility_solar"], us_curt)),
    );
    per_resource.insert("battery".into(), resource_lcoe(cost("battery"), total_of("batt_discharge")));
    per_resource.insert("hydrogen".into(), resource_lcoe(cost("hydrogen"), total_of("h2_discharge")));
    per_resource.insert("new_gas".into(), resource_lcoe(cost("new_gas"), total_of("gas_new")));
    per_resource.insert("existing_gas".into(), resource_lcoe(cost("existing_gas"), total_of("gas_existing")));
    per_resource.insert("biofuel".into(), resource_lcoe(cost("biofuel"), total_of("biofuel")));
    per_resource.insert("imports".into(), resource_lcoe(cost("imports"), total_of("imports")));

    // Excess is taken per node, since it must be stored or curtailed
    // where it occurs, then summed over nodes.
    let n_hours = inp.series.hours;
    let mut excess = vec![0.0; n_hours];
    let mut low_carbon_total = 0.0;
    let mut demand_total = 0.0;
    for n in nodes() {
        let mut low_carbon = vec![0.0; n_hours];
        let mut demand = vec![0.0; n_hours];
        for t in 0..n_hours {
            low_carbon[t] = LOW_CARBON.iter().map(|r| ops.get(n, r).map_or(0.0, |s| s[t])).sum();
            demand[t] = DEMAND.iter().map(|r| ops.get(n, r).map_or(0.0, |s| s[t])).sum();
        }
        let (node_excess, _) = excess_low_carbon(&low_carbon, &demand);
        for (e, v) in excess.iter_mut().zip(node_excess) {
            *e += v;
        }
        low_carbon_total += low_carbon.iter().sum::<f64>();
        demand_total += demand.iter().sum::<f64>();
    }
    let excess_share = if low_carbon_total > 0.0 { excess.iter().sum::<f64>() / low_carbon_total } else { 0.0 };

    Ok(ScenarioReport {
        mode: inp.config.mode.to_string(),
        status: sol.status.to_string(),
        lcp_target: inp.config.lcp,
        omega_target: inp.config.omega,
        ghg_change_pct: -ledger.omega * 100.0,
        hve_pct: 50.0 * (p_mean(&ph) + p_mean(&pv)),
        lcp_realized_pct: 100.0 * realized_share(inp, &ops, net_demand),
        average_load_gw: demand_total / hours / 1000.0,
        capacities,
        generation,
        battery_throughput_gwh: total_of("batt_discharge") / 1000.0,
        objective: sol.objective,
        lcoe,
        resource_lcoe: per_resource,
        costs,
        curtailment_mwh: total_of("curtailment"),
        curtailment_wind_mwh: curt_wind,
        curtailment_solar_mwh: curt_solar,
        excess_low_carbon_pct: 100.0 * excess_share,
        excess_low_carbon_series: excess,
        emissions: ledger,
        iterations: sol.iterations,
    })
}

/// Resources with an attributed LCOE, in CSV column order.
pub const LCOE_RESOURCES: [&str; 9] = [
    "onshore_wind",
    "offshore_wind",
    "utility_solar",
    "battery",
    "hydrogen",
    "new_gas",
    "existing_gas",
    "biofuel",
    "imports",
];

const CAPACITY_FIELDS: [&str; 10] = [
    "onshore_wind_gw",
    "offshore_wind_gw",
    "utility_solar_gw",
    "btm_solar_gw",
    "battery_power_gw",
    "battery_energy_gwh",
    "h2_power_gw",
    "h2_energy_gwh",
    "new_gas_gw",
    "new_transmission_gw",
];

const SCALAR_FIELDS: [&str; 15] = [
    "mode",
    "status",
    "lcp_target",
    "omega_target",
    "hve_pct",
    "lcp_realized_pct",
    "ghg_change_pct",
    "objective",
    "lcoe",
    "average_load_gw",
    "curtailment_mwh",
    "excess_low_carbon_pct",
    "battery_throughput_gwh",
    "emissions_total_mmt",
    "iterations",
];

/// Flat column layout shared by every scenario in a CSV.
pub fn csv_header() -> Vec<String> {
    SCALAR_FIELDS
        .iter()
        .map(|s| s.to_string())
        .chain(CAPACITY_FIELDS.iter().map(|s| s.to_string()))
        .chain(LCOE_RESOURCES.iter().map(|r| format!("lcoe_{r}")))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl ScenarioReport {
    pub fn csv_record(&self) -> Vec<String> {
        let mut rec = vec![
            self.mode.clone(),
            self.status.clone(),
            opt(self.lcp_target),
            opt(self.omega_target),
            self.hve_pct.to_string(),
            self.lcp_realized_pct.to_string(),
            self.ghg_change_pct.to_string(),
            self.objective.to_string(),
            self.lcoe.to_string(),
            self.average_load_gw.to_string(),
            self.curtailment_mwh.to_string(),
            self.excess_low_carbon_pct.to_string(),
            self.battery_throughput_gwh.to_string(),
            self.emissions.total().to_string(),
            self.iterations.to_string(),
        ];
        rec.extend(CAPACITY_FIELDS.iter().map(|k| self.capacities.get(*k).copied().unwrap_or(0.0).to_string()));
        rec.extend(LCOE_RESOURCES.iter().map(|r| opt(self.resource_lcoe.get(*r).copied().flatten())));
        rec
    }
}

/// Writes one CSV row per report under [`CSV_HEADER`].
pub fn write_csv<W: Write>(out: W, reports: &[ScenarioReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::Data(format!("writing report CSV: {e}"));
    w.write_record(csv_header()).map_err(wrap)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing report CSV: {e}")))
}

/// Hours at which flexible vehicle charging occurs, for inspection.
pub fn flexible_charging_hours(ops: &Operations, node: &str) -> Vec<usize> {
    ops.get(node, "demand_veh_flex")
        .map(|s| s.iter().enumerate().filter(|(_, v)| **v > 1e-9).map(|(t, _)| t % HOURS_PER_DAY).collect())
        .unwrap_or_default()
}
