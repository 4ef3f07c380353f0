//! Builds the least-cost capacity and dispatch LP.
//!
//! Columns are created only for technologies that can operate at a node:
//! new-build capacity needs a capital cost, existing gas needs installed
//! capacity, imports need a positive limit, and so on. Must-run supply
//! (existing renewables, behind-the-meter solar, fixed hydro, nuclear)
//! enters rows as constants.

use std::collections::BTreeMap;

use super::instance::{LpInstance, Relation, RowTag, Symbol, VarKey};
use crate::demand::DemandBundle;
use crate::emissions::{electricity_coefficients, EmissionsConfig, MMT_PER_GRAM};
use crate::error::{Error, Result};
use crate::model::{
    CapacityTech, CostTable, NetworkSpec, NodeCosts, ScenarioConfig, ScenarioMode, SeriesKind, TechParams,
    TimeSeriesSet, HOURS_PER_DAY, MMBTU_PER_MWH,
};
use crate::resources::{BiofuelLimits, HydroProfile};

/// Everything the formulation reads, already validated and prepared.
#[derive(Debug, Clone, Copy)]
pub struct BuildInputs<'a> {
    pub config: &'a ScenarioConfig,
    pub network: &'a NetworkSpec,
    pub series: &'a TimeSeriesSet,
    pub costs: &'a CostTable,
    pub params: &'a TechParams,
    pub emissions: &'a EmissionsConfig,
    pub demand: &'a DemandBundle,
    pub hydro: &'a BTreeMap<String, HydroProfile>,
    pub biofuel: &'a BTreeMap<String, BiofuelLimits>,
}

impl BuildInputs<'_> {
    /// Per-node electrification rates when they are fixed inputs.
    pub fn fixed_rates(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        if self.config.electrification_free() {
            return Ok(None);
        }
        let rates = |f: &Option<crate::model::Fraction>| -> Result<Vec<f64>> {
            self.network
                .nodes
                .iter()
                .map(|n| f.as_ref().map_or(Ok(1.0), |f| f.value_for(&n.id)))
                .collect()
        };
        Ok(Some((rates(&self.config.p_heat)?, rates(&self.config.p_veh)?)))
    }

    pub fn n_years(&self) -> Result<f64> {
        let n = self.params.years_for(self.series.hours);
        if n > 0.0 && n.is_finite() {
            Ok(n)
        } else {
            Err(Error::InvalidParameter(format!("analysis length must be positive, got {n} years")))
        }
    }

    /// Behind-the-meter generation at a node and hour.
    pub fn btm_generation(&self, node: &str, t: usize) -> Result<f64> {
        let cap = self.demand.node(node)?.btm_capacity;
        Ok(cap * self.series.at(SeriesKind::BtmSolar, node, t))
    }

    pub fn nuclear(&self, node: &str, t: usize) -> f64 {
        if self.config.include_nuclear {
            self.series.at(SeriesKind::Nuclear, node, t)
        } else {
            0.0
        }
    }
}

/// Total demand net of behind-the-meter solar over the horizon, affine in
/// the electrification columns: `constant + per_p_heat*p_heat + per_p_veh*p_veh`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServedDemand {
    pub constant: f64,
    pub per_p_heat: f64,
    pub per_p_veh: f64,
}

impl ServedDemand {
    pub fn from_inputs(inp: &BuildInputs) -> Result<Self> {
        let free = inp.config.electrification_free();
        let mut s = ServedDemand { constant: 0.0, per_p_heat: 0.0, per_p_veh: 0.0 };
        for node in &inp.network.nodes {
            let d = inp.demand.node(&node.id)?;
            let heat: f64 = d.heat.iter().sum();
            let mut veh: f64 = d.veh_fixed.iter().sum();
            if let Some(env) = &d.ev_flex {
                veh += env.iter().map(|e| e.requirement).sum::<f64>();
            }
            s.constant += d.elec.iter().sum::<f64>();
            if free {
                s.per_p_heat += heat;
                s.per_p_veh += veh;
            } else {
                s.constant += heat + veh;
            }
            for t in 0..inp.series.hours {
                s.constant -= inp.btm_generation(&node.id, t)?;
            }
        }
        Ok(s)
    }

    pub fn total(&self, p_heat: f64, p_veh: f64) -> f64 {
        self.constant + self.per_p_heat * p_heat + self.per_p_veh * p_veh
    }
}

/// Right-hand side pieces of the emissions cap, in MMt CO2e per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhgBudget {
    /// `(1 - omega) * reference`.
    pub cap: f64,
    /// Emissions outside the electricity sector that no column controls.
    pub fixed: f64,
    /// Heating emissions avoided per unit of `p_heat` (free mode only).
    pub heat_coef: f64,
    /// Vehicle emissions avoided per unit of `p_veh` (free mode only).
    pub veh_coef: f64,
}

pub fn ghg_budget(inp: &BuildInputs) -> Result<GhgBudget> {
    let omega = inp
        .config
        .omega
        .ok_or_else(|| Error::Formulation("emissions cap needs omega".into()))?;
    let e = inp.emissions;
    let (theta_heat, theta_veh) = (e.theta_heat()?, e.theta_veh()?);
    let fuel = |m: &BTreeMap<String, f64>, id: &str| m.get(id).copied().unwrap_or(0.0);
    let mut budget = GhgBudget { cap: (1.0 - omega) * e.reference, fixed: e.fixed_sectors(), heat_coef: 0.0, veh_coef: 0.0 };
    let rates = inp.fixed_rates()?;
    for (i, node) in inp.network.nodes.iter().enumerate() {
        let heat = theta_heat * fuel(&e.fuel_heat, &node.id) * MMT_PER_GRAM;
        let veh = theta_veh * fuel(&e.fuel_veh, &node.id) * MMT_PER_GRAM;
        match &rates {
            Some((ph, pv)) => budget.fixed += (1.0 - ph[i]) * heat + (1.0 - pv[i]) * veh,
            None => {
                budget.fixed += heat + veh;
                budget.heat_coef += heat;
                budget.veh_coef += veh;
            }
        }
    }
    Ok(budget)
}

struct ColSpec {
    lower: f64,
    upper: f64,
    cost: f64,
}

struct PendingRow {
    tag: RowTag,
    name: String,
    terms: Vec<(VarKey, f64)>,
    relation: Relation,
    rhs: f64,
}

#[derive(Default)]
struct Builder {
    cols: BTreeMap<VarKey, ColSpec>,
    rows: Vec<PendingRow>,
    offsets: Vec<(&'static str, f64)>,
}

impl Builder {
    fn col(&mut self, key: VarKey, lower: f64, upper: f64, cost: f64) -> VarKey {
        self.cols.insert(key, ColSpec { lower, upper, cost });
        key
    }

    fn has(&self, key: VarKey) -> bool {
        self.cols.contains_key(&key)
    }

    fn row(&mut self, tag: RowTag, name: String, terms: Vec<(VarKey, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(PendingRow { tag, name, terms, relation, rhs });
    }

    fn finish(self, network: &NetworkSpec) -> Result<LpInstance> {
        let mut lp = LpInstance::new();
        for (key, spec) in &self.cols {
            lp.add_column(*key, column_name(*key, network), spec.lower, spec.upper, spec.cost);
        }
        let mut rows = self.rows;
        rows.sort_by_key(|r| r.tag);
        for r in rows {
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for (key, a) in r.terms {
                let j = lp
                    .col(key)
                    .ok_or_else(|| Error::Formulation(format!("row {} references missing column {key:?}", r.name)))?;
                *merged.entry(j).or_insert(0.0) += a;
            }
            let coeffs = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
            lp.add_row(r.name, r.tag, coeffs, r.relation, r.rhs);
        }
        for (label, v) in self.offsets {
            lp.add_offset(label, v);
        }
        lp.check()?;
        Ok(lp)
    }
}

fn column_name(key: VarKey, network: &NetworkSpec) -> String {
    let sym = key.symbol.name();
    match key.symbol {
        Symbol::PHeat | Symbol::PVeh => sym.to_string(),
        Symbol::XTx => format!("{sym}[{}]", network.interfaces[key.owner].id()),
        Symbol::Z => {
            let iface = &network.interfaces[key.owner / 2];
            let (a, b) = if key.owner % 2 == 0 { (&iface.from, &iface.to) } else { (&iface.to, &iface.from) };
            format!("{sym}[{a}>{b},{}]", key.t.unwrap_or(0))
        }
        _ => {
            let node = &network.nodes[key.owner].id;
            match key.t {
                Some(t) => format!("{sym}[{node},{t}]"),
                None => format!("{sym}[{node}]"),
            }
        }
    }
}

/// Annual capital plus fixed O&M per unit of new capacity, over the horizon.
fn capacity_cost(c: &NodeCosts, params: &TechParams, tech: CapacityTech, n_years: f64) -> Result<Option<f64>> {
    match c.capital_per_mw(tech) {
        None => Ok(None),
        Some(cap) => Ok(Some(n_years * (params.annualization(tech)? * cap + c.fixed_om_per_mw(tech)))),
    }
}

fn require(value: Option<f64>, what: &str, node: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Formulation(format!("node {node} needs {what} for an enabled technology")))
}

fn check_params(params: &TechParams) -> Result<()> {
    let checks = [
        ("reserve margin", params.reserve_margin >= 0.0),
        ("transmission loss", (0.0..1.0).contains(&params.tx_loss)),
        ("self-discharge", (0.0..1.0).contains(&params.kappa)),
        ("gas efficiencies", params.eta_ff_existing > 0.0 && params.eta_ff_new > 0.0),
        ("storage efficiencies", params.eta_batt > 0.0 && params.eta_h2 > 0.0),
    ];
    for (what, ok) in checks {
        if !ok {
            return Err(Error::InvalidParameter(format!("{what} out of range")));
        }
    }
    if !(params.phi_batt_min >= 0.0 && params.phi_batt_min <= params.phi_batt_max) {
        return Err(Error::InvalidParameter(format!(
            "battery ratio bounds {} > {}",
            params.phi_batt_min, params.phi_batt_max
        )));
    }
    Ok(())
}

struct StorageSpec {
    energy: Symbol,
    power: Symbol,
    charge: Symbol,
    discharge: Symbol,
    level: Symbol,
    tags: [RowTag; 4],
    label: &'static str,
    eta: f64,
    existing_energy: f64,
    existing_power: f64,
    new_build: Option<(f64, f64)>,
}

fn add_storage(b: &mut Builder, s: &StorageSpec, i: usize, node: &str, hours: usize, kappa: f64, nominal: f64) {
    let (e_key, p_key) = (VarKey::capacity(s.energy, i), VarKey::capacity(s.power, i));
    if let Some((ce, cp)) = s.new_build {
        b.col(e_key, 0.0, f64::INFINITY, ce);
        b.col(p_key, 0.0, f64::INFINITY, cp);
    }
    let built = b.has(e_key);
    let [rec, ecap, ccap, dcap] = s.tags;
    for t in 0..hours {
        let g = b.col(VarKey::hourly(s.charge, i, t), 0.0, f64::INFINITY, nominal);
        let d = b.col(VarKey::hourly(s.discharge, i, t), 0.0, f64::INFINITY, nominal);
        let e = b.col(VarKey::hourly(s.level, i, t), 0.0, f64::INFINITY, 0.0);
        let prev = VarKey::hourly(s.level, i, (t + hours - 1) % hours);
        b.row(
            rec,
            format!("{}_soc[{node},{t}]", s.label),
            vec![(d, 1.0 / s.eta), (g, -s.eta), (prev, -(1.0 - kappa)), (e, 1.0)],
            Relation::Eq,
            0.0,
        );
        let with = |k: VarKey| if built { vec![(k, 1.0), (if k == e { e_key } else { p_key }, -1.0)] } else { vec![(k, 1.0)] };
        b.row(ecap, format!("{}_energy[{node},{t}]", s.label), with(e), Relation::Le, s.existing_energy);
        b.row(ccap, format!("{}_charge[{node},{t}]", s.label), with(g), Relation::Le, s.existing_power);
        b.row(dcap, format!("{}_discharge[{node},{t}]", s.label), with(d), Relation::Le, s.existing_power);
    }
}

fn ramp_rows(b: &mut Builder, tag: RowTag, gen: Symbol, diff: Symbol, i: usize, node: &str, hours: usize) {
    for t in 0..hours {
        let (g, d) = (VarKey::hourly(gen, i, t), VarKey::hourly(diff, i, t));
        let prev = VarKey::hourly(gen, i, (t + hours - 1) % hours);
        let label = gen.name();
        b.row(tag, format!("ramp_up_{label}[{node},{t}]"), vec![(d, 1.0), (g, -1.0), (prev, 1.0)], Relation::Ge, 0.0);
        b.row(tag, format!("ramp_down_{label}[{node},{t}]"), vec![(d, 1.0), (g, 1.0), (prev, -1.0)], Relation::Ge, 0.0);
    }
}

fn daily_rows(
    b: &mut Builder,
    tag: RowTag,
    label: &str,
    key: impl Fn(usize) -> VarKey,
    node: &str,
    days: usize,
    relation: Relation,
    rhs: impl Fn(usize) -> f64,
) {
    for m in 0..days {
        let terms = (m * HOURS_PER_DAY..(m + 1) * HOURS_PER_DAY).map(|t| (key(t), 1.0)).collect();
        b.row(tag, format!("{label}[{node},{m}]"), terms, relation, rhs(m));
    }
}

/// Assembles the LP for one scenario.
pub fn build(inp: &BuildInputs) -> Result<LpInstance> {
    let BuildInputs { config, network, series, costs, params, .. } = *inp;
    config.check()?;
    check_params(params)?;
    if config.mode == ScenarioMode::MinLcoe && (config.p_heat.is_none() || config.p_veh.is_none()) {
        return Err(Error::Formulation("min-lcoe is solved by an outer search over electrification".into()));
    }
    let hours = series.hours;
    if hours == 0 {
        return Err(Error::Formulation("empty horizon".into()));
    }
    let n_years = inp.n_years()?;
    let free = config.electrification_free();
    let whole_days = hours % HOURS_PER_DAY == 0;
    let days = hours / HOURS_PER_DAY;
    let need_days = |what: &str| -> Result<()> {
        if whole_days {
            Ok(())
        } else {
            Err(Error::Formulation(format!("{what} needs a horizon of whole days, got {hours} hours")))
        }
    };
    let mut b = Builder::default();

    let (p_heat, p_veh) = (VarKey::scalar(Symbol::PHeat), VarKey::scalar(Symbol::PVeh));
    if free {
        b.col(p_heat, config.hve_min, config.hve_max, 0.0);
        b.col(p_veh, config.hve_min, config.hve_max, 0.0);
    }

    let mut existing_capacity_cost = 0.0;
    let mut fixed_hydro_cost = 0.0;
    let mut nuclear_cost = 0.0;
    let mut total_nuclear = 0.0;
    // Per node: hourly supply terms and constant supply, collected for the balance rows.
    let mut supply: Vec<Vec<Vec<(VarKey, f64)>>> = vec![vec![Vec::new(); hours]; network.nodes.len()];
    let mut constant: Vec<Vec<f64>> = vec![vec![0.0; hours]; network.nodes.len()];
    let mut offshore_new = Vec::new();
    let mut offshore_existing = 0.0;

    for (i, node) in network.nodes.iter().enumerate() {
        let id = node.id.as_str();
        let c = costs.node(id)?;
        let ex = &node.existing;
        let d = inp.demand.node(id)?;
        for (what, len) in [("electric", d.elec.len()), ("heating", d.heat.len()), ("vehicle", d.veh_fixed.len())] {
            if len != hours {
                return Err(Error::Formulation(format!("{what} demand at {id} has {len} values, expected {hours}")));
            }
        }

        existing_capacity_cost +=
            n_years * (c.existing_capacity_per_mw() * (ex.hydro() + ex.nuclear + ex.gas + ex.biofuel) + c.ex_tx * node.existing_tx_flow);

        // Wind and utility solar.
        let renewables = [
            (Symbol::XOn, CapacityTech::OnshoreWind, SeriesKind::WindOnshore, ex.onshore_wind, Some((RowTag::OnshoreCap, node.onshore_max))),
            (Symbol::XOff, CapacityTech::OffshoreWind, SeriesKind::WindOffshore, ex.offshore_wind, None),
            (Symbol::XUsSolar, CapacityTech::UtilitySolar, SeriesKind::UtilitySolar, ex.utility_solar, Some((RowTag::SolarCap, node.utility_solar_max))),
        ];
        for (sym, tech, kind, existing, cap) in renewables {
            let key = VarKey::capacity(sym, i);
            if let Some(cost) = capacity_cost(c, params, tech, n_years)? {
                b.col(key, 0.0, f64::INFINITY, cost);
                if let Some((tag, max)) = cap {
                    if existing > max {
                        log::warn!("{id}: existing {} capacity {existing} exceeds its maximum {max}; no new build allowed", sym.name());
                    }
                    b.row(tag, format!("{}_max[{id}]", sym.name()), vec![(key, 1.0)], Relation::Le, (max - existing).max(0.0));
                }
                if sym == Symbol::XOff {
                    offshore_new.push(key);
                }
            }
            if sym == Symbol::XOff {
                offshore_existing += existing;
            }
            for t in 0..hours {
                let w = series.at(kind, id, t);
                constant[i][t] += existing * w;
                if b.has(key) {
                    supply[i][t].push((key, w));
                }
            }
        }

        // Must-run supply.
        let hydro = inp.hydro.get(id);
        let fixed_hydro = |t: usize| hydro.map_or(0.0, |h| h.fixed_hourly.get(t).copied().unwrap_or(0.0));
        if let Some(h) = hydro {
            if h.fixed_hourly.len() != hours {
                return Err(Error::Formulation(format!("fixed hydro at {id} has {} values, expected {hours}", h.fixed_hourly.len())));
            }
        }
        let fixed_hydro_total: f64 = (0..hours).map(fixed_hydro).sum();
        if fixed_hydro_total > 0.0 {
            fixed_hydro_cost += require(c.c_hydro, "a hydro price", id)? * fixed_hydro_total;
        }
        let nuclear_total: f64 = (0..hours).map(|t| inp.nuclear(id, t)).sum();
        if nuclear_total > 0.0 {
            nuclear_cost += require(c.c_nuc, "a nuclear price", id)? * nuclear_total;
        }
        total_nuclear += nuclear_total;
        for t in 0..hours {
            constant[i][t] += inp.btm_generation(id, t)? + fixed_hydro(t) + inp.nuclear(id, t);
        }

        // Fossil generation.
        let sigma = 1.0 + params.reserve_margin;
        if ex.gas > 0.0 {
            let fuel = MMBTU_PER_MWH * require(c.c_ff, "a fuel price", id)?;
            for t in 0..hours {
                let g = b.col(VarKey::hourly(Symbol::GExisting, i, t), 0.0, f64::INFINITY, fuel / params.eta_ff_existing);
                b.col(VarKey::hourly(Symbol::GExistingDiff, i, t), 0.0, f64::INFINITY, c.c_existing_ramp);
                b.row(RowTag::ReserveExisting, format!("reserve_existing[{id},{t}]"), vec![(g, sigma)], Relation::Le, ex.gas);
                supply[i][t].push((g, 1.0));
            }
            ramp_rows(&mut b, RowTag::RampExisting, Symbol::GExisting, Symbol::GExistingDiff, i, id, hours);
        }
        if let Some(cost) = capacity_cost(c, params, CapacityTech::NewGas, n_years)? {
            let x = b.col(VarKey::capacity(Symbol::XFf, i), 0.0, f64::INFINITY, cost);
            let fuel = MMBTU_PER_MWH * require(c.c_ff, "a fuel price", id)?;
            for t in 0..hours {
                let g = b.col(VarKey::hourly(Symbol::GNew, i, t), 0.0, f64::INFINITY, fuel / params.eta_ff_new + c.omv_ff);
                b.col(VarKey::hourly(Symbol::GNewDiff, i, t), 0.0, f64::INFINITY, c.c_new_ramp);
                b.row(RowTag::ReserveNew, format!("reserve_new[{id},{t}]"), vec![(g, sigma), (x, -1.0)], Relation::Le, 0.0);
                supply[i][t].push((g, 1.0));
            }
            ramp_rows(&mut b, RowTag::RampNew, Symbol::GNew, Symbol::GNewDiff, i, id, hours);
        }

        // Flexible hydro.
        if let Some(h) = hydro.filter(|h| h.flex_max > 0.0 || h.flex_daily.iter().any(|&v| v > 0.0)) {
            need_days("flexible hydro")?;
            if h.flex_daily.len() != days {
                return Err(Error::Formulation(format!("daily hydro at {id} has {} values, expected {days}", h.flex_daily.len())));
            }
            let price = require(c.c_hydro, "a hydro price", id)?;
            for t in 0..hours {
                let k = b.col(VarKey::hourly(Symbol::HFlex, i, t), 0.0, f64::INFINITY, price);
                b.row(RowTag::HydroHourly, format!("hydro_max[{id},{t}]"), vec![(k, 1.0)], Relation::Le, h.flex_max);
                supply[i][t].push((k, 1.0));
            }
            daily_rows(&mut b, RowTag::HydroDaily, "hydro_daily", |t| VarKey::hourly(Symbol::HFlex, i, t), id, days, Relation::Eq, |m| h.flex_daily[m]);
        }

        // Biofuel.
        if let Some(lim) = inp.biofuel.get(id).filter(|l| l.daily > 0.0 && l.hourly > 0.0) {
            need_days("biofuel")?;
            let price = require(c.c_bio, "a biofuel price", id)?;
            for t in 0..hours {
                let k = b.col(VarKey::hourly(Symbol::L, i, t), 0.0, f64::INFINITY, price);
                b.row(RowTag::BioHourly, format!("bio_max[{id},{t}]"), vec![(k, 1.0)], Relation::Le, lim.hourly);
                supply[i][t].push((k, 1.0));
            }
            daily_rows(&mut b, RowTag::BioDaily, "bio_daily", |t| VarKey::hourly(Symbol::L, i, t), id, days, Relation::Le, |_| lim.daily);
        }

        // Imports.
        if node.import_max > 0.0 {
            let price = require(c.c_imp, "an import price", id)?;
            for t in 0..hours {
                let k = b.col(VarKey::hourly(Symbol::V, i, t), 0.0, f64::INFINITY, price);
                b.row(RowTag::ImportCap, format!("import_max[{id},{t}]"), vec![(k, 1.0)], Relation::Le, node.import_max);
                supply[i][t].push((k, 1.0));
            }
        }

        // Storage.
        let nominal = costs.nominal_storage;
        if c.cap_batt_e.is_some() || ex.battery_energy > 0.0 || ex.battery_power > 0.0 {
            let new_build = match capacity_cost(c, params, CapacityTech::BatteryEnergy, n_years)? {
                Some(ce) => Some((ce, capacity_cost(c, params, CapacityTech::BatteryPower, n_years)?.unwrap_or(0.0))),
                None => None,
            };
            let spec = StorageSpec {
                energy: Symbol::XBattE,
                power: Symbol::XBattP,
                charge: Symbol::GammaBatt,
                discharge: Symbol::DeltaBatt,
                level: Symbol::EBatt,
                tags: [RowTag::BattRecursion, RowTag::BattEnergyCap, RowTag::BattChargeCap, RowTag::BattDischargeCap],
                label: "batt",
                eta: params.eta_batt,
                existing_energy: ex.battery_energy,
                existing_power: ex.battery_power,
                new_build,
            };
            add_storage(&mut b, &spec, i, id, hours, params.kappa, nominal);
            if new_build.is_some() {
                let (xe, xp) = (VarKey::capacity(Symbol::XBattE, i), VarKey::capacity(Symbol::XBattP, i));
                let (lo, hi) = (params.phi_batt_min, params.phi_batt_max);
                b.row(
                    RowTag::BattRatio,
                    format!("batt_ratio_max[{id}]"),
                    vec![(xp, 1.0), (xe, -hi)],
                    Relation::Le,
                    hi * ex.battery_energy - ex.battery_power,
                );
                b.row(
                    RowTag::BattRatio,
                    format!("batt_ratio_min[{id}]"),
                    vec![(xe, lo), (xp, -1.0)],
                    Relation::Le,
                    ex.battery_power - lo * ex.battery_energy,
                );
            }
            for t in 0..hours {
                supply[i][t].push((VarKey::hourly(Symbol::GammaBatt, i, t), -1.0));
                supply[i][t].push((VarKey::hourly(Symbol::DeltaBatt, i, t), 1.0));
            }
        }
        if config.include_h2 {
            if let Some(ce) = capacity_cost(c, params, CapacityTech::H2Energy, n_years)? {
                let cp = capacity_cost(c, params, CapacityTech::H2Power, n_years)?
                    .unwrap_or(n_years * c.fixed_om_per_mw(CapacityTech::H2Power));
                let spec = StorageSpec {
                    energy: Symbol::XH2E,
                    power: Symbol::XH2P,
                    charge: Symbol::GammaH2,
                    discharge: Symbol::DeltaH2,
                    level: Symbol::EH2,
                    tags: [RowTag::H2Recursion, RowTag::H2EnergyCap, RowTag::H2ChargeCap, RowTag::H2DischargeCap],
                    label: "h2",
                    eta: params.eta_h2,
                    existing_energy: 0.0,
                    existing_power: 0.0,
                    new_build: Some((ce, cp)),
                };
                add_storage(&mut b, &spec, i, id, hours, params.kappa, nominal);
                for t in 0..hours {
                    supply[i][t].push((VarKey::hourly(Symbol::GammaH2, i, t), -1.0));
                    supply[i][t].push((VarKey::hourly(Symbol::DeltaH2, i, t), 1.0));
                }
            }
        }

        // Flexible vehicle charging.
        if let Some(envs) = &d.ev_flex {
            need_days("flexible charging")?;
            if envs.len() != days {
                return Err(Error::Formulation(format!("{id} has {} charging envelopes, expected {days}", envs.len())));
            }
            for (m, env) in envs.iter().enumerate() {
                let mut terms = Vec::new();
                for h in env.window.start..=env.window.end {
                    let t = m * HOURS_PER_DAY + h;
                    let k = b.col(VarKey::hourly(Symbol::DVehFlex, i, t), 0.0, f64::INFINITY, 0.0);
                    let (mut row, rhs) = (vec![(k, 1.0)], if free { 0.0 } else { env.hourly_cap });
                    if free {
                        row.push((p_veh, -env.hourly_cap));
                    }
                    b.row(RowTag::EvFlexHourly, format!("ev_max[{id},{t}]"), row, Relation::Le, rhs);
                    supply[i][t].push((k, -1.0));
                    terms.push((k, 1.0));
                }
                let rhs = if free {
                    terms.push((p_veh, -env.requirement));
                    0.0
                } else {
                    env.requirement
                };
                b.row(RowTag::EvFlexDaily, format!("ev_daily[{id},{m}]"), terms, Relation::Eq, rhs);
            }
        }
    }

    if !offshore_new.is_empty() {
        if offshore_existing > network.offshore_cap_total {
            log::warn!("existing offshore wind {offshore_existing} exceeds the regional maximum {}", network.offshore_cap_total);
        }
        let terms = offshore_new.iter().map(|&k| (k, 1.0)).collect();
        let rhs = (network.offshore_cap_total - offshore_existing).max(0.0);
        b.row(RowTag::OffshoreCap, "offshore_max".into(), terms, Relation::Le, rhs);
    }

    // Transmission: arc 2k runs from -> to, arc 2k+1 runs to -> from.
    let loss = params.tx_loss;
    for (k, iface) in network.interfaces.iter().enumerate() {
        let idx = |id: &str| {
            network
                .node_index(id)
                .ok_or_else(|| Error::Formulation(format!("interface {} references unknown node {id}", iface.id())))
        };
        let (from, to) = (idx(&iface.from)?, idx(&iface.to)?);
        let x = VarKey::capacity(Symbol::XTx, k);
        if let Some(cap) = costs.interface(&iface.id()).and_then(|c| c.cap_tx.map(|v| (v, c.omf_tx))) {
            let annual = params.transmission_annualization()? * cap.0 * iface.distance_mi + cap.1;
            b.col(x, 0.0, f64::INFINITY, n_years * annual);
        }
        for (arc, (src, dst, limit)) in [(from, to, iface.forward_limit), (to, from, iface.reverse_limit)].into_iter().enumerate() {
            let a = 2 * k + arc;
            for t in 0..hours {
                let z = b.col(VarKey::hourly(Symbol::Z, a, t), 0.0, f64::INFINITY, costs.nominal_transmission);
                let mut terms = vec![(z, 1.0)];
                if b.has(x) {
                    terms.push((x, -1.0));
                }
                let name = format!("tx_limit[{}>{},{t}]", network.nodes[src].id, network.nodes[dst].id);
                b.row(RowTag::TxLimit, name, terms, Relation::Le, limit);
                supply[dst][t].push((z, 1.0 - loss));
                supply[src][t].push((z, -1.0));
            }
        }
    }

    // Energy balance; its slack is curtailment.
    for (i, node) in network.nodes.iter().enumerate() {
        let id = node.id.as_str();
        let d = inp.demand.node(id)?;
        for t in 0..hours {
            let mut terms = std::mem::take(&mut supply[i][t]);
            let mut rhs = d.elec[t] - constant[i][t];
            if free {
                terms.push((p_heat, -d.heat[t]));
                terms.push((p_veh, -d.veh_fixed[t]));
            } else {
                rhs += d.heat[t] + d.veh_fixed[t];
            }
            b.row(RowTag::EnergyBalance, format!("balance[{id},{t}]"), terms, Relation::Ge, rhs);
        }
    }

    // Policy rows.
    let served = ServedDemand::from_inputs(inp)?;
    let hourly_keys = |syms: &[Symbol]| -> Vec<VarKey> {
        let mut keys = Vec::new();
        for i in 0..network.nodes.len() {
            for &s in syms {
                keys.extend((0..hours).map(|t| VarKey::hourly(s, i, t)));
            }
        }
        keys
    };
    let fossil = hourly_keys(&[Symbol::GExisting, Symbol::GNew, Symbol::L]);
    let imports = hourly_keys(&[Symbol::V]);
    let share_row = |b: &mut Builder, tag: RowTag, name: &str, target: f64, constant_lhs: f64| {
        let k = 1.0 - target;
        let mut terms: Vec<(VarKey, f64)> = fossil.iter().filter(|&&key| b.has(key)).map(|&key| (key, 1.0)).collect();
        terms.extend(imports.iter().filter(|&&key| b.has(key)).map(|&key| (key, k)));
        if free {
            terms.push((p_heat, -k * served.per_p_heat));
            terms.push((p_veh, -k * served.per_p_veh));
        }
        b.row(tag, name.to_string(), terms, Relation::Le, k * served.constant - constant_lhs);
    };
    if let Some(lcp) = config.lcp.filter(|&v| v > 0.0) {
        share_row(&mut b, RowTag::LowCarbon, "low_carbon_share", lcp, 0.0);
    }
    if let Some(rgt) = config.rgt {
        if config.lcp.is_some_and(|lcp| rgt > lcp) {
            log::warn!("renewable target {rgt} exceeds the low-carbon target and dominates it");
        }
        share_row(&mut b, RowTag::Renewable, "renewable_share", rgt, total_nuclear);
    }
    if config.omega.is_some() {
        let coef = electricity_coefficients(inp.emissions, params, network, n_years)?;
        let budget = ghg_budget(inp)?;
        let mut terms = Vec::new();
        for (i, imp) in coef.imports.iter().enumerate() {
            for t in 0..hours {
                for (key, a) in [
                    (VarKey::hourly(Symbol::GExisting, i, t), coef.g_existing),
                    (VarKey::hourly(Symbol::GNew, i, t), coef.g_new),
                    (VarKey::hourly(Symbol::V, i, t), *imp),
                ] {
                    if b.has(key) && a != 0.0 {
                        terms.push((key, a));
                    }
                }
            }
        }
        if free {
            terms.push((p_heat, -budget.heat_coef));
            terms.push((p_veh, -budget.veh_coef));
        }
        b.row(RowTag::Ghg, "ghg_cap".into(), terms, Relation::Le, budget.cap - budget.fixed);
    }

    b.offsets.push(("existing_capacity", existing_capacity_cost));
    b.offsets.push(("fixed_hydro_energy", fixed_hydro_cost));
    b.offsets.push(("nuclear_energy", nuclear_cost));
    b.finish(network)
}
