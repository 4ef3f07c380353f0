//! Domain types shared by every stage of the model, input validation, and
//! capital cost annualization.
//!
//! Units: power in MW and energy in MWh on a one-hour grid, so an hourly
//! energy value and the average power over that hour are the same number.
//! Cost inputs keep the units they are quoted in (`$/kW`, `$/kW-yr`,
//! `$/MWh`, ...); [`NodeCosts`] exposes per-MW accessors that perform the
//! single `kW -> MW` conversion used by the formulation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_DAY: usize = 24;
pub const HOURS_PER_YEAR: usize = 8760;
/// Heat content of one MWh expressed in MMBTU.
pub const MMBTU_PER_MWH: f64 = 3.412;
pub const KW_PER_MW: f64 = 1000.0;
/// Slack allowed on generation potentials above 1 MWh/MW.
pub const POTENTIAL_TOLERANCE: f64 = 1e-9;

/// Capital recovery factor for a `years`-long annualization period at
/// interest `rate`. Falls back to the zero-interest limit `1/years`.
pub fn annualization_rate(years: u32, rate: f64) -> Result<f64> {
    if years < 1 {
        return Err(Error::InvalidParameter(format!(
            "annualization period must be at least one year, got {years}"
        )));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "interest rate must be finite and non-negative, got {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(1.0 / f64::from(years));
    }
    let growth = (1.0 + rate).powi(years as i32);
    Ok(rate * growth / (growth - 1.0))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExistingCapacity {
    pub onshore_wind: f64,
    pub offshore_wind: f64,
    pub utility_solar: f64,
    pub btm_solar: f64,
    pub gas: f64,
    pub hydro_fixed: f64,
    pub hydro_flexible: f64,
    pub nuclear: f64,
    pub biofuel: f64,
    pub battery_energy: f64,
    pub battery_power: f64,
}

impl ExistingCapacity {
    fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("onshore_wind", self.onshore_wind),
            ("offshore_wind", self.offshore_wind),
            ("utility_solar", self.utility_solar),
            ("btm_solar", self.btm_solar),
            ("gas", self.gas),
            ("hydro_fixed", self.hydro_fixed),
            ("hydro_flexible", self.hydro_flexible),
            ("nuclear", self.nuclear),
            ("biofuel", self.biofuel),
            ("battery_energy", self.battery_energy),
            ("battery_power", self.battery_power),
        ]
    }

    pub fn hydro(&self) -> f64 {
        self.hydro_fixed + self.hydro_flexible
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default)]
    pub existing: ExistingCapacity,
    /// Onshore wind resource cap, existing capacity included.
    #[serde(default)]
    pub onshore_max: f64,
    /// Utility-scale solar resource cap, existing capacity included.
    #[serde(default)]
    pub utility_solar_max: f64,
    /// Hourly interregional import limit (MWh/h).
    #[serde(default)]
    pub import_max: f64,
    /// Hourly output cap of flexible hydro (MWh).
    #[serde(default)]
    pub hydro_flex_max: f64,
    /// Share of monthly hydro treated as fixed (must-run).
    #[serde(default)]
    pub hydro_fixed_fraction: f64,
    /// Average daily biofuel generation (MWh).
    #[serde(default)]
    pub biofuel_daily: f64,
    /// Share of statewide behind-the-meter solar sited at this node.
    #[serde(default)]
    pub btm_share: f64,
    /// Historical annual transmission flow billed at the existing rate (MWh/yr).
    #[serde(default)]
    pub existing_tx_flow: f64,
}

impl NodeSpec {
    pub fn new(id: impl Into<String>) -> Self {
        NodeSpec {
            id: id.into(),
            existing: ExistingCapacity::default(),
            onshore_max: 0.0,
            utility_solar_max: 0.0,
            import_max: 0.0,
            hydro_flex_max: 0.0,
            hydro_fixed_fraction: 0.0,
            biofuel_daily: 0.0,
            btm_share: 0.0,
            existing_tx_flow: 0.0,
        }
    }
}

/// A transmission interface between two nodes with direction-specific
/// existing limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub from: String,
    pub to: String,
    /// Existing limit for flow `from -> to` (MW).
    pub forward_limit: f64,
    /// Existing limit for flow `to -> from` (MW).
    pub reverse_limit: f64,
    pub distance_mi: f64,
}

impl InterfaceSpec {
    pub fn id(&self) -> String {
        format!("{}-{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceSpec>,
    /// Regional offshore wind cap, existing capacity included (MW).
    #[serde(default)]
    pub offshore_cap_total: f64,
}

impl NetworkSpec {
    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }
}

/// Capacity decisions that carry a capital cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CapacityTech {
    OnshoreWind,
    OffshoreWind,
    UtilitySolar,
    BatteryEnergy,
    BatteryPower,
    H2Energy,
    H2Power,
    NewGas,
}

/// Per-node costs in the units they are usually quoted in.
/// `None` marks a technology that may not be built at the node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodeCosts {
    /// $/kW
    pub cap_on: Option<f64>,
    /// $/kW
    pub cap_off: Option<f64>,
    /// $/kW
    pub cap_us_solar: Option<f64>,
    /// $/kWh
    pub cap_batt_e: Option<f64>,
    /// $/kW
    pub cap_batt_p: Option<f64>,
    /// $/kWh
    pub cap_h2_e: Option<f64>,
    /// $/kW
    pub cap_h2_p: Option<f64>,
    /// $/kW
    pub cap_ff: Option<f64>,
    /// $/kW-yr
    pub omf_on: f64,
    pub omf_off: f64,
    pub omf_us_solar: f64,
    pub omf_ff: f64,
    pub omf_h2: f64,
    /// $/MWh
    pub omv_ff: f64,
    /// $/MMBTU
    pub c_ff: Option<f64>,
    /// $/MWh
    pub c_hydro: Option<f64>,
    pub c_nuc: Option<f64>,
    pub c_bio: Option<f64>,
    pub c_imp: Option<f64>,
    /// $/MW-h of ramp
    pub c_existing_ramp: f64,
    pub c_new_ramp: f64,
    /// $/kW-yr on eligible existing capacity
    pub ex_cap: f64,
    /// $/MWh on historical transmission flow
    pub ex_tx: f64,
}

impl NodeCosts {
    /// Overnight capital cost per MW (or per MWh for energy capacity).
    pub fn capital_per_mw(&self, tech: CapacityTech) -> Option<f64> {
        let raw = match tech {
            CapacityTech::OnshoreWind => self.cap_on,
            CapacityTech::OffshoreWind => self.cap_off,
            CapacityTech::UtilitySolar => self.cap_us_solar,
            CapacityTech::BatteryEnergy => self.cap_batt_e,
            CapacityTech::BatteryPower => self.cap_batt_p,
            CapacityTech::H2Energy => self.cap_h2_e,
            CapacityTech::H2Power => self.cap_h2_p,
            CapacityTech::NewGas => self.cap_ff,
        };
        raw.map(|v| v * KW_PER_MW)
    }

    /// Fixed O&M per MW-yr.
    pub fn fixed_om_per_mw(&self, tech: CapacityTech) -> f64 {
        let raw = match tech {
            CapacityTech::OnshoreWind => self.omf_on,
            CapacityTech::OffshoreWind => self.omf_off,
            CapacityTech::UtilitySolar => self.omf_us_solar,
            CapacityTech::NewGas => self.omf_ff,
            CapacityTech::H2Power => self.omf_h2,
            CapacityTech::BatteryEnergy | CapacityTech::BatteryPower | CapacityTech::H2Energy => 0.0,
        };
        raw * KW_PER_MW
    }

    pub fn existing_capacity_per_mw(&self) -> f64 {
        self.ex_cap * KW_PER_MW
    }

    fn entries(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("cap_on", self.cap_on),
            ("cap_off", self.cap_off),
            ("cap_us_solar", self.cap_us_solar),
            ("cap_batt_e", self.cap_batt_e),
            ("cap_batt_p", self.cap_batt_p),
            ("cap_h2_e", self.cap_h2_e),
            ("cap_h2_p", self.cap_h2_p),
            ("cap_ff", self.cap_ff),
            ("omf_on", Some(self.omf_on)),
            ("omf_off", Some(self.omf_off)),
            ("omf_us_solar", Some(self.omf_us_solar)),
            ("omf_ff", Some(self.omf_ff)),
            ("omf_h2", Some(self.omf_h2)),
            ("omv_ff", Some(self.omv_ff)),
            ("c_ff", self.c_ff),
            ("c_hydro", self.c_hydro),
            ("c_nuc", self.c_nuc),
            ("c_bio", self.c_bio),
            ("c_imp", self.c_imp),
            ("c_existing_ramp", Some(self.c_existing_ramp)),
            ("c_new_ramp", Some(self.c_new_ramp)),
            ("ex_cap", Some(self.ex_cap)),
            ("ex_tx", Some(self.ex_tx)),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterfaceCosts {
    /// Upgrade cost in $/MW-mi; `None` forbids new capacity on the interface.
    pub cap_tx: Option<f64>,
    /// $/MW-yr
    pub omf_tx: f64,
}

fn default_nominal() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub nodes: BTreeMap<String, NodeCosts>,
    #[serde(default)]
    pub interfaces: BTreeMap<String, InterfaceCosts>,
    /// $/MWh charged on storage charge and discharge.
    #[serde(default = "default_nominal")]
    pub nominal_storage: f64,
    /// $/MWh charged on internodal flow.
    #[serde(default = "default_nominal")]
    pub nominal_transmission: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            nodes: BTreeMap::new(),
            interfaces: BTreeMap::new(),
            nominal_storage: default_nominal(),
            nominal_transmission: default_nominal(),
        }
    }
}

impl CostTable {
    pub fn node(&self, id: &str) -> Result<&NodeCosts> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::Formulation(format!("no cost entry for node {id}")))
    }

    pub fn interface(&self, id: &str) -> Option<&InterfaceCosts> {
        self.interfaces.get(id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualizationPeriods {
    pub onshore_wind: u32,
    pub offshore_wind: u32,
    pub utility_solar: u32,
    pub battery: u32,
    pub h2: u32,
    pub new_gas: u32,
    pub transmission: u32,
}

impl Default for AnnualizationPeriods {
    fn default() -> Self {
        AnnualizationPeriods {
            onshore_wind: 20,
            offshore_wind: 20,
            utility_solar: 20,
            battery: 10,
            h2: 10,
            new_gas: 20,
            transmission: 20,
        }
    }
}

impl AnnualizationPeriods {
    pub fn for_tech(&self, tech: CapacityTech) -> u32 {
        match tech {
            CapacityTech::OnshoreWind => self.onshore_wind,
            CapacityTech::OffshoreWind => self.offshore_wind,
            CapacityTech::UtilitySolar => self.utility_solar,
            CapacityTech::BatteryEnergy | CapacityTech::BatteryPower => self.battery,
            CapacityTech::H2Energy | CapacityTech::H2Power => self.h2,
            CapacityTech::NewGas => self.new_gas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TechParams {
    pub eta_ff_existing: f64,
    pub eta_ff_new: f64,
    pub eta_batt: f64,
    pub eta_h2: f64,
    pub eta_veh: f64,
    /// Hourly self-discharge fraction of stored energy.
    pub kappa: f64,
    /// Transmission loss fraction.
    pub tx_loss: f64,
    /// Fossil capacity reserve margin.
    pub reserve_margin: f64,
    /// Battery power-to-energy ratio bounds (1/h).
    pub phi_batt_min: f64,
    pub phi_batt_max: f64,
    pub periods: AnnualizationPeriods,
    pub interest_rate: f64,
    /// Length of the analysis in years; derived from the horizon when absent.
    pub n_years: Option<f64>,
}

impl Default for TechParams {
    fn default() -> Self {
        TechParams {
            eta_ff_existing: 0.428,
            eta_ff_new: 0.344,
            eta_batt: 0.946,
            eta_h2: 0.592,
            eta_veh: 1.0,
            kappa: 0.001,
            tx_loss: 0.03,
            reserve_margin: 0.189,
            phi_batt_min: 0.25,
            phi_batt_max: 0.25,
            periods: AnnualizationPeriods::default(),
            interest_rate: 0.05,
            n_years: None,
        }
    }
}

impl TechParams {
    pub fn years_for(&self, hours: usize) -> f64 {
        self.n_years
            .unwrap_or(hours as f64 / HOURS_PER_YEAR as f64)
    }

    pub fn annualization(&self, tech: CapacityTech) -> Result<f64> {
        annualization_rate(self.periods.for_tech(tech), self.interest_rate)
    }

    pub fn transmission_annualization(&self) -> Result<f64> {
        annualization_rate(self.periods.transmission, self.interest_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Hourly,
    Daily,
    Monthly,
}

/// Every input series the model understands. The serialized name doubles as
/// the CSV file stem of the input bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    DemandElec,
    HeatFull,
    VehFull,
    VehDailyFull,
    WindOnshore,
    WindOffshore,
    UtilitySolar,
    BtmSolar,
    HydroFixed,
    HydroFlexDaily,
    Nuclear,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 11] = [
        SeriesKind::DemandElec,
        SeriesKind::HeatFull,
        SeriesKind::VehFull,
        SeriesKind::VehDailyFull,
        SeriesKind::WindOnshore,
        SeriesKind::WindOffshore,
        SeriesKind::UtilitySolar,
        SeriesKind::BtmSolar,
        SeriesKind::HydroFixed,
        SeriesKind::HydroFlexDaily,
        SeriesKind::Nuclear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::DemandElec => "demand_elec",
            SeriesKind::HeatFull => "heat_full",
            SeriesKind::VehFull => "veh_full",
            SeriesKind::VehDailyFull => "veh_daily_full",
            SeriesKind::WindOnshore => "wind_onshore",
            SeriesKind::WindOffshore => "wind_offshore",
            SeriesKind::UtilitySolar => "utility_solar",
            SeriesKind::BtmSolar => "btm_solar",
            SeriesKind::HydroFixed => "hydro_fixed",
            SeriesKind::HydroFlexDaily => "hydro_flex_daily",
            SeriesKind::Nuclear => "nuclear",
        }
    }

    pub fn from_name(name: &str) -> Option<SeriesKind> {
        SeriesKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn resolution(self) -> Resolution {
        match self {
            SeriesKind::VehDailyFull | SeriesKind::HydroFlexDaily => Resolution::Daily,
            _ => Resolution::Hourly,
        }
    }

    /// Generation potential per MW installed, bounded by one.
    pub fn is_potential(self) -> bool {
        matches!(
            self,
            SeriesKind::WindOnshore
                | SeriesKind::WindOffshore
                | SeriesKind::UtilitySolar
                | SeriesKind::BtmSolar
        )
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hourly (and a few daily or monthly) input series keyed by node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeriesSet {
    pub hours: usize,
    pub series: BTreeMap<SeriesKind, BTreeMap<String, Vec<f64>>>,
    /// Monthly total hydro generation per node (MWh), consumed by resource prep.
    pub hydro_monthly: BTreeMap<String, Vec<f64>>,
}

impl TimeSeriesSet {
    pub fn new(hours: usize) -> Self {
        TimeSeriesSet {
            hours,
            ..Default::default()
        }
    }

    pub fn days(&self) -> usize {
        self.hours / HOURS_PER_DAY
    }

    pub fn insert(&mut self, kind: SeriesKind, node: impl Into<String>, values: Vec<f64>) {
        self.series
            .entry(kind)
            .or_default()
            .insert(node.into(), values);
    }

    pub fn get(&self, kind: SeriesKind, node: &str) -> Option<&[f64]> {
        self.series
            .get(&kind)
            .and_then(|m| m.get(node))
            .map(Vec::as_slice)
    }

    /// Value at index `t`, or zero when the series is absent.
    pub fn at(&self, kind: SeriesKind, node: &str, t: usize) -> f64 {
        self.get(kind, node).map_or(0.0, |s| s[t])
    }

    pub fn expected_len(&self, kind: SeriesKind) -> usize {
        match kind.resolution() {
            Resolution::Hourly => self.hours,
            Resolution::Daily => self.days(),
            Resolution::Monthly => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioMode {
    /// Low-carbon percent and electrification fixed; emissions follow.
    #[serde(rename = "lcp+hve")]
    LcpHve,
    /// Emissions target and electrification fixed; low-carbon share follows.
    #[serde(rename = "ghg+hve")]
    GhgHve,
    /// Emissions target and low-carbon percent fixed; electrification is chosen.
    #[serde(rename = "ghg+lcp")]
    GhgLcp,
    /// Emissions target fixed; electrification searched for the lowest LCOE.
    #[serde(rename = "min-lcoe")]
    MinLcoe,
}

impl fmt::Display for ScenarioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioMode::LcpHve => "lcp+hve",
            ScenarioMode::GhgHve => "ghg+hve",
            ScenarioMode::GhgLcp => "ghg+lcp",
            ScenarioMode::MinLcoe => "min-lcoe",
        })
    }
}

/// An electrification rate given either statewide or per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fraction {
    Uniform(f64),
    PerNode(BTreeMap<String, f64>),
}

impl Fraction {
    pub fn value_for(&self, node: &str) -> Result<f64> {
        match self {
            Fraction::Uniform(v) => Ok(*v),
            Fraction::PerNode(m) => m.get(node).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("no electrification rate for node {node}"))
            }),
        }
    }

    /// Unweighted mean over the given nodes.
    pub fn mean<'a>(&self, nodes: impl Iterator<Item = &'a str>) -> Result<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for node in nodes {
            sum += self.value_for(node)?;
            n += 1;
        }
        Ok(if n == 0 { 0.0 } else { sum / n as f64 })
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Fraction::Uniform(v) => vec![*v],
            Fraction::PerNode(m) => m.values().copied().collect(),
        }
    }
}

fn default_min_hours() -> u32 {
    4
}

/// Flexible electric-vehicle charging settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvFlexConfig {
    /// Share of the daily vehicle requirement that may be scheduled freely.
    pub flexible_fraction: f64,
    /// First hour of the day at which charging may occur.
    pub start_hour: u32,
    /// Last hour of the day at which charging may occur (inclusive).
    pub end_hour: u32,
    /// Shortest time over which the flexible requirement may be delivered.
    #[serde(default = "default_min_hours")]
    pub min_hours: u32,
}

fn default_true() -> bool {
    true
}

fn default_hve_max() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: ScenarioMode,
    #[serde(default)]
    pub lcp: Option<f64>,
    #[serde(default)]
    pub p_heat: Option<Fraction>,
    #[serde(default)]
    pub p_veh: Option<Fraction>,
    #[serde(default)]
    pub omega: Option<f64>,
    /// Renewable generation target (excludes nuclear from the clean share).
    #[serde(default)]
    pub rgt: Option<f64>,
    #[serde(default = "default_true")]
    pub include_nuclear: bool,
    #[serde(default)]
    pub include_h2: bool,
    #[serde(default)]
    pub ev_flex: Option<EvFlexConfig>,
    /// Calendar year used to project behind-the-meter solar capacity.
    #[serde(default)]
    pub btm_year: Option<i32>,
    /// Electrification range explored by the LCOE search.
    #[serde(default)]
    pub hve_min: f64,
    #[serde(default = "default_hve_max")]
    pub hve_max: f64,
}

impl ScenarioConfig {
    fn base(mode: ScenarioMode) -> Self {
        ScenarioConfig {
            mode,
            lcp: None,
            p_heat: None,
            p_veh: None,
            omega: None,
            rgt: None,
            include_nuclear: true,
            include_h2: false,
            ev_flex: None,
            btm_year: None,
            hve_min: 0.0,
            hve_max: 1.0,
        }
    }

    pub fn lcp_hve(lcp: f64, hve: f64) -> Self {
        ScenarioConfig {
            lcp: Some(lcp),
            p_heat: Some(Fraction::Uniform(hve)),
            p_veh: Some(Fraction::Uniform(hve)),
            ..Self::base(ScenarioMode::LcpHve)
        }
    }

    pub fn ghg_hve(omega: f64, hve: f64) -> Self {
        ScenarioConfig {
            omega: Some(omega),
            p_heat: Some(Fraction::Uniform(hve)),
            p_veh: Some(Fraction::Uniform(hve)),
            ..Self::base(ScenarioMode::GhgHve)
        }
    }

    pub fn ghg_lcp(omega: f64, lcp: f64) -> Self {
        ScenarioConfig {
            omega: Some(omega),
            lcp: Some(lcp),
            ..Self::base(ScenarioMode::GhgLcp)
        }
    }

    pub fn min_lcoe(omega: f64) -> Self {
        ScenarioConfig {
            omega: Some(omega),
            ..Self::base(ScenarioMode::MinLcoe)
        }
    }

    /// Same settings with a uniform electrification rate.
    pub fn with_hve(&self, hve: f64) -> Self {
        ScenarioConfig {
            p_heat: Some(Fraction::Uniform(hve)),
            p_veh: Some(Fraction::Uniform(hve)),
            ..self.clone()
        }
    }

    /// Electrification enters the LP as decision columns.
    pub fn electrification_free(&self) -> bool {
        self.mode == ScenarioMode::GhgLcp
    }

    /// Checks the two-of-three configuration rule and parameter ranges.
    pub fn check(&self) -> Result<()> {
        let fixed_p = self.p_heat.is_some() && self.p_veh.is_some();
        let any_p = self.p_heat.is_some() || self.p_veh.is_some();
        let lcp = self.lcp.is_some();
        let ghg = self.omega.is_some();
        let ok = match self.mode {
            ScenarioMode::LcpHve => lcp && fixed_p && !ghg,
            ScenarioMode::GhgHve => ghg && fixed_p && !lcp,
            ScenarioMode::GhgLcp => ghg && lcp && !any_p,
            ScenarioMode::MinLcoe => ghg && !lcp && !any_p,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "mode {} requires exactly its two configuration parameters \
                 (lcp set: {lcp}, electrification set: {any_p}, omega set: {ghg})",
                self.mode
            )));
        }
        let mut fractions: Vec<(&str, f64)> = Vec::new();
        if let Some(v) = self.lcp {
            fractions.push(("lcp", v));
        }
        if let Some(v) = self.rgt {
            fractions.push(("rgt", v));
        }
        for (name, p) in [("p_heat", &self.p_heat), ("p_veh", &self.p_veh)] {
            if let Some(p) = p {
                fractions.extend(p.values().into_iter().map(|v| (name, v)));
            }
        }
        fractions.push(("hve_min", self.hve_min));
        fractions.push(("hve_max", self.hve_max));
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.hve_min > self.hve_max {
            return Err(Error::InvalidParameter("hve_min exceeds hve_max".into()));
        }
        // Negative targets are allowed: they leave the emissions cap slack.
        if let Some(w) = self.omega {
            if !w.is_finite() || w > 1.0 {
                return Err(Error::InvalidParameter(format!("omega = {w} must be finite and at most 1")));
            }
        }
        if let Some(ev) = &self.ev_flex {
            if !(0.0..=1.0).contains(&ev.flexible_fraction) {
                return Err(Error::InvalidParameter("flexible EV fraction outside [0, 1]".into()));
            }
            if ev.start_hour > ev.end_hour || ev.end_hour >= HOURS_PER_DAY as u32 {
                return Err(Error::InvalidParameter(format!(
                    "charging window {}..{} must satisfy start <= end < 24",
                    ev.start_hour, ev.end_hour
                )));
            }
            if ev.min_hours < 1 {
                return Err(Error::InvalidParameter("min charging hours must be >= 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DuplicateNode,
    UnknownNode,
    SelfLoop,
    NegativeValue,
    NonFiniteValue,
    NonPositiveDistance,
    HydroCapWithoutCapacity,
    MissingSeries,
    LengthMismatch,
    PotentialExceedsUnity,
    MissingCost,
    FractionOutOfRange,
    InvalidRatioBounds,
    InvalidPeriod,
    HorizonMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.0.push(Violation { kind, detail });
    }

    fn nonnegative(&mut self, what: &str, value: f64) {
        if !value.is_finite() {
            self.push(ViolationKind::NonFiniteValue, format!("{what} = {value}"));
        } else if value < 0.0 {
            self.push(ViolationKind::NegativeValue, format!("{what} = {value}"));
        }
    }

    fn fraction(&mut self, what: &str, value: f64) {
        if !(0.0..=1.0).contains(&value) {
            self.push(ViolationKind::FractionOutOfRange, format!("{what} = {value}"));
        }
    }
}

/// Checks every input invariant and returns the violations found.
/// An empty list means the inputs are ready to be formulated.
pub fn validate(
    network: &NetworkSpec,
    series: &TimeSeriesSet,
    costs: &CostTable,
    params: &TechParams,
) -> Vec<Violation> {
    let mut r = Report(Vec::new());

    let mut seen = BTreeSet::new();
    for node in &network.nodes {
        if !seen.insert(node.id.as_str()) {
            r.push(ViolationKind::DuplicateNode, node.id.clone());
        }
        for (name, v) in node.existing.fields() {
            r.nonnegative(&format!("{}.existing.{name}", node.id), v);
        }
        for (name, v) in [
            ("onshore_max", node.onshore_max),
            ("utility_solar_max", node.utility_solar_max),
            ("import_max", node.import_max),
            ("hydro_flex_max", node.hydro_flex_max),
            ("biofuel_daily", node.biofuel_daily),
            ("existing_tx_flow", node.existing_tx_flow),
        ] {
            r.nonnegative(&format!("{}.{name}", node.id), v);
        }
        r.fraction(&format!("{}.hydro_fixed_fraction", node.id), node.hydro_fixed_fraction);
        r.fraction(&format!("{}.btm_share", node.id), node.btm_share);
        if node.hydro_flex_max > 0.0 && node.existing.hydro_flexible <= 0.0 {
            r.push(
                ViolationKind::HydroCapWithoutCapacity,
                format!("{} has a flexible hydro cap but no flexible hydro capacity", node.id),
            );
        }
    }
    r.nonnegative("offshore_cap_total", network.offshore_cap_total);

    for itf in &network.interfaces {
        for end in [&itf.from, &itf.to] {
            if !seen.contains(end.as_str()) {
                r.push(ViolationKind::UnknownNode, format!("interface {} references {end}", itf.id()));
            }
        }
        if itf.from == itf.to {
            r.push(ViolationKind::SelfLoop, itf.id());
        }
        r.nonnegative(&format!("{}.forward_limit", itf.id()), itf.forward_limit);
        r.nonnegative(&format!("{}.reverse_limit", itf.id()), itf.reverse_limit);
        if !(itf.distance_mi > 0.0) {
            r.push(ViolationKind::NonPositiveDistance, format!("{} distance {}", itf.id(), itf.distance_mi));
        }
    }

    if series.hours == 0 || series.hours % HOURS_PER_DAY != 0 {
        r.push(
            ViolationKind::HorizonMismatch,
            format!("horizon of {} hours is not a positive multiple of 24", series.hours),
        );
    }
    if let Some(years) = params.n_years {
        let implied = years * HOURS_PER_YEAR as f64;
        if (implied - series.hours as f64).abs() > HOURS_PER_DAY as f64 {
            r.push(
                ViolationKind::HorizonMismatch,
                format!("n_years = {years} disagrees with a horizon of {} hours", series.hours),
            );
        }
    }
    for node in &network.nodes {
        if series.get(SeriesKind::DemandElec, &node.id).is_none() {
            r.push(ViolationKind::MissingSeries, format!("{} for {}", SeriesKind::DemandElec, node.id));
        }
    }
    for (kind, by_node) in &series.series {
        let expected = series.expected_len(*kind);
        for (node, values) in by_node {
            if !seen.contains(node.as_str()) {
                r.push(ViolationKind::UnknownNode, format!("series {kind} references {node}"));
            }
            if values.len() != expected {
                r.push(
                    ViolationKind::LengthMismatch,
                    format!("{kind} for {node} has {} values, expected {expected}", values.len()),
                );
            }
            if let Some((t, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                r.push(ViolationKind::NonFiniteValue, format!("{kind} for {node} at {t} is {v}"));
            } else if let Some((t, v)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
                r.push(ViolationKind::NegativeValue, format!("{kind} for {node} at {t} is {v}"));
            }
            if kind.is_potential() {
                if let Some((t, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| **v > 1.0 + POTENTIAL_TOLERANCE)
                {
                    r.push(
                        ViolationKind::PotentialExceedsUnity,
                        format!("{kind} for {node} at {t} is {v}"),
                    );
                }
            }
        }
    }
    for (node, values) in &series.hydro_monthly {
        if !seen.contains(node.as_str()) {
            r.push(ViolationKind::UnknownNode, format!("monthly hydro references {node}"));
        }
        for (m, v) in values.iter().enumerate() {
            r.nonnegative(&format!("hydro_monthly {node} month {m}"), *v);
        }
    }

    for node in &network.nodes {
        let Some(c) = costs.nodes.get(&node.id) else {
            r.push(ViolationKind::MissingCost, format!("no cost entry for node {}", node.id));
            continue;
        };
        for (name, v) in c.entries() {
            if let Some(v) = v {
                r.nonnegative(&format!("{}.{name}", node.id), v);
            }
        }
        let e = &node.existing;
        let needs = [
            (e.gas > 0.0 || c.cap_ff.is_some(), "c_ff", c.c_ff),
            (e.hydro() > 0.0, "c_hydro", c.c_hydro),
            (e.nuclear > 0.0, "c_nuc", c.c_nuc),
            (e.biofuel > 0.0, "c_bio", c.c_bio),
            (node.import_max > 0.0, "c_imp", c.c_imp),
        ];
        for (required, name, value) in needs {
            if required && value.is_none() {
                r.push(ViolationKind::MissingCost, format!("{}.{name}", node.id));
            }
        }
    }
    for (id, c) in &costs.interfaces {
        if let Some(v) = c.cap_tx {
            r.nonnegative(&format!("{id}.cap_tx"), v);
        }
        r.nonnegative(&format!("{id}.omf_tx"), c.omf_tx);
    }
    r.nonnegative("nominal_storage", costs.nominal_storage);
    r.nonnegative("nominal_transmission", costs.nominal_transmission);

    for (name, v) in [
        ("eta_ff_existing", params.eta_ff_existing),
        ("eta_ff_new", params.eta_ff_new),
        ("eta_batt", params.eta_batt),
        ("eta_h2", params.eta_h2),
        ("eta_veh", params.eta_veh),
        ("kappa", params.kappa),
        ("tx_loss", params.tx_loss),
        ("reserve_margin", params.reserve_margin),
    ] {
        r.fraction(name, v);
    }
    for (name, v) in [
        ("eta_ff_existing", params.eta_ff_existing),
        ("eta_ff_new", params.eta_ff_new),
        ("eta_batt", params.eta_batt),
        ("eta_h2", params.eta_h2),
        ("eta_veh", params.eta_veh),
    ] {
        if v <= 0.0 {
            r.push(ViolationKind::FractionOutOfRange, format!("{name} must be positive"));
        }
    }
    r.nonnegative("phi_batt_min", params.phi_batt_min);
    r.nonnegative("phi_batt_max", params.phi_batt_max);
    if params.phi_batt_min > params.phi_batt_max {
        r.push(
            ViolationKind::InvalidRatioBounds,
            format!("phi_batt_min {} > phi_batt_max {}", params.phi_batt_min, params.phi_batt_max),
        );
    }
    let p = &params.periods;
    for (name, years) in [
        ("onshore_wind", p.onshore_wind),
        ("offshore_wind", p.offshore_wind),
        ("utility_solar", p.utility_solar),
        ("battery", p.battery),
        ("h2", p.h2),
        ("new_gas", p.new_gas),
        ("transmission", p.transmission),
    ] {
        if years < 1 {
            r.push(ViolationKind::InvalidPeriod, format!("{name} period {years}"));
        }
    }
    r.nonnegative("interest_rate", params.interest_rate);

    r.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn annualization_examples() {
        let a = annualization_rate(20, 0.05).unwrap();
        assert!((a - 0.080_242_6).abs() < 1e-7, "{a}");
        assert!((annualization_rate(1, 0.05).unwrap() - 1.05).abs() < 1e-12);
        assert_eq!(annualization_rate(10, 0.0).unwrap(), 0.1);
        assert!(matches!(annualization_rate(0, 0.05), Err(Error::InvalidParameter(_))));
        assert!(annualization_rate(5, -0.01).is_err());
    }

    #[test]
    fn annualization_monotone_on_grid() {
        for years in 1..=40u32 {
            let mut prev = annualization_rate(years, 0.0).unwrap();
            for k in 1..=30 {
                let a = annualization_rate(years, k as f64 * 0.005).unwrap();
                assert!(a > prev, "not increasing in j at P={years}");
                prev = a;
            }
        }
        for k in 1..=30 {
            let j = k as f64 * 0.005;
            let mut prev = annualization_rate(1, j).unwrap();
            for years in 2..=40u32 {
                let a = annualization_rate(years, j).unwrap();
                assert!(a < prev, "not decreasing in P at j={j}");
                prev = a;
            }
        }
    }

    #[test]
    fn consistent_fixture_validates_clean() {
        let f = fixture::two_node_48h();
        let report = validate(&f.network, &f.series, &f.costs, &f.params);
        assert!(report.is_empty(), "{report:?}");
    }

    #[test]
    fn short_series_is_one_length_violation() {
        let mut f = fixture::two_node_48h();
        let node = f.network.nodes[0].id.clone();
        let mut s = f.series.get(SeriesKind::DemandElec, &node).unwrap().to_vec();
        s.pop();
        f.series.insert(SeriesKind::DemandElec, node, s);
        let report = validate(&f.network, &f.series, &f.costs, &f.params);
        assert_eq!(report.len(), 1, "{report:?}");
        assert_eq!(report[0].kind, ViolationKind::LengthMismatch);
    }

    #[test]
    fn potential_above_one_is_flagged() {
        let mut f = fixture::two_node_48h();
        let node = f.network.nodes[0].id.clone();
        let mut s = f.series.get(SeriesKind::WindOnshore, &node).unwrap().to_vec();
        s[3] = 1.5;
        f.series.insert(SeriesKind::WindOnshore, node, s);
        let report = validate(&f.network, &f.series, &f.costs, &f.params);
        assert_eq!(report.len(), 1, "{report:?}");
        assert_eq!(report[0].kind, ViolationKind::PotentialExceedsUnity);
    }

    #[test]
    fn structural_violations() {
        let mut f = fixture::two_node_48h();
        f.network.interfaces[0].distance_mi = 0.0;
        f.network.interfaces[0].to = "nowhere".into();
        f.network.nodes[1].existing.gas = -1.0;
        f.params.phi_batt_min = 0.5;
        let kinds: Vec<_> = validate(&f.network, &f.series, &f.costs, &f.params)
            .into_iter()
            .map(|v| v.kind)
            .collect();
        for k in [
            ViolationKind::NonPositiveDistance,
            ViolationKind::UnknownNode,
            ViolationKind::NegativeValue,
            ViolationKind::InvalidRatioBounds,
        ] {
            assert!(kinds.contains(&k), "missing {k:?} in {kinds:?}");
        }
    }

    #[test]
    fn validate_does_not_mutate_and_is_idempotent() {
        let f = fixture::two_node_48h();
        let before = f.clone();
        let a = validate(&f.network, &f.series, &f.costs, &f.params);
        let b = validate(&f.network, &f.series, &f.costs, &f.params);
        assert_eq!(a, b);
        assert_eq!(before.network, f.network);
        assert_eq!(before.series, f.series);
    }

    #[test]
    fn scenario_two_of_three_rule() {
        assert!(ScenarioConfig::lcp_hve(0.4, 0.2).check().is_ok());
        assert!(ScenarioConfig::ghg_hve(0.4, 0.2).check().is_ok());
        assert!(ScenarioConfig::ghg_lcp(0.4, 0.5).check().is_ok());
        assert!(ScenarioConfig::min_lcoe(0.4).check().is_ok());
        let mut c = ScenarioConfig::lcp_hve(0.4, 0.2);
        c.omega = Some(0.3);
        assert!(c.check().is_err());
        let mut c = ScenarioConfig::min_lcoe(0.4);
        c.lcp = Some(0.3);
        assert!(c.check().is_err());
        assert!(ScenarioConfig::lcp_hve(1.2, 0.2).check().is_err());
        let mut c = ScenarioConfig::lcp_hve(0.4, 0.2);
        c.ev_flex = Some(EvFlexConfig { flexible_fraction: 0.5, start_hour: 20, end_hour: 3, min_hours: 4 });
        assert!(c.check().is_err());
    }

    #[test]
    fn scenario_config_json_round_trip() {
        let json = r#"{"mode":"lcp+hve","lcp":0.4,"p_heat":0.2,"p_veh":{"A":0.1,"B":0.3}}"#;
        let c: ScenarioConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.p_heat, Some(Fraction::Uniform(0.2)));
        assert_eq!(c.p_veh.as_ref().unwrap().value_for("B").unwrap(), 0.3);
        assert!(c.include_nuclear);
        assert!(c.check().is_ok());
    }
}
