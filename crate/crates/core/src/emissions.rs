//! Greenhouse gas accounting in CO2-equivalent.
//!
//! Factors are in g/MJ; sector totals are in MMt CO2e per year. Dispatch
//! quantities are in MWh over the whole horizon and are annualized by the
//! number of years simulated.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpInstance, Symbol, VarKey};
use crate::model::{NetworkSpec, TechParams};

pub const MJ_PER_MWH: f64 = 3600.0;
pub const MJ_PER_MMBTU: f64 = 1055.056;
pub const MMT_PER_GRAM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fuel {
    Coal,
    Petroleum,
    NaturalGas,
}

impl std::str::FromStr for Fuel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coal" => Ok(Fuel::Coal),
            "petroleum" => Ok(Fuel::Petroleum),
            "natural_gas" | "natural-gas" | "gas" => Ok(Fuel::NaturalGas),
            other => Err(Error::InvalidParameter(format!("unknown fuel {other}"))),
        }
    }
}

/// Emission factors of one fuel in g/MJ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasFactors {
    pub co2: f64,
    pub ch4: f64,
    pub n2o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactors {
    pub fuels: BTreeMap<Fuel, GasFactors>,
    pub gwp_ch4: f64,
    pub gwp_n2o: f64,
}

impl Default for EmissionFactors {
    /// 20-year GWPs with upstream methane leakage folded into the CH4 factor.
    fn default() -> Self {
        let fuels = BTreeMap::from([
            (Fuel::Coal, GasFactors { co2: 92.0, ch4: 0.185, n2o: 1.52e-3 }),
            (Fuel::Petroleum, GasFactors { co2: 73.0, ch4: 0.093, n2o: 5.69e-4 }),
            (Fuel::NaturalGas, GasFactors { co2: 55.0, ch4: 0.641, n2o: 9.48e-5 }),
        ]);
        EmissionFactors { fuels, gwp_ch4: 86.0, gwp_n2o: 264.0 }
    }
}

impl EmissionFactors {
    /// CO2-equivalent factor of `fuel` in g/MJ.
    pub fn co2e(&self, fuel: Fuel) -> Result<f64> {
        let f = self
            .fuels
            .get(&fuel)
            .ok_or_else(|| Error::InvalidParameter(format!("no emission factors for {fuel:?}")))?;
        Ok(f.co2 + self.gwp_ch4 * f.ch4 + self.gwp_n2o * f.n2o)
    }
}

pub fn co2e_factor(fuel: Fuel) -> f64 {
    EmissionFactors::default().co2e(fuel).expect("default table covers every fuel")
}

fn default_reference() -> f64 {
    302.770
}

/// Emission inputs. Rates are in g/MJ, fuel quantities in MJ/yr and sector
/// totals in MMt CO2e/yr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmissionsConfig {
    pub factors: EmissionFactors,
    /// Fossil generation rate; natural gas when absent.
    pub theta_ff: Option<f64>,
    /// Import rate per node; zero when absent.
    pub theta_imp: BTreeMap<String, f64>,
    /// Blended heating rate; natural gas when absent.
    pub theta_heat: Option<f64>,
    /// Blended vehicle rate; petroleum when absent.
    pub theta_veh: Option<f64>,
    pub fuel_heat: BTreeMap<String, f64>,
    pub fuel_veh: BTreeMap<String, f64>,
    pub transport_other: f64,
    pub industrial: f64,
    pub waste: f64,
    /// Count waste incineration toward the total (validation runs only).
    pub include_waste: bool,
    pub reference: f64,
}

impl Default for EmissionsConfig {
    fn default() -> Self {
        EmissionsConfig {
            factors: EmissionFactors::default(),
            theta_ff: None,
            theta_imp: BTreeMap::new(),
            theta_heat: None,
            theta_veh: None,
            fuel_heat: BTreeMap::new(),
            fuel_veh: BTreeMap::new(),
            transport_other: 21.956,
            industrial: 19.365,
            waste: 2.784,
            include_waste: false,
            reference: default_reference(),
        }
    }
}

impl EmissionsConfig {
    pub fn theta_ff(&self) -> Result<f64> {
        self.theta_ff.map_or_else(|| self.factors.co2e(Fuel::NaturalGas), Ok)
    }

    pub fn theta_heat(&self) -> Result<f64> {
        self.theta_heat.map_or_else(|| self.factors.co2e(Fuel::NaturalGas), Ok)
    }

    pub fn theta_veh(&self) -> Result<f64> {
        self.theta_veh.map_or_else(|| self.factors.co2e(Fuel::Petroleum), Ok)
    }

    pub fn theta_imp(&self, node: &str) -> f64 {
        self.theta_imp.get(node).copied().unwrap_or(0.0)
    }

    /// Fuel use (MJ/yr) whose emissions at rate `theta` equal `mmt`.
    pub fn calibrated_fuel(mmt: f64, theta: f64) -> f64 {
        mmt / (theta * MMT_PER_GRAM)
    }

    /// Emissions that do not depend on the scenario's decisions.
    pub fn fixed_sectors(&self) -> f64 {
        self.transport_other + self.industrial + if self.include_waste { self.waste } else { 0.0 }
    }
}

/// Per-MWh emission coefficients of electricity supply in MMt per year of
/// simulated horizon. Shared by the GHG constraint and the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct ElecCoefficients {
    pub g_existing: f64,
    pub g_new: f64,
    /// Per node, in network order.
    pub imports: Vec<f64>,
}

pub fn electricity_coefficients(
    emissions: &EmissionsConfig,
    params: &TechParams,
    network: &NetworkSpec,
    n_years: f64,
) -> Result<ElecCoefficients> {
    if !(n_years > 0.0) {
        return Err(Error::InvalidParameter(format!("n_years must be positive, got {n_years}")));
    }
    let per_mwh = |theta: f64| theta * MJ_PER_MWH * MMT_PER_GRAM / n_years;
    let ff = emissions.theta_ff()?;
    Ok(ElecCoefficients {
        g_existing: per_mwh(ff) / params.eta_ff_existing,
        g_new: per_mwh(ff) / params.eta_ff_new,
        imports: network.nodes.iter().map(|n| per_mwh(emissions.theta_imp(&n.id))).collect(),
    })
}

/// Annual electricity emissions (MMt) of a solved dispatch.
pub fn electricity_emissions(lp: &LpInstance, x: &[f64], coef: &ElecCoefficients, hours: usize) -> f64 {
    let mut total = 0.0;
    for (i, imp) in coef.imports.iter().enumerate() {
        for t in 0..hours {
            total += coef.g_existing * lp.value(x, VarKey::hourly(Symbol::GExisting, i, t))
                + coef.g_new * lp.value(x, VarKey::hourly(Symbol::GNew, i, t))
                + imp * lp.value(x, VarKey::hourly(Symbol::V, i, t));
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorEmissions {
    pub heat: f64,
    pub veh: f64,
    pub transport: f64,
}

/// Remaining fossil heating and vehicle emissions (MMt/yr) at the given
/// per-node electrification rates.
pub fn sector_emissions(
    p_heat: &[f64],
    p_veh: &[f64],
    theta_heat: f64,
    theta_veh: f64,
    fuel_heat: &[f64],
    fuel_veh: &[f64],
    transport_other: f64,
) -> Result<SectorEmissions> {
    for p in p_heat.iter().chain(p_veh) {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::InvalidParameter(format!("electrification rate {p} outside [0, 1]")));
        }
    }
    let heat: f64 = p_heat.iter().zip(fuel_heat).map(|(p, f)| (1.0 - p) * theta_heat * f).sum::<f64>() * MMT_PER_GRAM;
    let veh: f64 = p_veh.iter().zip(fuel_veh).map(|(p, f)| (1.0 - p) * theta_veh * f).sum::<f64>() * MMT_PER_GRAM;
    Ok(SectorEmissions { heat, veh, transport: veh + transport_other })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionsLedger {
    pub elec: f64,
    pub heat: f64,
    pub veh: f64,
    pub transport_other: f64,
    pub transport: f64,
    pub industrial: f64,
    pub waste: f64,
    pub reference: f64,
    pub omega: f64,
    pub theta_ff: f64,
    pub theta_heat: f64,
    pub theta_veh: f64,
    pub fuel_heat_total: f64,
    pub fuel_veh_total: f64,
}

impl EmissionsLedger {
    pub fn total(&self) -> f64 {
        self.elec + self.heat + self.transport + self.industrial + self.waste
    }

    /// Recorded 2019 emissions as modeled, with waste incineration counted.
    pub fn current_preset() -> Self {
        let veh = 73.703;
        let transport_other = 21.956;
        let theta_heat = co2e_factor(Fuel::NaturalGas);
        let theta_veh = co2e_factor(Fuel::Petroleum);
        let mut ledger = EmissionsLedger {
            elec: 84.889,
            heat: 110.853,
            veh,
            transport_other,
            transport: veh + transport_other,
            industrial: 19.365,
            waste: 2.784,
            reference: 302.770,
            omega: 0.0,
            theta_ff: co2e_factor(Fuel::NaturalGas),
            theta_heat,
            theta_veh,
            fuel_heat_total: EmissionsConfig::calibrated_fuel(110.853, theta_heat),
            fuel_veh_total: EmissionsConfig::calibrated_fuel(veh, theta_veh),
        };
        ledger.omega = ghg_reduction(&ledger);
        ledger
    }
}

/// Fractional reduction of total emissions relative to the reference.
pub fn ghg_reduction(ledger: &EmissionsLedger) -> f64 {
    (ledger.reference - ledger.total()) / ledger.reference
}

/// Builds the full ledger for a solved scenario.
pub fn ledger(
    emissions: &EmissionsConfig,
    elec: f64,
    p_heat: &[f64],
    p_veh: &[f64],
    network: &NetworkSpec,
) -> Result<EmissionsLedger> {
    if !(emissions.reference > 0.0) {
        return Err(Error::InvalidParameter("reference emissions must be positive".into()));
    }
    let fuel = |m: &BTreeMap<String, f64>| -> Vec<f64> {
        network.nodes.iter().map(|n| m.get(&n.id).copied().unwrap_or(0.0)).collect()
    };
    let (fh, fv) = (fuel(&emissions.fuel_heat), fuel(&emissions.fuel_veh));
    let (theta_heat, theta_veh) = (emissions.theta_heat()?, emissions.theta_veh()?);
    let s = sector_emissions(p_heat, p_veh, theta_heat, theta_veh, &fh, &fv, emissions.transport_other)?;
    let mut l = EmissionsLedger {
        elec,
        heat: s.heat,
        veh: s.veh,
        transport_other: emissions.transport_other,
        transport: s.transport,
        industrial: emissions.industrial,
        waste: if emissions.include_waste { emissions.waste } else { 0.0 },
        reference: emissions.reference,
        omega: 0.0,
        theta_ff: emissions.theta_ff()?,
        theta_heat,
        theta_veh,
        fuel_heat_total: fh.iter().sum(),
        fuel_veh_total: fv.iter().sum(),
    };
    l.omega = ghg_reduction(&l);
    Ok(l)
}
