//! A small two-node, two-day system used by tests, benchmarks and the
//! `write-fixture` command.
//!
//! "up" is a wind and hydro region with cheap gas and an import tie;
//! "down" is a load center with solar, offshore wind, nuclear, biofuel,
//! batteries and new gas. One interface joins them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::demand::BtmLogistic;
use crate::emissions::{co2e_factor, EmissionsConfig, Fuel};
use crate::io::Bundle;
use crate::model::{
    CostTable, ExistingCapacity, InterfaceCosts, InterfaceSpec, NetworkSpec, NodeCosts, NodeSpec, SeriesKind,
    TechParams, TimeSeriesSet, HOURS_PER_DAY,
};

pub const HOURS: usize = 48;

fn series(f: impl Fn(usize, f64) -> f64) -> Vec<f64> {
    (0..HOURS).map(|t| f(t, (t % HOURS_PER_DAY) as f64)).collect()
}

fn daylight(h: f64) -> f64 {
    if (6.0..=18.0).contains(&h) {
        (PI * (h - 6.0) / 12.0).sin()
    } else {
        0.0
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

pub fn two_node_48h() -> Bundle {
    let mut up = NodeSpec::new("up");
    up.existing = ExistingCapacity {
        onshore_wind: 40.0,
        gas: 60.0,
        hydro_fixed: 20.0,
        hydro_flexible: 25.0,
        ..Default::default()
    };
    up.onshore_max = 400.0;
    up.utility_solar_max = 100.0;
    up.import_max = 30.0;
    up.hydro_flex_max = 25.0;
    up.existing_tx_flow = 1000.0;
    up.btm_share = 0.3;

    let mut down = NodeSpec::new("down");
    down.existing = ExistingCapacity {
        utility_solar: 10.0,
        btm_solar: 20.0,
        gas: 200.0,
        nuclear: 30.0,
        biofuel: 10.0,
        ..Default::default()
    };
    down.onshore_max = 50.0;
    down.utility_solar_max = 300.0;
    down.biofuel_daily = 100.0;
    down.existing_tx_flow = 2000.0;
    down.btm_share = 0.7;

    let network = NetworkSpec {
        nodes: vec![up, down],
        interfaces: vec![InterfaceSpec {
            from: "up".into(),
            to: "down".into(),
            forward_limit: 120.0,
            reverse_limit: 60.0,
            distance_mi: 150.0,
        }],
        offshore_cap_total: 200.0,
    };

    let mut s = TimeSeriesSet::new(HOURS);
    let wave = |h: f64, phase: f64| (2.0 * PI * (h - phase) / 24.0).sin();
    s.insert(SeriesKind::DemandElec, "up", series(|_, h| round3(60.0 + 15.0 * wave(h, 8.0))));
    s.insert(SeriesKind::DemandElec, "down", series(|t, h| round3(140.0 + 35.0 * wave(h, 9.0) + 5.0 * (t / 24) as f64)));
    s.insert(SeriesKind::HeatFull, "up", series(|_, h| round3(20.0 + 10.0 * (2.0 * PI * h / 24.0).cos())));
    s.insert(SeriesKind::HeatFull, "down", series(|_, h| round3(40.0 + 15.0 * (2.0 * PI * h / 24.0).cos())));
    s.insert(SeriesKind::VehFull, "up", series(|_, h| round3(8.0 + 4.0 * wave(h, 12.0))));
    s.insert(SeriesKind::VehFull, "down", series(|_, h| round3(20.0 + 8.0 * wave(h, 12.0))));
    s.insert(SeriesKind::VehDailyFull, "up", vec![190.0, 195.0]);
    s.insert(SeriesKind::VehDailyFull, "down", vec![470.0, 480.0]);
    s.insert(SeriesKind::WindOnshore, "up", series(|t, _| round3(0.35 + 0.25 * (2.0 * PI * t as f64 / 17.0).sin())));
    s.insert(SeriesKind::WindOnshore, "down", series(|t, _| round3(0.2 + 0.1 * (2.0 * PI * t as f64 / 19.0).sin())));
    s.insert(SeriesKind::WindOffshore, "down", series(|t, _| round3(0.5 + 0.3 * (2.0 * PI * t as f64 / 13.0 + 1.0).sin())));
    s.insert(SeriesKind::UtilitySolar, "up", series(|_, h| round3(0.7 * daylight(h))));
    s.insert(SeriesKind::UtilitySolar, "down", series(|t, h| round3((0.8 - 0.1 * (t / 24) as f64) * daylight(h))));
    s.insert(SeriesKind::BtmSolar, "down", series(|_, h| round3(0.7 * daylight(h))));
    s.insert(SeriesKind::HydroFixed, "up", series(|t, _| round3(15.0 + 2.0 * (2.0 * PI * t as f64 / 48.0).sin())));
    s.insert(SeriesKind::HydroFlexDaily, "up", vec![300.0, 280.0]);
    s.insert(SeriesKind::Nuclear, "down", vec![30.0; HOURS]);

    let base = NodeCosts {
        cap_on: Some(1698.0),
        cap_us_solar: Some(1006.0),
        cap_batt_e: Some(144.0),
        cap_batt_p: Some(0.0),
        omf_on: 18.1,
        omf_off: 38.0,
        omf_us_solar: 10.4,
        omf_ff: 6.97,
        omf_h2: 48.87,
        omv_ff: 4.48,
        c_existing_ramp: 79.0,
        c_new_ramp: 69.0,
        ..Default::default()
    };
    let mut costs = CostTable::default();
    costs.nodes.insert(
        "up".into(),
        NodeCosts {
            c_ff: Some(2.8),
            c_hydro: Some(5.0),
            c_imp: Some(42.0),
            ex_cap: 27.64,
            ex_tx: 0.5,
            ..base.clone()
        },
    );
    costs.nodes.insert(
        "down".into(),
        NodeCosts {
            cap_off: Some(2256.0),
            cap_ff: Some(772.0),
            cap_h2_e: Some(2.5),
            cap_h2_p: Some(1500.0),
            c_ff: Some(3.4),
            c_nuc: Some(22.0),
            c_bio: Some(28.0),
            ex_cap: 53.44,
            ex_tx: 0.5,
            ..base
        },
    );
    costs.interfaces.insert("up-down".into(), InterfaceCosts { cap_tx: Some(2500.0), omf_tx: 0.0 });

    // Sector fuel use sized so that heating and vehicles emit on the same
    // order as the electricity system.
    let (th, tv) = (co2e_factor(Fuel::NaturalGas), co2e_factor(Fuel::Petroleum));
    let emissions = EmissionsConfig {
        fuel_heat: BTreeMap::from([
            ("up".to_string(), EmissionsConfig::calibrated_fuel(0.25, th)),
            ("down".to_string(), EmissionsConfig::calibrated_fuel(0.45, th)),
        ]),
        fuel_veh: BTreeMap::from([
            ("up".to_string(), EmissionsConfig::calibrated_fuel(0.15, tv)),
            ("down".to_string(), EmissionsConfig::calibrated_fuel(0.30, tv)),
        ]),
        theta_imp: BTreeMap::from([("up".to_string(), 0.0)]),
        transport_other: 0.1,
        industrial: 0.1,
        waste: 0.0,
        reference: 2.5,
        ..Default::default()
    };

    Bundle {
        network,
        series: s,
        costs,
        params: TechParams::default(),
        emissions,
        btm: BtmLogistic::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potentials_stay_in_unit_interval() {
        let f = two_node_48h();
        for kind in SeriesKind::ALL.into_iter().filter(|k| k.is_potential()) {
            for values in f.series.series.get(&kind).into_iter().flat_map(|m| m.values()) {
                assert!(values.iter().all(|v| (0.0..=1.0).contains(v)), "{kind}");
            }
        }
    }
}
