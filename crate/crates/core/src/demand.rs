//! Electrified demand synthesis: heating and vehicle scaling, flexible EV
//! charging envelopes, and behind-the-meter solar projection.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EvFlexConfig, NetworkSpec, ScenarioConfig, SeriesKind, TimeSeriesSet, HOURS_PER_DAY};

fn check_fraction(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} = {p} is outside [0, 1]")))
    }
}

pub fn scale_heating(p_heat: f64, full: &[f64]) -> Result<Vec<f64>> {
    check_fraction("p_heat", p_heat)?;
    Ok(full.iter().map(|v| p_heat * v).collect())
}

/// Works on hourly series and on daily totals alike.
pub fn scale_vehicles(p_veh: f64, full: &[f64]) -> Result<Vec<f64>> {
    check_fraction("p_veh", p_veh)?;
    Ok(full.iter().map(|v| p_veh * v).collect())
}

/// Splits a daily vehicle requirement into (flexible, fixed) parts.
pub fn split_ev_daily(daily: f64, y_flex: f64) -> Result<(f64, f64)> {
    check_fraction("flexible EV fraction", y_flex)?;
    let flex = y_flex * daily;
    Ok((flex, daily - flex))
}

/// Inclusive hour-of-day charging window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end || end >= HOURS_PER_DAY {
            return Err(Error::InvalidParameter(format!(
                "charging window {start}..{end} must satisfy start <= end < 24"
            )));
        }
        Ok(Window { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, hour: usize) -> bool {
        (self.start..=self.end).contains(&hour)
    }
}

impl From<&EvFlexConfig> for Window {
    fn from(c: &EvFlexConfig) -> Self {
        Window { start: c.start_hour as usize, end: c.end_hour as usize }
    }
}

/// Hourly charging for one day when the fixed requirement is spread evenly
/// over the window.
pub fn fixed_ev_profile(daily_fixed: f64, eta_veh: f64, window: Window) -> Result<[f64; HOURS_PER_DAY]> {
    if !(eta_veh > 0.0) {
        return Err(Error::InvalidParameter(format!("eta_veh must be positive, got {eta_veh}")));
    }
    let per_hour = daily_fixed / (eta_veh * window.len() as f64);
    let mut day = [0.0; HOURS_PER_DAY];
    for (h, v) in day.iter_mut().enumerate() {
        if window.contains(h) {
            *v = per_hour;
        }
    }
    Ok(day)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlexEnvelope {
    /// Energy that must be delivered inside the window each day.
    pub requirement: f64,
    /// Upper limit on flexible charging in any hour.
    pub hourly_cap: f64,
    pub window: Window,
    /// Whether `hourly_cap * window length` covers the requirement.
    pub feasible: bool,
}

pub fn flexible_ev_envelope(daily_flex: f64, eta_veh: f64, h_min: u32, window: Window) -> Result<FlexEnvelope> {
    if h_min < 1 {
        return Err(Error::InvalidParameter("minimum charging hours must be at least 1".into()));
    }
    if !(eta_veh > 0.0) {
        return Err(Error::InvalidParameter(format!("eta_veh must be positive, got {eta_veh}")));
    }
    if window.len() < h_min as usize {
        return Err(Error::InfeasibleEnvelope(format!(
            "window of {} hours is shorter than the {h_min}-hour minimum",
            window.len()
        )));
    }
    let requirement = daily_flex / eta_veh;
    let hourly_cap = daily_flex / f64::from(h_min);
    let feasible = hourly_cap * window.len() as f64 >= requirement * (1.0 - 1e-12);
    Ok(FlexEnvelope { requirement, hourly_cap, window, feasible })
}

/// Generalized logistic growth of statewide behind-the-meter solar (MW).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtmLogistic {
    pub k: f64,
    pub q: f64,
    pub b: f64,
    pub m: f64,
    pub v: f64,
}

impl Default for BtmLogistic {
    fn default() -> Self {
        BtmLogistic { k: 10982.023, q: 1.680925e-4, b: 0.1202713, m: 1995.067, v: 4.955324e-6 }
    }
}

impl BtmLogistic {
    pub fn statewide(&self, year: f64) -> f64 {
        // Evaluated in log space: the exponent 1/v is very large.
        let inner = (-self.b * (year - self.m)).exp() * self.q;
        self.k * (-(inner.ln_1p()) / self.v).exp()
    }
}

pub fn btm_capacity(year: i32, logistic: &BtmLogistic, shares: &[f64]) -> Result<Vec<f64>> {
    if year < 2000 {
        return Err(Error::InvalidParameter(format!("BTM projection year {year} is before 2000")));
    }
    let total: f64 = shares.iter().sum();
    if shares.iter().any(|s| *s < 0.0) || (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("BTM nodal shares sum to {total}, expected 1")));
    }
    let state = logistic.statewide(f64::from(year));
    Ok(shares.iter().map(|s| s * state).collect())
}

/// Electrified demands for one node. Heating and vehicle parts are given at
/// the configured rate, or at full electrification when the rate is a
/// decision variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDemand {
    pub elec: Vec<f64>,
    pub heat: Vec<f64>,
    pub veh_fixed: Vec<f64>,
    /// One envelope per day when flexible charging is enabled.
    pub ev_flex: Option<Vec<FlexEnvelope>>,
    pub btm_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandBundle {
    pub nodes: BTreeMap<String, NodeDemand>,
    /// True when heat and vehicle parts are per unit of electrification.
    pub per_unit: bool,
}

impl DemandBundle {
    pub fn node(&self, id: &str) -> Result<&NodeDemand> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::Formulation(format!("no synthesized demand for node {id}")))
    }
}

/// Builds electrified demand for every node.
pub fn synthesize(
    network: &NetworkSpec,
    series: &TimeSeriesSet,
    config: &ScenarioConfig,
    eta_veh: f64,
    logistic: &BtmLogistic,
) -> Result<DemandBundle> {
    let per_unit = config.electrification_free();
    let btm = match config.btm_year {
        Some(year) => {
            let shares: Vec<f64> = network.nodes.iter().map(|n| n.btm_share).collect();
            btm_capacity(year, logistic, &shares)?
        }
        None => network.nodes.iter().map(|n| n.existing.btm_solar).collect(),
    };
    let zeros = vec![0.0; series.hours];
    let mut nodes = BTreeMap::new();
    for (node, btm_capacity) in network.nodes.iter().zip(btm) {
        let id = node.id.as_str();
        let rate = |f: &Option<crate::model::Fraction>| -> Result<f64> {
            match (per_unit, f) {
                (true, _) | (false, None) => Ok(1.0),
                (false, Some(f)) => f.value_for(id),
            }
        };
        let (p_heat, p_veh) = (rate(&config.p_heat)?, rate(&config.p_veh)?);
        let elec = series
            .get(SeriesKind::DemandElec, id)
            .ok_or_else(|| Error::Formulation(format!("missing demand_elec for {id}")))?
            .to_vec();
        let heat = scale_heating(p_heat, series.get(SeriesKind::HeatFull, id).unwrap_or(&zeros))?;
        let (veh_fixed, ev_flex) = match &config.ev_flex {
            None => (scale_vehicles(p_veh, series.get(SeriesKind::VehFull, id).unwrap_or(&zeros))?, None),
            Some(ev) => {
                let window = Window::new(ev.start_hour as usize, ev.end_hour as usize)?;
                let days = series.days();
                let daily_zeros = vec![0.0; days];
                let daily_full = series.get(SeriesKind::VehDailyFull, id).unwrap_or(&daily_zeros);
                let daily = scale_vehicles(p_veh, daily_full)?;
                let mut hourly = Vec::with_capacity(series.hours);
                let mut envelopes = Vec::with_capacity(days);
                for &e in &daily {
                    let (flex, fixed) = split_ev_daily(e, ev.flexible_fraction)?;
                    hourly.extend_from_slice(&fixed_ev_profile(fixed, eta_veh, window)?);
                    envelopes.push(flexible_ev_envelope(flex, eta_veh, ev.min_hours, window)?);
                }
                (hourly, Some(envelopes))
            }
        };
        nodes.insert(
            node.id.clone(),
            NodeDemand { elec, heat, veh_fixed, ev_flex, btm_capacity },
        );
    }
    Ok(DemandBundle { nodes, per_unit })
}

/// Writes the bundle as `node,t,value` CSV files into `dir`.
pub fn dump(bundle: &DemandBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    type Getter = fn(&NodeDemand) -> Vec<f64>;
    let files: [(&str, Getter); 4] = [
        ("demand_elec", |d| d.elec.clone()),
        ("demand_heat", |d| d.heat.clone()),
        ("demand_veh_fixed", |d| d.veh_fixed.clone()),
        ("ev_flex_requirement", |d| {
            d.ev_flex.as_ref().map_or_else(Vec::new, |e| e.iter().map(|x| x.requirement).collect())
        }),
    ];
    for (stem, get) in files {
        let path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Csv { path: path.clone(), source: e })?;
        let wrap = |e: csv::Error| Error::Csv { path: path.clone(), source: e };
        w.write_record(["node", "t", "value"]).map_err(wrap)?;
        for (node, d) in &bundle.nodes {
            for (t, v) in get(d).iter().enumerate() {
                w.write_record([node.as_str(), &t.to_string(), &v.to_string()]).map_err(wrap)?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn heating_examples() {
        assert_eq!(scale_heating(0.0, &[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(scale_heating(1.0, &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(scale_heating(0.5, &[10.0, 20.0]).unwrap(), vec![5.0, 10.0]);
        assert!(matches!(scale_heating(1.1, &[1.0]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn vehicle_examples() {
        assert_eq!(scale_vehicles(0.0, &[5.0]).unwrap(), vec![0.0]);
        assert_eq!(scale_vehicles(1.0, &[5.0]).unwrap(), vec![5.0]);
        assert_eq!(scale_vehicles(0.25, &[100.0]).unwrap(), vec![25.0]);
        assert!(scale_vehicles(-0.1, &[1.0]).is_err());
    }

    #[test]
    fn ev_split_examples() {
        assert_eq!(split_ev_daily(100.0, 0.0).unwrap(), (0.0, 100.0));
        assert_eq!(split_ev_daily(100.0, 1.0).unwrap(), (100.0, 0.0));
        assert_eq!(split_ev_daily(80.0, 0.25).unwrap(), (20.0, 60.0));
    }

    #[test]
    fn fixed_profile_examples() {
        let all = Window::new(0, 23).unwrap();
        assert!(fixed_ev_profile(24.0, 1.0, all).unwrap().iter().all(|v| *v == 1.0));
        let evening = fixed_ev_profile(12.0, 1.0, Window::new(18, 23).unwrap()).unwrap();
        for (h, v) in evening.iter().enumerate() {
            assert_eq!(*v, if h >= 18 { 2.0 } else { 0.0 });
        }
        let lossy = fixed_ev_profile(10.0, 0.9, all).unwrap();
        assert!((lossy[0] - 0.462_962_96).abs() < 1e-8);
        assert!(fixed_ev_profile(1.0, 0.0, all).is_err());
    }

    #[test]
    fn envelope_examples() {
        let all = Window::new(0, 23).unwrap();
        let e = flexible_ev_envelope(40.0, 1.0, 4, all).unwrap();
        assert_eq!((e.requirement, e.hourly_cap, e.feasible), (40.0, 10.0, true));
        let e = flexible_ev_envelope(0.0, 1.0, 4, all).unwrap();
        assert_eq!((e.requirement, e.hourly_cap), (0.0, 0.0));
        let e = flexible_ev_envelope(8.0, 0.8, 4, Window::new(20, 23).unwrap()).unwrap();
        assert!((e.requirement - 10.0).abs() < 1e-12);
        assert_eq!(e.hourly_cap, 2.0);
        assert!(!e.feasible);
        assert!(matches!(
            flexible_ev_envelope(8.0, 1.0, 4, Window::new(21, 23).unwrap()),
            Err(Error::InfeasibleEnvelope(_))
        ));
    }

    #[test]
    fn btm_matches_published_nodal_sums() {
        let l = BtmLogistic::default();
        let y2030 = btm_capacity(2030, &l, &[1.0]).unwrap()[0];
        let y2050 = btm_capacity(2050, &l, &[1.0]).unwrap()[0];
        assert!((y2030 - (2109.0 + 2364.0 + 1096.0 + 1039.0)).abs() < 10.0, "{y2030}");
        assert!((y2050 - (3348.0 + 3752.0 + 1740.0 + 1649.0)).abs() < 10.0, "{y2050}");
        assert!((l.statewide(1e6) - l.k).abs() < 1e-6);
        assert!(btm_capacity(1999, &l, &[1.0]).is_err());
        assert!(btm_capacity(2030, &l, &[0.5, 0.4]).is_err());
    }

    proptest! {
        #[test]
        fn heating_is_homogeneous(p in 0.0f64..1.0, alpha in 0.0f64..1.0, xs in prop::collection::vec(0.0f64..1e4, 1..30)) {
            let a = scale_heating(alpha * p, &xs).unwrap();
            let b = scale_heating(p, &xs).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - alpha * v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }

        #[test]
        fn ev_split_is_exact(e in 0.0f64..1e6, y in 0.0f64..=1.0) {
            let (flex, fixed) = split_ev_daily(e, y).unwrap();
            prop_assert_eq!(flex, y * e);
            prop_assert_eq!(fixed, e - flex);
        }

        #[test]
        fn fixed_profile_conserves_energy(e in 0.0f64..1e5, eta in 0.05f64..=1.0, s in 0usize..24, len in 1usize..24) {
            let end = (s + len - 1).min(23);
            let day = fixed_ev_profile(e, eta, Window::new(s, end).unwrap()).unwrap();
            let total: f64 = day.iter().sum::<f64>() * eta;
            prop_assert!((total - e).abs() <= 1e-9 * e.max(1.0));
        }

        #[test]
        fn btm_is_monotone_and_bounded(y1 in 2000i32..2200, dy in 0i32..100) {
            let l = BtmLogistic::default();
            let a = btm_capacity(y1, &l, &[1.0]).unwrap()[0];
            let b = btm_capacity(y1 + dy, &l, &[1.0]).unwrap()[0];
            prop_assert!(b >= a);
            prop_assert!(b <= l.k);
        }
    }
}
