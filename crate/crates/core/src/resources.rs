//! Resource preparation: monthly hydro disaggregation, biofuel limits and
//! subsidized nuclear pricing.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{NetworkSpec, SeriesKind, TimeSeriesSet, HOURS_PER_DAY, HOURS_PER_YEAR};
use crate::spline::NaturalSpline;

const MONTH_DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
const MIN_SPLINE_MONTHS: usize = 4;

/// Month lengths in hours over the horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    pub month_hours: Vec<usize>,
}

impl Calendar {
    /// `years` consecutive 365-day years.
    pub fn standard(years: usize) -> Self {
        let month_hours = (0..years)
            .flat_map(|_| MONTH_DAYS.iter().map(|d| d * HOURS_PER_DAY))
            .collect();
        Calendar { month_hours }
    }

    /// Standard calendar covering `hours`, if it is a whole number of years.
    pub fn for_hours(hours: usize) -> Option<Self> {
        (hours > 0 && hours % HOURS_PER_YEAR == 0).then(|| Self::standard(hours / HOURS_PER_YEAR))
    }

    pub fn months(&self) -> usize {
        self.month_hours.len()
    }

    pub fn hours(&self) -> usize {
        self.month_hours.iter().sum()
    }

    fn starts(&self) -> Vec<usize> {
        self.month_hours
            .iter()
            .scan(0, |acc, h| {
                let s = *acc;
                *acc += h;
                Some(s)
            })
            .collect()
    }
}

pub fn split_hydro(monthly: &[f64], y_fix: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..=1.0).contains(&y_fix) {
        return Err(Error::InvalidParameter(format!("fixed hydro fraction {y_fix} outside [0, 1]")));
    }
    let fixed = monthly.iter().map(|v| y_fix * v).collect();
    let flex = monthly.iter().map(|v| (1.0 - y_fix) * v).collect();
    Ok((fixed, flex))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disaggregated {
    pub values: Vec<f64>,
    /// True when too few months were available for a spline and a
    /// piecewise-constant profile was used instead.
    pub fallback: bool,
}

fn check_monthly(monthly: &[f64], calendar: &Calendar) -> Result<()> {
    if monthly.len() != calendar.months() {
        return Err(Error::InvalidParameter(format!(
            "{} monthly values for a calendar of {} months",
            monthly.len(),
            calendar.months()
        )));
    }
    if monthly.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter("monthly totals must be finite and non-negative".into()));
    }
    Ok(())
}

/// Spline through monthly mean hourly rates at month midpoints.
fn rate_spline(monthly: &[f64], calendar: &Calendar) -> Result<Option<NaturalSpline>> {
    if calendar.months() < MIN_SPLINE_MONTHS {
        return Ok(None);
    }
    let starts = calendar.starts();
    let xs: Vec<f64> = starts
        .iter()
        .zip(&calendar.month_hours)
        .map(|(&s, &h)| s as f64 + h as f64 / 2.0)
        .collect();
    let ys: Vec<f64> = monthly.iter().zip(&calendar.month_hours).map(|(v, &h)| v / h as f64).collect();
    NaturalSpline::fit(&xs, &ys).map(Some)
}

/// Samples the spline at `steps` points per month (each `step_hours` long),
/// clamps at zero and rescales so every month sums to its total.
fn sample_conserving(monthly: &[f64], calendar: &Calendar, step_hours: usize) -> Result<Disaggregated> {
    check_monthly(monthly, calendar)?;
    let spline = rate_spline(monthly, calendar)?;
    let starts = calendar.starts();
    let mut values = Vec::with_capacity(calendar.hours() / step_hours);
    for ((&total, &start), &hours) in monthly.iter().zip(&starts).zip(&calendar.month_hours) {
        let steps = hours / step_hours;
        let uniform = total / steps as f64;
        let Some(spline) = &spline else {
            values.extend(std::iter::repeat(uniform).take(steps));
            continue;
        };
        let month: Vec<f64> = (0..steps)
            .map(|k| {
                let centre = (start + k * step_hours) as f64 + step_hours as f64 / 2.0;
                (spline.eval(centre) * step_hours as f64).max(0.0)
            })
            .collect();
        let sum: f64 = month.iter().sum();
        if sum > 0.0 {
            let scale = total / sum;
            values.extend(month.iter().map(|v| v * scale));
        } else {
            values.extend(std::iter::repeat(uniform).take(steps));
        }
    }
    Ok(Disaggregated { values, fallback: spline.is_none() })
}

/// Hourly must-run hydro from monthly totals.
pub fn disaggregate_fixed(monthly: &[f64], calendar: &Calendar) -> Result<Disaggregated> {
    sample_conserving(monthly, calendar, 1)
}

/// Daily flexible hydro budgets from monthly totals.
pub fn disaggregate_flexible(monthly: &[f64], calendar: &Calendar) -> Result<Disaggregated> {
    sample_conserving(monthly, calendar, HOURS_PER_DAY)
}

pub fn nuclear_subsidized_price(base: f64, zec_rate: f64, demand_forecast: f64, constant_gen: f64) -> Result<f64> {
    if zec_rate == 0.0 {
        return Ok(base);
    }
    if !(constant_gen > 0.0) {
        return Err(Error::InvalidParameter(
            "constant nuclear generation must be positive when a subsidy applies".into(),
        ));
    }
    Ok(base + zec_rate * demand_forecast / (constant_gen * HOURS_PER_YEAR as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiofuelLimits {
    pub daily: f64,
    pub hourly: f64,
}

impl BiofuelLimits {
    /// Whether the hourly limit allows the full daily amount to be used.
    pub fn daily_reachable(&self) -> bool {
        self.hourly * HOURS_PER_DAY as f64 >= self.daily
    }
}

pub fn biofuel_limits(avg_daily_gen: f64, capacity: f64) -> BiofuelLimits {
    let limits = BiofuelLimits { daily: avg_daily_gen, hourly: capacity };
    if !limits.daily_reachable() {
        log::warn!(
            "biofuel hourly limit {capacity} MW cannot deliver the daily amount {avg_daily_gen} MWh"
        );
    }
    limits
}

/// Must-run and flexible hydro for one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HydroProfile {
    pub fixed_hourly: Vec<f64>,
    pub flex_daily: Vec<f64>,
    pub flex_max: f64,
    pub fixed_fraction: f64,
    pub fallback: bool,
}

/// Hydro profiles for every node. Explicit hourly or daily series take
/// precedence over monthly totals.
pub fn prepare_hydro(network: &NetworkSpec, series: &TimeSeriesSet) -> Result<BTreeMap<String, HydroProfile>> {
    let calendar = Calendar::for_hours(series.hours);
    let mut out = BTreeMap::new();
    for node in &network.nodes {
        let id = node.id.as_str();
        let explicit_fixed = series.get(SeriesKind::HydroFixed, id).map(<[f64]>::to_vec);
        let explicit_flex = series.get(SeriesKind::HydroFlexDaily, id).map(<[f64]>::to_vec);
        let mut fallback = false;
        let (fixed_hourly, flex_daily) = match (explicit_fixed, explicit_flex, series.hydro_monthly.get(id)) {
            (Some(f), Some(d), _) => (f, d),
            (f, d, Some(monthly)) => {
                let cal = calendar.as_ref().ok_or_else(|| {
                    Error::Formulation(format!(
                        "monthly hydro for {id} needs a horizon of whole years, got {} hours",
                        series.hours
                    ))
                })?;
                let (fix_m, flex_m) = split_hydro(monthly, node.hydro_fixed_fraction)?;
                let f = match f {
                    Some(f) => f,
                    None => {
                        let d = disaggregate_fixed(&fix_m, cal)?;
                        fallback |= d.fallback;
                        d.values
                    }
                };
                let d = match d {
                    Some(d) => d,
                    None => {
                        let d = disaggregate_flexible(&flex_m, cal)?;
                        fallback |= d.fallback;
                        d.values
                    }
                };
                (f, d)
            }
            (f, d, None) => (
                f.unwrap_or_else(|| vec![0.0; series.hours]),
                d.unwrap_or_else(|| vec![0.0; series.days()]),
            ),
        };
        out.insert(
            node.id.clone(),
            HydroProfile {
                fixed_hourly,
                flex_daily,
                flex_max: node.hydro_flex_max,
                fixed_fraction: node.hydro_fixed_fraction,
                fallback,
            },
        );
    }
    Ok(out)
}

pub fn prepare_biofuel(network: &NetworkSpec) -> BTreeMap<String, BiofuelLimits> {
    network
        .nodes
        .iter()
        .map(|n| (n.id.clone(), biofuel_limits(n.biofuel_daily, n.existing.biofuel)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent spline: solves the full natural-spline system densely
    /// for the cubic coefficients of every segment.
    fn dense_spline(xs: &[f64], ys: &[f64]) -> impl Fn(f64) -> f64 {
        let n = xs.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        a[0][0] = 1.0;
        a[n - 1][n - 1] = 1.0;
        for i in 1..n - 1 {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            a[i][i - 1] = h0 / 6.0;
            a[i][i] = (h0 + h1) / 3.0;
            a[i][i + 1] = h1 / 6.0;
            a[i][n] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for c in 0..n {
            let p = (c..n).max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs())).unwrap();
            a.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        let m: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
        let (xs, ys) = (xs.to_vec(), ys.to_vec());
        move |x: f64| {
            let last = xs.len() - 1;
            let i = if x <= xs[0] {
                0
            } else if x >= xs[last] {
                last - 1
            } else {
                xs.iter().rposition(|&k| k <= x).unwrap()
            };
            let h = xs[i + 1] - xs[i];
            let (t0, t1) = (xs[i + 1] - x, x - xs[i]);
            if x < xs[0] || x > xs[last] {
                // Linear continuation with the end slope.
                let (xe, ye, slope) = if x < xs[0] {
                    (xs[0], ys[0], (ys[1] - ys[0]) / h - h * (2.0 * m[0] + m[1]) / 6.0)
                } else {
                    (xs[last], ys[last], (ys[last] - ys[last - 1]) / h + h * (m[last - 1] + 2.0 * m[last]) / 6.0)
                };
                return ye + slope * (x - xe);
            }
            m[i] * t0.powi(3) / (6.0 * h)
                + m[i + 1] * t1.powi(3) / (6.0 * h)
                + (ys[i] / h - m[i] * h / 6.0) * t0
                + (ys[i + 1] / h - m[i + 1] * h / 6.0) * t1
        }
    }

    fn month_sums(values: &[f64], cal: &Calendar, step: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0;
        for h in &cal.month_hours {
            let n = h / step;
            out.push(values[k..k + n].iter().sum());
            k += n;
        }
        out
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_hydro(&[5.0], 1.0).unwrap(), (vec![5.0], vec![0.0]));
        assert_eq!(split_hydro(&[5.0], 0.0).unwrap(), (vec![0.0], vec![5.0]));
        assert_eq!(split_hydro(&[1000.0], 0.6).unwrap(), (vec![600.0], vec![400.0]));
        assert!(split_hydro(&[1.0], 1.5).is_err());
    }

    #[test]
    fn constant_rate_stays_constant() {
        let cal = Calendar::standard(1);
        let monthly: Vec<f64> = cal.month_hours.iter().map(|h| 2.5 * *h as f64).collect();
        let hourly = disaggregate_fixed(&monthly, &cal).unwrap();
        assert!(!hourly.fallback);
        assert!(hourly.values.iter().all(|v| (v - 2.5).abs() < 1e-9));
        let daily = disaggregate_flexible(&monthly, &cal).unwrap();
        assert!(daily.values.iter().all(|v| (v - 60.0).abs() < 1e-9));
    }

    #[test]
    fn isolated_month_is_conserved() {
        let cal = Calendar::standard(1);
        let mut monthly = vec![0.0; 12];
        monthly[5] = 7200.0;
        for (step, d) in [
            (1, disaggregate_fixed(&monthly, &cal).unwrap()),
            (24, disaggregate_flexible(&monthly, &cal).unwrap()),
        ] {
            assert!(d.values.iter().all(|v| *v >= 0.0));
            for (got, want) in month_sums(&d.values, &cal, step).iter().zip(&monthly) {
                assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn sinusoid_matches_independent_spline() {
        let cal = Calendar::standard(1);
        let monthly: Vec<f64> = (0..12)
            .map(|m| (1000.0 + 400.0 * (m as f64 * std::f64::consts::PI / 6.0).sin()) * cal.month_hours[m] as f64)
            .collect();
        let starts = cal.starts();
        let xs: Vec<f64> = starts.iter().zip(&cal.month_hours).map(|(&s, &h)| s as f64 + h as f64 / 2.0).collect();
        let ys: Vec<f64> = monthly.iter().zip(&cal.month_hours).map(|(v, &h)| v / h as f64).collect();
        let oracle = dense_spline(&xs, &ys);

        for step in [1usize, 24] {
            let got = if step == 1 {
                disaggregate_fixed(&monthly, &cal).unwrap()
            } else {
                disaggregate_flexible(&monthly, &cal).unwrap()
            };
            let mut expected = Vec::new();
            for ((&total, &start), &hours) in monthly.iter().zip(&starts).zip(&cal.month_hours) {
                let raw: Vec<f64> = (0..hours / step)
                    .map(|k| (oracle((start + k * step) as f64 + step as f64 / 2.0) * step as f64).max(0.0))
                    .collect();
                let s: f64 = raw.iter().sum();
                expected.extend(raw.iter().map(|v| v * total / s));
            }
            for (g, e) in got.values.iter().zip(&expected) {
                assert!((g - e).abs() <= 1e-9 * e.abs().max(1.0), "{g} vs {e}");
            }
            for (g, want) in month_sums(&got.values, &cal, step).iter().zip(&monthly) {
                assert!((g - want).abs() <= 1e-9 * want);
            }
        }
        let hourly = disaggregate_fixed(&monthly, &cal).unwrap().values;
        let max_step = hourly.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        // The rate changes by at most 2 * 400 * pi / 6 per month, and per-month
        // rescaling adds a small jump at month boundaries.
        assert!(max_step < 10.0, "{max_step}");
    }

    #[test]
    fn short_calendar_falls_back() {
        let cal = Calendar { month_hours: vec![744, 672, 744] };
        let d = disaggregate_fixed(&[744.0, 1344.0, 0.0], &cal).unwrap();
        assert!(d.fallback);
        assert_eq!(d.values[0], 1.0);
        assert_eq!(d.values[744], 2.0);
    }

    #[test]
    fn nuclear_price_examples() {
        assert_eq!(nuclear_subsidized_price(30.0, 0.0, 1e6, 0.0).unwrap(), 30.0);
        assert!((nuclear_subsidized_price(20.0, 1.0, 8760.0, 1.0).unwrap() - 21.0).abs() < 1e-12);
        assert_eq!(nuclear_subsidized_price(26.82, 0.0, 5e7, 3000.0).unwrap(), 26.82);
        assert!(nuclear_subsidized_price(20.0, 1.0, 8760.0, 0.0).is_err());
    }

    #[test]
    fn biofuel_examples() {
        let l = biofuel_limits(3289.041, 258.0);
        assert_eq!((l.daily, l.hourly), (3289.041, 258.0));
        assert!(l.daily_reachable());
        let l = biofuel_limits(0.0, 0.0);
        assert_eq!((l.daily, l.hourly), (0.0, 0.0));
        let l = biofuel_limits(100.0, 2.0);
        assert!(!l.daily_reachable());
    }

    proptest! {
        #[test]
        fn disaggregation_conserves_and_is_nonnegative(monthly in prop::collection::vec(0.0f64..1e6, 12)) {
            let cal = Calendar::standard(1);
            for step in [1usize, 24] {
                let d = if step == 1 { disaggregate_fixed(&monthly, &cal) } else { disaggregate_flexible(&monthly, &cal) }.unwrap();
                prop_assert!(d.values.iter().all(|v| *v >= 0.0));
                for (g, w) in month_sums(&d.values, &cal, step).iter().zip(&monthly) {
                    prop_assert!((g - w).abs() <= 1e-9 * w.max(1.0));
                }
            }
        }

        #[test]
        fn split_is_linear(monthly in prop::collection::vec(0.0f64..1e6, 1..24), y in 0.0f64..=1.0, alpha in 0.0f64..10.0) {
            let scaled: Vec<f64> = monthly.iter().map(|v| alpha * v).collect();
            let (f1, x1) = split_hydro(&scaled, y).unwrap();
            let (f0, x0) = split_hydro(&monthly, y).unwrap();
            for i in 0..monthly.len() {
                prop_assert!((f1[i] - alpha * f0[i]).abs() <= 1e-9 * (1.0 + f1[i].abs()));
                prop_assert!((x1[i] - alpha * x0[i]).abs() <= 1e-9 * (1.0 + x1[i].abs()));
            }
        }
    }
}
