use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::run::run_with;
use super::{Report, Scenario, ScenarioError, ValidationIssue};
use crate::forecast::ForecastParams;

/// Headline figures of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub available_compute_tflops: Option<f64>,
    pub required_compute_tflops: Option<f64>,
    pub shortfall: Option<bool>,
    pub satellite_mass_kg: Option<f64>,
    pub compute_efficiency_w_per_tflops: Option<f64>,
    pub cost_of_power_eur_per_w: Option<f64>,
    pub cost_of_compute_eur_per_tflops: Option<f64>,
    pub max_outage_fraction: Option<f64>,
    pub max_outage_s: Option<f64>,
    pub max_buffer_mb: Option<f64>,
    pub worst_latency_s: Option<f64>,
    pub content_hash: String,
}

impl SweepRow {
    fn from_report(value: f64, r: &Report) -> Self {
        let f = r.forecast.as_ref();
        let o = r.outage.as_ref();
        let max_of = |get: fn(&crate::netsim::OutageRow) -> f64| o.and_then(|o| o.rows.iter().map(get).reduce(f64::max));
        Self {
            value,
            available_compute_tflops: f.map(|f| f.available_compute_tflops),
            required_compute_tflops: f.and_then(|f| f.required_compute_tflops),
            shortfall: f.map(|f| f.shortfall),
            satellite_mass_kg: f.map(|f| f.satellite_mass_kg),
            compute_efficiency_w_per_tflops: f.map(|f| f.compute_efficiency_w_per_tflops),
            cost_of_power_eur_per_w: f.and_then(|f| f.cost_of_power_eur_per_w),
            cost_of_compute_eur_per_tflops: f.and_then(|f| f.cost_of_compute_eur_per_tflops),
            max_outage_fraction: max_of(|r| r.outage_fraction),
            max_outage_s: max_of(|r| r.max_outage_s),
            max_buffer_mb: max_of(|r| r.buffer_mb),
            worst_latency_s: r.routing.as_ref().and_then(|r| r.worst.as_ref()).and_then(|w| w.max_latency_s),
            content_hash: r.content_hash.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub reports: Vec<Report>,
}

fn invalid(axis: &str, message: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Invalid(vec![ValidationIssue::new(axis, message)])
}

/// Replace the numeric scalar at dotted `axis` (array indices allowed).
fn set_axis(doc: &mut Value, axis: &str, value: f64) -> Result<(), ScenarioError> {
    let mut node = doc;
    for seg in axis.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(seg),
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| invalid(axis, format!("no field {seg:?} on the axis path")))?;
    }
    let Value::Number(current) = node else {
        return Err(invalid(axis, "axis must address a numeric field"));
    };
    *node = if current.is_f64() {
        serde_json::Number::from_f64(value).map(Value::Number).ok_or_else(|| invalid(axis, "axis values must be finite"))?
    } else if value.fract() == 0.0 && value.is_finite() {
        if value < 0.0 {
            Value::from(value as i64)
        } else {
            Value::from(value as u64)
        }
    } else {
        return Err(invalid(axis, format!("field is an integer, got {value}")));
    };
    Ok(())
}

/// Run `scenario` once per axis value. Points run concurrently; results
/// keep the input order.
pub fn sweep(scenario: &Scenario, axis: &str, values: &[f64]) -> Result<SweepResult, ScenarioError> {
    let base = serde_json::to_value(scenario.clone().resolve()?).expect("scenario serializes");
    let points = values
        .iter()
        .map(|&v| {
            let mut doc = base.clone();
            set_axis(&mut doc, axis, v)?;
            let s: Scenario = serde_json::from_value(doc).map_err(|e| invalid(axis, e))?;
            Ok(s)
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let params = ForecastParams::shipped();
    let reports = points.par_iter().map(|s| run_with(s, &params)).collect::<Result<Vec<_>, _>>()?;
    let rows = values.iter().zip(&reports).map(|(&v, r)| SweepRow::from_report(v, r)).collect();
    Ok(SweepResult { axis: axis.to_string(), rows, reports })
}
