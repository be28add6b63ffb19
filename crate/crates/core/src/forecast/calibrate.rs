//! Fit roadmap curves and mass/cost coefficients to a table of published
//! design figures.
//!
//! The fit runs in three stages that follow the model's dependency order:
//!
//! 1. efficiency curve (and optionally per-row compute power fractions),
//!    linear in log space;
//! 2. mass coefficients, linear given the stage-1 compute;
//! 3. launch/hardware/integration cost coefficients, linear given stages 1-2.
//!
//! Each stage solves a relative least-squares problem. When the targets do
//! not pin down every parameter, the pseudo-inverse picks the solution with
//! the smallest relative change from the priors, so parameters the targets
//! never touch keep their prior value and zero priors stay zero.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{forecast, size_compute, size_mass, ComputeType, Destination, ForecastError, ForecastParams, SdcDesign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("calibration needs at least one target row")]
    NoRows,
    #[error("all target rows must share one compute type")]
    MixedComputeTypes,
    #[error("target {cell} must be positive, got {value}")]
    InvalidTarget { cell: String, value: f64 },
    #[error("calibration drives {parameter} to {value}; offending cells: {}", cells.join(", "))]
    Infeasible { parameter: String, value: f64, cells: Vec<String> },
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

/// Published figures for one design; absent cells are not fitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetCells {
    pub available_compute_tflops: Option<f64>,
    pub satellite_mass_kg: Option<f64>,
    pub compute_efficiency_w_per_tflops: Option<f64>,
    pub cost_of_power_eur_per_w: Option<f64>,
    pub cost_of_compute_eur_per_tflops: Option<f64>,
}

impl TargetCells {
    fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        [
            ("available_compute_tflops", self.available_compute_tflops),
            ("satellite_mass_kg", self.satellite_mass_kg),
            ("compute_efficiency_w_per_tflops", self.compute_efficiency_w_per_tflops),
            ("cost_of_power_eur_per_w", self.cost_of_power_eur_per_w),
            ("cost_of_compute_eur_per_tflops", self.cost_of_compute_eur_per_tflops),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetRow {
    pub label: String,
    pub design: SdcDesign,
    /// Solve this row's compute power fraction instead of taking it as given.
    #[serde(default)]
    pub fit_compute_power_fraction: bool,
    #[serde(default)]
    pub required_compute_tflops: Option<f64>,
    pub cells: TargetCells,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetTable {
    pub rows: Vec<TargetRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResidual {
    pub row: String,
    pub cell: String,
    pub target: f64,
    pub model: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: ForecastParams,
    /// Solved compute power fraction per row label (only fitted rows).
    pub fitted_fractions: BTreeMap<String, f64>,
    pub residuals: Vec<CellResidual>,
    pub max_rel_error: f64,
}

impl CalibrationResult {
    /// Row designs with fitted fractions applied.
    pub fn designs(&self, targets: &TargetTable) -> Vec<SdcDesign> {
        targets
            .rows
            .iter()
            .map(|r| {
                let mut d = r.design.clone();
                if let Some(&f) = self.fitted_fractions.get(&r.label) {
                    d.compute_power_fraction = f;
                }
                d
            })
            .collect()
    }
}

/// One linear observation `coeffs . theta = rhs` tagged with its source cell.
struct Observation {
    coeffs: Vec<f64>,
    rhs: f64,
    cell: String,
}

/// `theta = prior + pinv(A) (b - A prior)` with near-zero singular values
/// discarded.
fn min_deviation_solve(obs: &[Observation], prior: &[f64]) -> Vec<f64> {
    let n = prior.len();
    let a = DMatrix::from_fn(obs.len(), n, |i, j| obs[i].coeffs[j]);
    let b = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.rhs));
    let p = DVector::from_column_slice(prior);
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-10;
    let delta = svd.solve(&(b - &a * &p), tol).expect("SVD with U and V^T computed");
    (p + delta).iter().copied().collect()
}

/// Same as [`min_deviation_solve`] but measuring change relative to each
/// prior; zero priors are held at zero.
fn min_relative_deviation_solve(obs: &[Observation], prior: &[f64]) -> Vec<f64> {
    let scaled: Vec<Observation> = obs
        .iter()
        .map(|o| Observation { coeffs: o.coeffs.iter().zip(prior).map(|(c, p)| c * p).collect(), rhs: o.rhs, cell: o.cell.clone() })
        .collect();
    let z = min_deviation_solve(&scaled, &vec![1.0; prior.len()]);
    z.iter().zip(prior).map(|(z, p)| z * p).collect()
}

fn offending(obs: &[Observation], column: usize) -> Vec<String> {
    let mut cells: Vec<String> = obs.iter().filter(|o| o.coeffs[column] != 0.0).map(|o| o.cell.clone()).collect();
    cells.dedup();
    cells
}

fn check_non_negative(obs: &[Observation], names: &[String], theta: &[f64]) -> Result<(), CalibrationError> {
    for (k, (&v, name)) in theta.iter().zip(names).enumerate() {
        if v < 0.0 {
            return Err(CalibrationError::Infeasible { parameter: name.clone(), value: v, cells: offending(obs, k) });
        }
    }
    Ok(())
}

/// Fit `priors` to `targets`.
pub fn calibrate(targets: &TargetTable, priors: &ForecastParams) -> Result<CalibrationResult, CalibrationError> {
    let rows = &targets.rows;
    let first = rows.first().ok_or(CalibrationError::NoRows)?;
    let kind: ComputeType = first.design.compute_type;
    if rows.iter().any(|r| r.design.compute_type != kind) {
        return Err(CalibrationError::MixedComputeTypes);
    }
    for r in rows {
        for (cell, v) in r.cells.iter() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CalibrationError::InvalidTarget { cell: format!("{}.{cell}", r.label), value: v });
            }
        }
        if let Some(e) = r.design.validate().into_iter().next() {
            return Err(e.into());
        }
    }

    let mut params = priors.clone();
    let scale = params.table2_compute_scale;
    let mut designs: Vec<SdcDesign> = rows.iter().map(|r| r.design.clone()).collect();

    // Stage 1: ln(system efficiency) = ln E + dy ln f - ln fraction
    let eff_prior = params.compute_curves(kind)?.efficiency_w_per_tflops;
    let fitted: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].fit_compute_power_fraction).collect();
    let n1 = 2 + fitted.len();
    let mut obs = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let d = &r.design;
        let mut coeffs = vec![0.0; n1];
        coeffs[0] = 1.0;
        coeffs[1] = (d.year - eff_prior.ref_year) as f64;
        let shift = match fitted.iter().position(|&j| j == i) {
            Some(col) => {
                coeffs[2 + col] = 1.0;
                0.0
            }
            None => d.compute_power_fraction.ln(),
        };
        if let Some(e) = r.cells.compute_efficiency_w_per_tflops {
            obs.push(Observation { coeffs: coeffs.clone(), rhs: e.ln() + shift, cell: format!("{}.compute_efficiency_w_per_tflops", r.label) });
        }
        if let Some(c) = r.cells.available_compute_tflops {
            let sys = d.total_power_w / (c * scale);
            obs.push(Observation { coeffs, rhs: sys.ln() + shift, cell: format!("{}.available_compute_tflops", r.label) });
        }
    }
    let mut fitted_fractions = BTreeMap::new();
    if !obs.is_empty() {
        let mut prior = vec![eff_prior.ref_value.ln(), eff_prior.annual_factor.ln()];
        prior.extend(fitted.iter().map(|&i| -rows[i].design.compute_power_fraction.ln()));
        let theta = min_deviation_solve(&obs, &prior);
        let curves = params.compute.get_mut(&kind).expect("checked above");
        curves.efficiency_w_per_tflops.ref_value = theta[0].exp();
        curves.efficiency_w_per_tflops.annual_factor = theta[1].exp();
        for (col, &i) in fitted.iter().enumerate() {
            let fraction = (-theta[2 + col]).exp();
            if fraction > 1.0 + 1e-9 {
                return Err(CalibrationError::Infeasible {
                    parameter: format!("{}.compute_power_fraction", rows[i].label),
                    value: fraction,
                    cells: offending(&obs, 2 + col),
                });
            }
            let fraction = fraction.min(1.0);
            designs[i].compute_power_fraction = fraction;
            fitted_fractions.insert(rows[i].label.clone(), fraction);
        }
    }

    let raw: Vec<f64> = designs.iter().map(|d| size_compute(d, &params).map(|s| s.raw_tflops)).collect::<Result<_, _>>()?;

    // Stage 2: mass = s * P + raw / density + bus(dest)
    let dests: Vec<Destination> = params.fixed_bus_mass_kg.keys().copied().collect();
    let mass_curve = params.power_system_specific_mass_kg_per_w;
    let density_curve = params.compute_curves(kind)?.density_tflops_per_kg;
    let mut names = vec!["power_system_specific_mass_kg_per_w.ref_value".to_string(), "1/density_tflops_per_kg.ref_value".to_string()];
    names.extend(dests.iter().map(|d| format!("fixed_bus_mass_kg.{d}")));
    let mut obs = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(m) = r.cells.satellite_mass_kg else { continue };
        let d = &designs[i];
        let mut coeffs = vec![0.0; names.len()];
        coeffs[0] = mass_curve.annual_factor.powi(d.year - mass_curve.ref_year) * d.total_power_w / m;
        coeffs[1] = density_curve.annual_factor.powi(-(d.year - density_curve.ref_year)) * raw[i] / m;
        let col = dests.iter().position(|&x| x == d.destination).ok_or(ForecastError::UnknownDestination(d.destination))?;
        coeffs[2 + col] = 1.0 / m;
        obs.push(Observation { coeffs, rhs: 1.0, cell: format!("{}.satellite_mass_kg", r.label) });
    }
    if !obs.is_empty() {
        let mut prior = vec![mass_curve.ref_value, 1.0 / density_curve.ref_value];
        prior.extend(dests.iter().map(|d| params.fixed_bus_mass_kg[d]));
        let theta = min_relative_deviation_solve(&obs, &prior);
        check_non_negative(&obs, &names, &theta)?;
        if theta[1] <= 0.0 {
            return Err(CalibrationError::Infeasible { parameter: names[1].clone(), value: theta[1], cells: offending(&obs, 1) });
        }
        params.power_system_specific_mass_kg_per_w.ref_value = theta[0];
        params.compute.get_mut(&kind).expect("checked above").density_tflops_per_kg.ref_value = 1.0 / theta[1];
        for (k, d) in dests.iter().enumerate() {
            params.fixed_bus_mass_kg.insert(*d, theta[2 + k]);
        }
    }

    let mass: Vec<f64> = designs.iter().zip(&raw).map(|(d, &c)| size_mass(d, c, &params)).collect::<Result<_, _>>()?;

    // Stage 3: total = launch(dest) * mass + hardware * raw + integration
    let launch_dests: Vec<Destination> = params.launch_cost_eur_per_kg.keys().copied().collect();
    let hw_curve = params.compute_curves(kind)?.hardware_cost_eur_per_tflops;
    let mut names: Vec<String> = launch_dests.iter().map(|d| format!("launch_cost_eur_per_kg.{d}.ref_value")).collect();
    names.push("hardware_cost_eur_per_tflops.ref_value".into());
    names.push("fixed_integration_cost_eur".into());
    let nl = launch_dests.len();
    let mut obs = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let d = &designs[i];
        let mut coeffs = vec![0.0; names.len()];
        let col = launch_dests.iter().position(|&x| x == d.destination).ok_or(ForecastError::UnknownDestination(d.destination))?;
        let lc = params.launch_cost_eur_per_kg[&d.destination];
        coeffs[col] = lc.annual_factor.powi(d.year - lc.ref_year) * mass[i];
        coeffs[nl] = hw_curve.annual_factor.powi(d.year - hw_curve.ref_year) * raw[i];
        coeffs[nl + 1] = 1.0;
        let totals = [
            (r.cells.cost_of_power_eur_per_w.map(|v| v * d.total_power_w), "cost_of_power_eur_per_w"),
            (r.cells.cost_of_compute_eur_per_tflops.map(|v| v * raw[i] / scale), "cost_of_compute_eur_per_tflops"),
        ];
        for (total, cell) in totals {
            if let Some(total) = total {
                obs.push(Observation {
                    coeffs: coeffs.iter().map(|c| c / total).collect(),
                    rhs: 1.0,
                    cell: format!("{}.{cell}", r.label),
                });
            }
        }
    }
    if !obs.is_empty() {
        let mut prior: Vec<f64> = launch_dests.iter().map(|d| params.launch_cost_eur_per_kg[d].ref_value).collect();
        prior.push(hw_curve.ref_value);
        prior.push(params.fixed_integration_cost_eur);
        let theta = min_relative_deviation_solve(&obs, &prior);
        check_non_negative(&obs, &names, &theta)?;
        for (k, d) in launch_dests.iter().enumerate() {
            params.launch_cost_eur_per_kg.get_mut(d).expect("key from map").ref_value = theta[k];
        }
        params.compute.get_mut(&kind).expect("checked above").hardware_cost_eur_per_tflops.ref_value = theta[nl];
        params.fixed_integration_cost_eur = theta[nl + 1];
    }

    let mut residuals = Vec::new();
    for (r, d) in rows.iter().zip(&designs) {
        let fom = forecast(d, r.required_compute_tflops, &params)?;
        for (cell, target) in r.cells.iter() {
            let model = match cell {
                "available_compute_tflops" => Some(fom.available_compute_tflops),
                "satellite_mass_kg" => Some(fom.satellite_mass_kg),
                "compute_efficiency_w_per_tflops" => Some(fom.compute_efficiency_w_per_tflops),
                "cost_of_power_eur_per_w" => fom.cost_of_power_eur_per_w,
                "cost_of_compute_eur_per_tflops" => fom.cost_of_compute_eur_per_tflops,
                _ => unreachable!("cell names come from TargetCells::iter"),
            };
            let model = model.unwrap_or(f64::NAN);
            residuals.push(CellResidual { row: r.label.clone(), cell: cell.to_string(), target, model, rel_error: (model / target - 1.0).abs() });
        }
    }
    let max_rel_error = residuals.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(CalibrationResult { params, fitted_fractions, residuals, max_rel_error })
}

#[cfg(test)]
mod tests {
    use super::super::{table2_targets, RoadmapCurve};
    use super::*;
    use approx::assert_relative_eq;

    fn row(label: &str, design: SdcDesign, cells: TargetCells) -> TargetRow {
        TargetRow { label: label.into(), design, fit_compute_power_fraction: false, required_compute_tflops: None, cells }
    }

    fn design(year: i32, power: f64) -> SdcDesign {
        SdcDesign {
            year,
            total_power_w: power,
            compute_type: ComputeType::GpuEquivalent,
            destination: Destination::Leo,
            compute_power_fraction: 1.0,
        }
    }

    #[test]
    fn two_efficiency_points_give_closed_form_factor() {
        let targets = TargetTable {
            rows: vec![
                row("a", design(2032, 500.0), TargetCells { compute_efficiency_w_per_tflops: Some(0.44), ..Default::default() }),
                row("b", design(2040, 500.0), TargetCells { compute_efficiency_w_per_tflops: Some(0.02), ..Default::default() }),
            ],
        };
        let res = calibrate(&targets, &ForecastParams::priors()).unwrap();
        let eff = res.params.compute[&ComputeType::GpuEquivalent].efficiency_w_per_tflops;
        let closed = RoadmapCurve::through((2032, 0.44), (2040, 0.02)).unwrap();
        assert_relative_eq!(eff.annual_factor, closed.annual_factor, max_relative = 1e-10);
        assert!((eff.annual_factor - 0.679).abs() < 1e-3);
        assert!(res.max_rel_error < 1e-10);
        // untouched stages keep their priors
        assert_eq!(res.params.launch_cost_eur_per_kg, ForecastParams::priors().launch_cost_eur_per_kg);
    }

    #[test]
    fn exact_model_target_has_zero_residual() {
        let params = ForecastParams::shipped();
        let d = SdcDesign { destination: Destination::Geo, ..design(2036, 750.0) };
        let f = forecast(&d, None, &params).unwrap();
        let targets = TargetTable {
            rows: vec![row(
                "model",
                d,
                TargetCells {
                    available_compute_tflops: Some(f.available_compute_tflops),
                    satellite_mass_kg: Some(f.satellite_mass_kg),
                    compute_efficiency_w_per_tflops: Some(f.compute_efficiency_w_per_tflops),
                    cost_of_power_eur_per_w: f.cost_of_power_eur_per_w,
                    cost_of_compute_eur_per_tflops: f.cost_of_compute_eur_per_tflops,
                },
            )],
        };
        let res = calibrate(&targets, &params).unwrap();
        assert!(res.max_rel_error < 1e-9, "{}", res.max_rel_error);
    }

    #[test]
    fn infeasible_fraction_reported_with_cells() {
        // a fitted row whose efficiency is better than the curve needs fraction > 1
        let mut fitted = row("b", design(2032, 500.0), TargetCells { compute_efficiency_w_per_tflops: Some(0.2), ..Default::default() });
        fitted.fit_compute_power_fraction = true;
        let targets = TargetTable {
            rows: vec![
                row("a", design(2032, 500.0), TargetCells { compute_efficiency_w_per_tflops: Some(0.44), ..Default::default() }),
                row("c", design(2040, 500.0), TargetCells { compute_efficiency_w_per_tflops: Some(0.02), ..Default::default() }),
                fitted,
            ],
        };
        match calibrate(&targets, &ForecastParams::priors()) {
            Err(CalibrationError::Infeasible { parameter, cells, .. }) => {
                assert_eq!(parameter, "b.compute_power_fraction");
                assert_eq!(cells, vec!["b.compute_efficiency_w_per_tflops".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_mass_coefficient_is_infeasible() {
        // mass falling with power forces a negative per-watt coefficient
        let targets = TargetTable {
            rows: vec![
                row("a", design(2032, 500.0), TargetCells { satellite_mass_kg: Some(100.0), ..Default::default() }),
                row("b", design(2032, 2000.0), TargetCells { satellite_mass_kg: Some(10.0), ..Default::default() }),
            ],
        };
        let mut priors = ForecastParams::priors();
        priors.fixed_bus_mass_kg.insert(Destination::Leo, 5.0);
        assert!(matches!(calibrate(&targets, &priors), Err(CalibrationError::Infeasible { .. })));
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(calibrate(&TargetTable { rows: vec![] }, &ForecastParams::priors()), Err(CalibrationError::NoRows));
        let bad = TargetTable {
            rows: vec![row("a", design(2032, 500.0), TargetCells { satellite_mass_kg: Some(-1.0), ..Default::default() })],
        };
        assert!(matches!(calibrate(&bad, &ForecastParams::priors()), Err(CalibrationError::InvalidTarget { .. })));
        let mut mixed = table2_targets();
        mixed.rows[1].design.compute_type = ComputeType::Cpu;
        assert_eq!(calibrate(&mixed, &ForecastParams::priors()), Err(CalibrationError::MixedComputeTypes));
    }

    #[test]
    fn shipped_defaults_are_the_calibration_output() {
        let res = calibrate(&table2_targets(), &ForecastParams::priors()).unwrap();
        let shipped = ForecastParams::shipped();
        let a = serde_json::to_value(&res.params).unwrap();
        let b = serde_json::to_value(&shipped).unwrap();
        fn close(a: &serde_json::Value, b: &serde_json::Value) -> bool {
            match (a, b) {
                (serde_json::Value::Number(x), serde_json::Value::Number(y)) => {
                    let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                    (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300)
                }
                (serde_json::Value::Object(x), serde_json::Value::Object(y)) => {
                    x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w)))
                }
                _ => a == b,
            }
        }
        assert!(close(&a, &b), "shipped parameters drifted from calibration output:\n{}", serde_json::to_string_pretty(&res.params).unwrap());
        assert!(res.max_rel_error <= 0.05);
    }
}
