//! Roadmap-driven design forecasting: available compute, satellite mass and
//! cost figures of merit.
//!
//! Technology trends are exponential curves anchored at a reference year.
//! Compute is sized from the power envelope and a W/TFLOPS efficiency; the
//! printed compute figure follows the reference table's column convention
//! (`power / efficiency / 1000`, see [`ForecastParams::table2_compute_scale`]).

mod calibrate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calibrate::{calibrate, CalibrationError, CalibrationResult, CellResidual, TargetCells, TargetRow, TargetTable};

/// Years covered by the roadmap curves.
pub const VALID_YEARS: std::ops::RangeInclusive<i32> = 2024..=2060;

const SHIPPED_PARAMS: &str = include_str!("../../data/forecast_params.json");
const SHIPPED_PRIORS: &str = include_str!("../../data/roadmap_priors.json");
const SHIPPED_TARGETS: &str = include_str!("../../data/table2_targets.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("year {0} is outside the roadmap validity range 2024-2060")]
    YearOutOfRange(i32),
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("compute_power_fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("no roadmap curves for compute type {0}")]
    UncalibratedComputeType(ComputeType),
    #[error("no launch cost curve for destination {0}")]
    UnknownDestination(Destination),
    #[error("curve through ({0}, {1}) and ({2}, {3}) needs distinct years and positive values")]
    DegenerateCurve(i32, f64, i32, f64),
}

impl ForecastError {
    /// Field path the error refers to, for API diagnostics.
    pub fn field(&self) -> &'static str {
        match self {
            ForecastError::YearOutOfRange(_) => "design.year",
            ForecastError::NonPositive { field, .. } => field,
            ForecastError::InvalidFraction(_) => "design.compute_power_fraction",
            ForecastError::UncalibratedComputeType(_) => "design.compute_type",
            ForecastError::UnknownDestination(_) => "design.destination",
            ForecastError::DegenerateCurve(..) => "roadmap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComputeType {
    GpuEquivalent,
    Cpu,
    Fpga,
    Asic,
}

impl fmt::Display for ComputeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComputeType::GpuEquivalent => "gpu_equivalent",
            ComputeType::Cpu => "cpu",
            ComputeType::Fpga => "fpga",
            ComputeType::Asic => "asic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destination {
    Leo,
    Geo,
    LunarSurface,
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Destination::Leo => "leo",
            Destination::Geo => "geo",
            Destination::LunarSurface => "lunar_surface",
        })
    }
}

/// Constant annual improvement: `value(y) = ref_value * annual_factor^(y - ref_year)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadmapCurve {
    pub ref_year: i32,
    pub ref_value: f64,
    pub annual_factor: f64,
}

impl RoadmapCurve {
    pub const fn new(ref_year: i32, ref_value: f64, annual_factor: f64) -> Self {
        Self { ref_year, ref_value, annual_factor }
    }

    /// The exponential through two (year, value) points.
    pub fn through(a: (i32, f64), b: (i32, f64)) -> Result<Self, ForecastError> {
        if a.0 == b.0 || !(a.1 > 0.0) || !(b.1 > 0.0) {
            return Err(ForecastError::DegenerateCurve(a.0, a.1, b.0, b.1));
        }
        let factor = (b.1 / a.1).powf(1.0 / (b.0 - a.0) as f64);
        Ok(Self::new(a.0, a.1, factor))
    }

    /// Unchecked evaluation.
    pub fn at(&self, year: i32) -> f64 {
        self.ref_value * self.annual_factor.powi(year - self.ref_year)
    }
}

pub fn check_year(year: i32) -> Result<(), ForecastError> {
    if VALID_YEARS.contains(&year) {
        Ok(())
    } else {
        Err(ForecastError::YearOutOfRange(year))
    }
}

/// Curve value at `year`, rejecting years outside [`VALID_YEARS`].
pub fn roadmap_value(curve: &RoadmapCurve, year: i32) -> Result<f64, ForecastError> {
    check_year(year)?;
    Ok(curve.at(year))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeCurves {
    /// Chip-level W/TFLOPS.
    pub efficiency_w_per_tflops: RoadmapCurve,
    pub density_tflops_per_kg: RoadmapCurve,
    pub hardware_cost_eur_per_tflops: RoadmapCurve,
}

/// Complete parameter set of the forecasting model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastParams {
    /// Divisor turning `power / efficiency` into the printed compute figure.
    pub table2_compute_scale: f64,
    pub compute: BTreeMap<ComputeType, ComputeCurves>,
    pub power_system_specific_mass_kg_per_w: RoadmapCurve,
    /// Listed for exploration; not part of the mass model.
    pub battery_specific_energy_wh_per_kg: RoadmapCurve,
    pub launch_cost_eur_per_kg: BTreeMap<Destination, RoadmapCurve>,
    pub fixed_bus_mass_kg: BTreeMap<Destination, f64>,
    pub fixed_integration_cost_eur: f64,
}

impl ForecastParams {
    /// Calibrated defaults shipped with the crate.
    pub fn shipped() -> Self {
        serde_json::from_str(SHIPPED_PARAMS).expect("shipped forecast parameters parse")
    }

    /// Uncalibrated priors the shipped defaults were derived from.
    pub fn priors() -> Self {
        serde_json::from_str(SHIPPED_PRIORS).expect("shipped roadmap priors parse")
    }

    pub fn compute_curves(&self, kind: ComputeType) -> Result<&ComputeCurves, ForecastError> {
        self.compute.get(&kind).ok_or(ForecastError::UncalibratedComputeType(kind))
    }

    pub fn launch_curve(&self, dest: Destination) -> Result<&RoadmapCurve, ForecastError> {
        self.launch_cost_eur_per_kg.get(&dest).ok_or(ForecastError::UnknownDestination(dest))
    }

    pub fn bus_mass(&self, dest: Destination) -> Result<f64, ForecastError> {
        self.fixed_bus_mass_kg.get(&dest).copied().ok_or(ForecastError::UnknownDestination(dest))
    }

    /// Flat listing of every curve, for display.
    pub fn roadmaps(&self) -> Vec<RoadmapEntry> {
        let mut out = Vec::new();
        for (kind, c) in &self.compute {
            let q = Some(kind.to_string());
            out.push(RoadmapEntry { metric: Metric::ComputeEfficiencyWPerTflops, qualifier: q.clone(), curve: c.efficiency_w_per_tflops });
            out.push(RoadmapEntry { metric: Metric::ComputeDensityTflopsPerKg, qualifier: q.clone(), curve: c.density_tflops_per_kg });
            out.push(RoadmapEntry { metric: Metric::HardwareCostEurPerTflops, qualifier: q, curve: c.hardware_cost_eur_per_tflops });
        }
        out.push(RoadmapEntry {
            metric: Metric::PowerSystemSpecificMassKgPerW,
            qualifier: None,
            curve: self.power_system_specific_mass_kg_per_w,
        });
        out.push(RoadmapEntry { metric: Metric::BatterySpecificEnergyWhPerKg, qualifier: None, curve: self.battery_specific_energy_wh_per_kg });
        for (dest, curve) in &self.launch_cost_eur_per_kg {
            out.push(RoadmapEntry { metric: Metric::LaunchCostEurPerKg, qualifier: Some(dest.to_string()), curve: *curve });
        }
        out
    }
}

impl Default for ForecastParams {
    fn default() -> Self {
        Self::shipped()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ComputeEfficiencyWPerTflops,
    ComputeDensityTflopsPerKg,
    PowerSystemSpecificMassKgPerW,
    LaunchCostEurPerKg,
    HardwareCostEurPerTflops,
    BatterySpecificEnergyWhPerKg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadmapEntry {
    pub metric: Metric,
    /// Compute type or destination the curve belongs to.
    pub qualifier: Option<String>,
    pub curve: RoadmapCurve,
}

/// Design inputs of one SDC satellite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdcDesign {
    pub year: i32,
    pub total_power_w: f64,
    #[serde(default = "default_compute_type")]
    pub compute_type: ComputeType,
    #[serde(default = "default_destination")]
    pub destination: Destination,
    /// Share of the power envelope available to compute.
    #[serde(default = "default_fraction")]
    pub compute_power_fraction: f64,
}

fn default_compute_type() -> ComputeType {
    ComputeType::GpuEquivalent
}
fn default_destination() -> Destination {
    Destination::Leo
}
fn default_fraction() -> f64 {
    1.0
}

impl SdcDesign {
    pub fn validate(&self) -> Vec<ForecastError> {
        let mut errs = Vec::new();
        if let Err(e) = check_year(self.year) {
            errs.push(e);
        }
        if !(self.total_power_w > 0.0 && self.total_power_w.is_finite()) {
            errs.push(ForecastError::NonPositive { field: "design.total_power_w", value: self.total_power_w });
        }
        if !(self.compute_power_fraction > 0.0 && self.compute_power_fraction <= 1.0) {
            errs.push(ForecastError::InvalidFraction(self.compute_power_fraction));
        }
        errs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputeSizing {
    /// `fraction * power / chip efficiency`.
    pub raw_tflops: f64,
    /// Printed convention, `raw / table2_compute_scale`.
    pub available_tflops: f64,
    pub chip_efficiency_w_per_tflops: f64,
    /// Total power per raw TFLOPS.
    pub system_efficiency_w_per_tflops: f64,
}

pub fn size_compute(design: &SdcDesign, params: &ForecastParams) -> Result<ComputeSizing, ForecastError> {
    let chip = roadmap_value(&params.compute_curves(design.compute_type)?.efficiency_w_per_tflops, design.year)?;
    if !(chip > 0.0) {
        return Err(ForecastError::NonPositive { field: "roadmap.efficiency_w_per_tflops", value: chip });
    }
    let raw_tflops = design.compute_power_fraction * design.total_power_w / chip;
    Ok(ComputeSizing {
        raw_tflops,
        available_tflops: raw_tflops / params.table2_compute_scale,
        chip_efficiency_w_per_tflops: chip,
        system_efficiency_w_per_tflops: chip / design.compute_power_fraction,
    })
}

/// Power system plus compute hardware plus the destination's fixed bus.
pub fn size_mass(design: &SdcDesign, raw_tflops: f64, params: &ForecastParams) -> Result<f64, ForecastError> {
    let specific = roadmap_value(&params.power_system_specific_mass_kg_per_w, design.year)?;
    let density = roadmap_value(&params.compute_curves(design.compute_type)?.density_tflops_per_kg, design.year)?;
    let compute_mass = if raw_tflops == 0.0 { 0.0 } else { raw_tflops / density };
    Ok(specific * design.total_power_w + compute_mass + params.bus_mass(design.destination)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSizing {
    pub total_cost_eur: f64,
    pub launch_cost_eur: f64,
    pub hardware_cost_eur: f64,
    /// `None` when the power envelope is zero.
    pub cost_of_power_eur_per_w: Option<f64>,
    /// `None` when no compute is available.
    pub cost_of_compute_eur_per_tflops: Option<f64>,
}

pub fn size_cost(design: &SdcDesign, mass_kg: f64, raw_tflops: f64, params: &ForecastParams) -> Result<CostSizing, ForecastError> {
    let launch = roadmap_value(params.launch_curve(design.destination)?, design.year)?;
    let hardware = roadmap_value(&params.compute_curves(design.compute_type)?.hardware_cost_eur_per_tflops, design.year)?;
    let launch_cost_eur = mass_kg * launch;
    let hardware_cost_eur = hardware * raw_tflops;
    let total_cost_eur = launch_cost_eur + hardware_cost_eur + params.fixed_integration_cost_eur;
    let available = raw_tflops / params.table2_compute_scale;
    Ok(CostSizing {
        total_cost_eur,
        launch_cost_eur,
        hardware_cost_eur,
        cost_of_power_eur_per_w: (design.total_power_w > 0.0).then(|| total_cost_eur / design.total_power_w),
        cost_of_compute_eur_per_tflops: (available > 0.0).then(|| total_cost_eur / available),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiguresOfMerit {
    pub year: i32,
    pub total_power_w: f64,
    /// Printed compute figure.
    pub available_compute_tflops: f64,
    pub raw_compute_tflops: f64,
    pub required_compute_tflops: Option<f64>,
    pub shortfall: bool,
    pub satellite_mass_kg: f64,
    /// System-level W/TFLOPS (total power over raw compute).
    pub compute_efficiency_w_per_tflops: f64,
    pub chip_efficiency_w_per_tflops: f64,
    pub cost_of_power_eur_per_w: Option<f64>,
    pub cost_of_compute_eur_per_tflops: Option<f64>,
    pub total_cost_eur: f64,
    pub launch_cost_eur: f64,
    pub hardware_cost_eur: f64,
}

/// Size a design and compare it with an optional compute requirement.
pub fn forecast(design: &SdcDesign, required_compute_tflops: Option<f64>, params: &ForecastParams) -> Result<FiguresOfMerit, ForecastError> {
    if let Some(e) = design.validate().into_iter().next() {
        return Err(e);
    }
    let compute = size_compute(design, params)?;
    let mass = size_mass(design, compute.raw_tflops, params)?;
    let cost = size_cost(design, mass, compute.raw_tflops, params)?;
    Ok(FiguresOfMerit {
        year: design.year,
        total_power_w: design.total_power_w,
        available_compute_tflops: compute.available_tflops,
        raw_compute_tflops: compute.raw_tflops,
        required_compute_tflops,
        shortfall: required_compute_tflops.is_some_and(|r| compute.available_tflops < r),
        satellite_mass_kg: mass,
        compute_efficiency_w_per_tflops: compute.system_efficiency_w_per_tflops,
        chip_efficiency_w_per_tflops: compute.chip_efficiency_w_per_tflops,
        cost_of_power_eur_per_w: cost.cost_of_power_eur_per_w,
        cost_of_compute_eur_per_tflops: cost.cost_of_compute_eur_per_tflops,
        total_cost_eur: cost.total_cost_eur,
        launch_cost_eur: cost.launch_cost_eur,
        hardware_cost_eur: cost.hardware_cost_eur,
    })
}

/// Reference table targets shipped with the crate.
pub fn table2_targets() -> TargetTable {
    serde_json::from_str(SHIPPED_TARGETS).expect("shipped calibration targets parse")
}
