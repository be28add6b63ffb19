//! Scenario files, orchestrated runs, reports and sweeps.
//!
//! A scenario is a JSON document. Every section is optional and falls back
//! to the defaults below; unknown keys are rejected.
//!
//! ```json
//! {
//!   "name": "uc1",
//!   "constellation": { "planes": 20, "sats_per_plane": 10, "inclination_deg": 53.0,
//!                      "altitude_km": 550.0, "raan_spread_deg": 360.0, "walker_phasing": 1 },
//!   "clients": [ { "kind": "leo_pair" } ],
//!   "ground_stations": [ { "name": "gs", "lat_deg": 48.0, "lon_deg": 11.0 } ],
//!   "time": { "start_day_of_year": 80, "horizon_s": null, "step_s": 10.0 },
//!   "sun": { "model": "circular_ecliptic" },
//!   "links": { "policy": "receiver_only", "exclusion_angle_deg": 30.0, "max_range_km": 6000.0,
//!              "client_max_range_km": 5000.0, "grazing_margin_km": 100.0, "inter_ring_per_side": 1 },
//!   "routing": { "pairs": [["S0.0", "S0.1"]], "per_hop_delay_s": 0.0, "forced_down": [] },
//!   "outage": { "stream_rate_mbps": null, "extra_links": [] },
//!   "routers": { "persistence_threshold": 0.9 },
//!   "workload": { "preset": "uc1" },
//!   "design": { "year": 2032, "total_power_w": 500.0 },
//!   "analyses": ["topology", "outage", "routing", "workload", "forecast"],
//!   "output": { "dir": null, "format": "json" }
//! }
//! ```
//!
//! Resolution fills the remaining gaps: a missing horizon becomes one orbital
//! period of the slowest plane, missing routing pairs become both directions
//! of the first intra-ring link, a missing stream rate becomes the workload's
//! per-source rate (0 without a workload), and workload presets are expanded
//! into explicit parameters. Resolving a resolved scenario is a no-op.

mod emit;
mod presets;
mod run;
mod sweep;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{build_client, AstroError, build_sdc_constellation, ClientConfig, ConstellationConfig, GroundStation, SunModel, TimeGrid};
use crate::forecast::SdcDesign;
use crate::isl::{LinkKind, LinkParams, NodeId, Scene};
use crate::workload::{self, ImagingWorkload};

pub use emit::{emit, report_json, scenario_json, OutputFormat, CSV_TABLES};
pub use presets::{preset_names, preset_scenario, preset_source, PRESET_DIR_ENV};
pub use run::{run, Report, RoutingSummary, SnapshotMeta, TopologySummary};
pub use sweep::{sweep, SweepResult, SweepRow};

/// One problem found while loading or validating a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    /// Dotted path of the offending field.
    pub field: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { field: field.into(), message: message.to_string() }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario:\n  {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<ValidationIssue>),
    #[error("{analysis} analysis failed: {message}")]
    Analysis { analysis: Analysis, message: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

impl ScenarioError {
    /// Process exit code: 1 for input problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse { .. } | ScenarioError::Invalid(_) | ScenarioError::UnknownPreset(_) => 1,
            ScenarioError::Io { .. } | ScenarioError::Analysis { .. } => 2,
        }
    }

    /// Field-path diagnostics for API responses.
    pub fn issues(&self) -> Vec<ValidationIssue> {
        match self {
            ScenarioError::Invalid(v) => v.clone(),
            ScenarioError::Parse { line, column, message } => {
                vec![ValidationIssue::new("", format!("line {line}, column {column}: {message}"))]
            }
            ScenarioError::UnknownPreset(name) => vec![ValidationIssue::new("workload.preset", format!("unknown preset {name:?}"))],
            ScenarioError::Analysis { analysis, message } => vec![ValidationIssue::new(analysis.to_string(), message)],
            ScenarioError::Io { path, message } => vec![ValidationIssue::new(path.clone(), message)],
        }
    }

    fn parse(e: &serde_json::Error) -> Self {
        ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Topology,
    Outage,
    Routing,
    Workload,
    Forecast,
}

impl Analysis {
    /// Execution order.
    pub const ALL: [Analysis; 5] = [Analysis::Topology, Analysis::Outage, Analysis::Routing, Analysis::Workload, Analysis::Forecast];

    pub fn needs_orbits(self) -> bool {
        matches!(self, Analysis::Topology | Analysis::Outage | Analysis::Routing)
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Analysis::Topology => "topology",
            Analysis::Outage => "outage",
            Analysis::Routing => "routing",
            Analysis::Workload => "workload",
            Analysis::Forecast => "forecast",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub start_day_of_year: u16,
    /// `None` resolves to one orbital period.
    pub horizon_s: Option<f64>,
    pub step_s: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { start_day_of_year: 80, horizon_s: None, step_s: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingConfig {
    /// `(src, dst)` pairs; `None` resolves to both directions of `S0.0-S0.1`.
    pub pairs: Option<Vec<(NodeId, NodeId)>>,
    /// Processing delay added per hop, seconds.
    pub per_hop_delay_s: f64,
    /// Directed links forced down at every epoch.
    pub forced_down: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub tx: NodeId,
    pub rx: NodeId,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutageConfig {
    /// Stream to buffer, MB/s; `None` resolves from the workload.
    pub stream_rate_mbps: Option<f64>,
    /// Links tracked in addition to every intra-ring link.
    pub extra_links: Vec<LinkSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutersConfig {
    pub persistence_threshold: f64,
}

impl Default for RoutersConfig {
    fn default() -> Self {
        Self { persistence_threshold: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadSpec {
    Preset(String),
    Custom(ImagingWorkload),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub format: OutputFormat,
}

fn all_analyses() -> BTreeSet<Analysis> {
    Analysis::ALL.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub constellation: ConstellationConfig,
    #[serde(default)]
    pub clients: Vec<ClientConfig>,
    #[serde(default)]
    pub ground_stations: Vec<GroundStation>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub sun: SunModel,
    #[serde(default)]
    pub links: LinkParams,
    #[serde(default)]
    pub routing: RoutingConfig,
    #[serde(default)]
    pub outage: OutageConfig,
    #[serde(default)]
    pub routers: RoutersConfig,
    #[serde(default)]
    pub workload: Option<WorkloadSpec>,
    #[serde(default)]
    pub design: Option<SdcDesign>,
    #[serde(default = "all_analyses")]
    pub analyses: BTreeSet<Analysis>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: String::new(),
            constellation: ConstellationConfig::default(),
            clients: Vec::new(),
            ground_stations: Vec::new(),
            time: TimeConfig::default(),
            sun: SunModel::default(),
            links: LinkParams::default(),
            routing: RoutingConfig::default(),
            outage: OutageConfig::default(),
            routers: RoutersConfig::default(),
            workload: None,
            design: None,
            analyses: all_analyses(),
            output: OutputConfig::default(),
        }
    }
}

/// Parse, resolve and validate a scenario from JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::parse(&e))?;
    raw.resolve()
}

/// Read a scenario file; see [`parse_scenario`].
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text)
}

impl Scenario {
    /// Fill every default and check all constraints.
    pub fn resolve(mut self) -> Result<Self, ScenarioError> {
        let mut issues = Vec::new();
        if let Some(WorkloadSpec::Preset(name)) = &self.workload {
            match workload::preset(name) {
                Ok(w) => self.workload = Some(WorkloadSpec::Custom(w)),
                Err(e) => issues.push(ValidationIssue::new("workload.preset", e)),
            }
        }
        let constellation = match build_sdc_constellation(&self.constellation) {
            Ok(c) => Some(c),
            Err(e) => {
                issues.push(ValidationIssue::new("constellation", e));
                None
            }
        };
        if self.time.horizon_s.is_none() {
            if let Some(c) = &constellation {
                self.time.horizon_s = Some(c.max_period_s());
            }
        }
        if self.routing.pairs.is_none() {
            let (a, b) = (NodeId::sat(0, 0), NodeId::sat(0, 1));
            self.routing.pairs = Some(if self.constellation.sats_per_plane > 1 { vec![(a, b), (b, a)] } else { Vec::new() });
        }
        if self.outage.stream_rate_mbps.is_none() {
            let rate = match &self.workload {
                Some(WorkloadSpec::Custom(w)) => workload::stream_rate(w).unwrap_or(0.0),
                _ => 0.0,
            };
            self.outage.stream_rate_mbps = Some(rate);
        }
        issues.extend(self.validate_resolved(constellation.is_some()));
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(ScenarioError::Invalid(issues))
        }
    }

    fn validate_resolved(&self, constellation_ok: bool) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let horizon = self.time.horizon_s.unwrap_or(f64::NAN);
        if let Err(e) = TimeGrid::new(self.time.start_day_of_year, horizon, self.time.step_s) {
            let field = match e {
                AstroError::InvalidDayOfYear(_) => "time.start_day_of_year",
                _ if !(self.time.step_s > 0.0 && self.time.step_s.is_finite()) => "time.step_s",
                _ => "time.horizon_s",
            };
            issues.push(ValidationIssue::new(field, e));
        }
        if let Err(e) = self.sun.validate() {
            issues.push(ValidationIssue::new("sun.direction", e));
        }
        issues.extend(self.links.validate().into_iter().map(|m| ValidationIssue::new("links", m)));
        for (i, c) in self.clients.iter().enumerate() {
            if let Err(e) = build_client(c) {
                issues.push(ValidationIssue::new(format!("clients[{i}]"), e));
            }
        }
        for (i, g) in self.ground_stations.iter().enumerate() {
            if !(-90.0..=90.0).contains(&g.lat_deg) || !g.lon_deg.is_finite() || !g.min_elevation_deg.is_finite() {
                issues.push(ValidationIssue::new(format!("ground_stations[{i}]"), "latitude must lie in [-90, 90] and angles be finite"));
            }
        }
        if !(self.routing.per_hop_delay_s >= 0.0 && self.routing.per_hop_delay_s.is_finite()) {
            issues.push(ValidationIssue::new("routing.per_hop_delay_s", "must be non-negative"));
        }
        let rate = self.outage.stream_rate_mbps.unwrap_or(0.0);
        if !(rate >= 0.0 && rate.is_finite()) {
            issues.push(ValidationIssue::new("outage.stream_rate_mbps", "must be non-negative"));
        }
        let t = self.routers.persistence_threshold;
        if !(t > 0.0 && t <= 1.0) {
            issues.push(ValidationIssue::new("routers.persistence_threshold", "must lie in (0, 1]"));
        }
        if constellation_ok {
            if let Ok(scene) = self.scene() {
                let mut refs: Vec<(String, NodeId)> = Vec::new();
                for (i, (a, b)) in self.routing.pairs.iter().flatten().enumerate() {
                    refs.push((format!("routing.pairs[{i}][0]"), *a));
                    refs.push((format!("routing.pairs[{i}][1]"), *b));
                }
                for (i, (a, b)) in self.routing.forced_down.iter().enumerate() {
                    refs.push((format!("routing.forced_down[{i}][0]"), *a));
                    refs.push((format!("routing.forced_down[{i}][1]"), *b));
                }
                for (i, l) in self.outage.extra_links.iter().enumerate() {
                    refs.push((format!("outage.extra_links[{i}].tx"), l.tx));
                    refs.push((format!("outage.extra_links[{i}].rx"), l.rx));
                    if l.tx == l.rx {
                        issues.push(ValidationIssue::new(format!("outage.extra_links[{i}]"), "link endpoints must differ"));
                    }
                }
                for (field, node) in refs {
                    if !scene.contains(node) {
                        issues.push(ValidationIssue::new(field, format!("unknown node {node}")));
                    }
                }
            }
        }
        if let Some(WorkloadSpec::Custom(w)) = &self.workload {
            issues.extend(w.validate().into_iter().map(|e| ValidationIssue::new("workload.custom", e)));
        }
        if let Some(d) = &self.design {
            issues.extend(d.validate().into_iter().map(|e| ValidationIssue::new(e.field(), e)));
        }
        if self.analyses.contains(&Analysis::Workload) && self.workload.is_none() {
            issues.push(ValidationIssue::new("workload", "the workload analysis needs a workload"));
        }
        if self.analyses.contains(&Analysis::Forecast) && self.design.is_none() {
            issues.push(ValidationIssue::new("design", "the forecast analysis needs a design"));
        }
        issues
    }

    /// Resolved workload parameters, if any.
    pub fn workload(&self) -> Option<&ImagingWorkload> {
        match &self.workload {
            Some(WorkloadSpec::Custom(w)) => Some(w),
            _ => None,
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid, ScenarioError> {
        let horizon = self.time.horizon_s.ok_or_else(|| {
            ScenarioError::Invalid(vec![ValidationIssue::new("time.horizon_s", "unresolved horizon")])
        })?;
        TimeGrid::new(self.time.start_day_of_year, horizon, self.time.step_s)
            .map_err(|e| ScenarioError::Invalid(vec![ValidationIssue::new("time", e)]))
    }

    /// Constellation, clients, ground stations and Sun as one scene.
    pub fn scene(&self) -> Result<Scene, ScenarioError> {
        let invalid = |field: &str, e: &dyn fmt::Display| ScenarioError::Invalid(vec![ValidationIssue::new(field, e)]);
        let constellation = build_sdc_constellation(&self.constellation).map_err(|e| invalid("constellation", &e))?;
        let mut scene = Scene::new(constellation).with_sun(self.sun.clone());
        for (i, c) in self.clients.iter().enumerate() {
            scene.clients.extend(build_client(c).map_err(|e| invalid(&format!("clients[{i}]"), &e))?);
        }
        scene.ground = self.ground_stations.clone();
        Ok(scene)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_resolves_to_defaults() {
        let s = parse_scenario("{\"analyses\": [\"topology\"]}").unwrap();
        assert_eq!(s.constellation, ConstellationConfig::default());
        let period = s.time.horizon_s.unwrap();
        assert!((period - 5736.0).abs() < 10.0, "{period}");
        assert_eq!(s.routing.pairs.as_ref().unwrap().len(), 2);
        assert_eq!(s.outage.stream_rate_mbps, Some(0.0));
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_scenario(""), Err(ScenarioError::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        match parse_scenario("{\n  \"time\": {\"step\": 5}\n}") {
            Err(ScenarioError::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("step"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_violation_is_listed() {
        let text = r#"{
            "time": {"step_s": -1.0},
            "links": {"exclusion_angle_deg": 200.0},
            "routing": {"pairs": [["S0.0", "S99.0"]]},
            "workload": {"preset": "uc9"},
            "design": {"year": 2100, "total_power_w": 0.0}
        }"#;
        let ScenarioError::Invalid(issues) = parse_scenario(text).unwrap_err() else { panic!() };
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        for f in ["workload.preset", "time.step_s", "links", "routing.pairs[0][1]", "design.year", "design.total_power_w"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn step_equal_to_horizon_is_valid() {
        let s = parse_scenario(r#"{"time": {"horizon_s": 10.0, "step_s": 10.0}, "analyses": ["topology"]}"#).unwrap();
        assert_eq!(s.time_grid().unwrap().len(), 1);
    }

    #[test]
    fn resolution_is_idempotent() {
        let s = parse_scenario(r#"{"workload": {"preset": "uc2"}, "design": {"year": 2032, "total_power_w": 2000.0}}"#).unwrap();
        assert!(matches!(s.workload, Some(WorkloadSpec::Custom(_))));
        assert!((s.outage.stream_rate_mbps.unwrap() - 2.5).abs() < 1e-12);
        let again = parse_scenario(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn analyses_need_their_inputs() {
        let ScenarioError::Invalid(issues) = parse_scenario(r#"{"analyses": ["workload", "forecast"]}"#).unwrap_err() else { panic!() };
        assert_eq!(issues.len(), 2);
    }
}
