use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Analysis, Scenario, ScenarioError};
use crate::forecast::{forecast, FiguresOfMerit, ForecastParams};
use crate::isl::{contact_intervals, DirectedLink, LinkKind, LinkStatus, NodeId, Scene};
use crate::netsim::{
    buffer_requirements, classify_routers, edge_roles, latency_over, snapshot, LatencyStats, OutageReport, RouterClass, RouterRole,
    TopologySnapshot,
};
use crate::workload::{assess, WorkloadAssessment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    /// Geometrically feasible directed links.
    pub links: usize,
    pub up_links: usize,
    pub sun_blocked_links: usize,
    pub strongly_connected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySummary {
    pub nodes: usize,
    pub horizon_s: f64,
    pub step_s: f64,
    /// Share of snapshots in which every node reaches every other node.
    pub connected_fraction: f64,
    pub quasi_static_links: usize,
    pub dynamic_links: usize,
    pub snapshots: Vec<SnapshotMeta>,
    pub routers: Vec<RouterClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingSummary {
    pub per_hop_delay_s: f64,
    pub pairs: Vec<LatencyStats>,
    /// Pair with the largest worst-case latency.
    pub worst: Option<LatencyStats>,
}

/// Results of one scenario run. Sections are present only for requested
/// analyses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the report serialized with this field empty.
    pub content_hash: String,
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outage: Option<OutageReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadAssessment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast: Option<FiguresOfMerit>,
}

impl Report {
    fn compute_hash(&self) -> String {
        let mut unhashed = self.clone();
        unhashed.content_hash.clear();
        let bytes = serde_json::to_vec(&unhashed).expect("report serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Whether `content_hash` matches the content.
    pub fn verify_hash(&self) -> bool {
        self.content_hash == self.compute_hash()
    }
}

fn failed(analysis: Analysis, e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Analysis { analysis, message: e.to_string() }
}

/// Every intra-ring directed link, both directions, in plane/slot order.
fn ring_links(scene: &Scene) -> Vec<DirectedLink> {
    let mut out = Vec::new();
    for (p, plane) in scene.constellation.planes().iter().enumerate() {
        let n = plane.n_sats;
        if n < 2 {
            continue;
        }
        for s in 0..n {
            let a = NodeId::sat(p as u16, s as u16);
            let b = NodeId::sat(p as u16, ((s + 1) % n) as u16);
            for link in [DirectedLink::new(a, b, LinkKind::IntraRing), DirectedLink::new(b, a, LinkKind::IntraRing)].into_iter().flatten() {
                if !out.contains(&link) {
                    out.push(link);
                }
            }
        }
    }
    out
}

/// Execute the requested analyses in order: topology, outage, routing,
/// workload, forecast. Runs on the calling thread.
pub fn run(scenario: &Scenario) -> Result<Report, ScenarioError> {
    run_with(scenario, &ForecastParams::shipped())
}

pub(crate) fn run_with(scenario: &Scenario, params: &ForecastParams) -> Result<Report, ScenarioError> {
    let scenario = scenario.clone().resolve()?;
    let wants = |a: Analysis| scenario.analyses.contains(&a);
    let mut report = Report {
        tool: "sdc".into(),
        version: crate::VERSION.into(),
        content_hash: String::new(),
        scenario: scenario.clone(),
        topology: None,
        outage: None,
        routing: None,
        workload: None,
        forecast: None,
    };

    if scenario.analyses.iter().any(|a| a.needs_orbits()) {
        let scene = scenario.scene()?;
        let grid = scenario.time_grid()?;
        let links = &scenario.links;
        let mut snaps: Vec<TopologySnapshot> = Vec::new();
        if wants(Analysis::Topology) || wants(Analysis::Routing) {
            snaps = grid.epochs().map(|e| snapshot(&scene, e, links)).collect();
            for snap in &mut snaps {
                for (a, b) in &scenario.routing.forced_down {
                    snap.block(*a, *b);
                }
            }
        }
        if wants(Analysis::Topology) {
            let metas: Vec<SnapshotMeta> = snaps
                .iter()
                .map(|s| SnapshotMeta {
                    t: s.t,
                    links: s.edges.len(),
                    up_links: s.up_edges().count(),
                    sun_blocked_links: s.edges.iter().filter(|e| e.status == LinkStatus::SunBlocked).count(),
                    strongly_connected: s.is_strongly_connected(),
                })
                .collect();
            let threshold = scenario.routers.persistence_threshold;
            let roles = edge_roles(&snaps, threshold);
            let quasi = roles.values().filter(|(_, r)| *r == RouterRole::QuasiStatic).count();
            report.topology = Some(TopologySummary {
                nodes: scene.nodes().len(),
                horizon_s: grid.horizon_s,
                step_s: grid.step_s,
                connected_fraction: metas.iter().filter(|m| m.strongly_connected).count() as f64 / metas.len().max(1) as f64,
                quasi_static_links: quasi,
                dynamic_links: roles.len() - quasi,
                snapshots: metas,
                routers: classify_routers(&snaps, threshold),
            });
        }
        if wants(Analysis::Outage) {
            let mut tracked = ring_links(&scene);
            for l in &scenario.outage.extra_links {
                let link = DirectedLink::new(l.tx, l.rx, l.kind).map_err(|e| failed(Analysis::Outage, e))?;
                if !tracked.contains(&link) {
                    tracked.push(link);
                }
            }
            let contacts = tracked
                .iter()
                .map(|l| contact_intervals(&scene, l, &grid, links))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| failed(Analysis::Outage, e))?;
            let rate = scenario.outage.stream_rate_mbps.unwrap_or(0.0);
            report.outage = Some(buffer_requirements(&contacts, rate).map_err(|e| failed(Analysis::Outage, e))?);
        }
        if wants(Analysis::Routing) {
            let delay = scenario.routing.per_hop_delay_s;
            let pairs = scenario
                .routing
                .pairs
                .iter()
                .flatten()
                .map(|(a, b)| latency_over(&snaps, *a, *b, delay))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| failed(Analysis::Routing, e))?;
            let worst = pairs
                .iter()
                .filter(|p| p.max_latency_s.is_some())
                .max_by(|a, b| a.max_latency_s.partial_cmp(&b.max_latency_s).expect("finite latencies"))
                .cloned();
            report.routing = Some(RoutingSummary { per_hop_delay_s: delay, pairs, worst });
        }
    }

    let assessment = scenario.workload().map(assess).transpose().map_err(|e| failed(Analysis::Workload, e))?;
    if wants(Analysis::Workload) {
        report.workload = assessment.clone();
    }
    if wants(Analysis::Forecast) {
        let design = scenario.design.as_ref().expect("validated: forecast needs a design");
        let required = assessment.as_ref().map(|a| a.required_compute_tflops);
        report.forecast = Some(forecast(design, required, params).map_err(|e| failed(Analysis::Forecast, e))?);
    }

    report.content_hash = report.compute_hash();
    Ok(report)
}
