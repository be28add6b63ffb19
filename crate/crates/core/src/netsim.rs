//! Time-varying network graph, sun-aware routing, latency statistics and
//! caching-buffer sizing.
//!
//! Routing works on per-epoch snapshots. Each snapshot carries every
//! geometrically possible link with its status; only `Up` edges are
//! routable, the rest are kept to explain detours.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{Epoch, TimeGrid};
use crate::isl::{neighbor_topology, ContactIntervals, DirectedLink, IslError, LinkKind, LinkParams, LinkStatus, NodeId, Scene};

/// Speed of light in vacuum, km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetsimError {
    #[error("node {0} is not part of the snapshot")]
    UnknownNode(NodeId),
    #[error("stream rate must be non-negative, got {0} MB/s")]
    NegativeRate(f64),
    #[error("no snapshots to aggregate")]
    NoSnapshots,
    #[error(transparent)]
    Isl(#[from] IslError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub link: DirectedLink,
    /// Propagation delay, seconds.
    pub weight_s: f64,
    pub status: LinkStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySnapshot {
    pub t: f64,
    /// Sorted node ids.
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

impl TopologySnapshot {
    pub fn up_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.status == LinkStatus::Up)
    }

    pub fn edge(&self, tx: NodeId, rx: NodeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.link.tx == tx && e.link.rx == rx)
    }

    /// Mark the directed edge `tx -> rx` as blocked. Returns false if absent.
    pub fn block(&mut self, tx: NodeId, rx: NodeId) -> bool {
        let mut found = false;
        for e in self.edges.iter_mut().filter(|e| e.link.tx == tx && e.link.rx == rx) {
            e.status = LinkStatus::SunBlocked;
            found = true;
        }
        found
    }

    fn index(&self, node: NodeId) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }

    /// Whether every node reaches every other node over up edges.
    pub fn is_strongly_connected(&self) -> bool {
        if self.nodes.len() <= 1 {
            return true;
        }
        let n = self.nodes.len();
        let mut fwd = vec![Vec::new(); n];
        let mut bwd = vec![Vec::new(); n];
        for e in self.up_edges() {
            if let (Some(a), Some(b)) = (self.index(e.link.tx), self.index(e.link.rx)) {
                fwd[a].push(b);
                bwd[b].push(a);
            }
        }
        let reach_all = |adj: &Vec<Vec<usize>>| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach_all(&fwd) && reach_all(&bwd)
    }
}

/// Build the topology graph at one epoch with propagation-delay weights.
pub fn snapshot(scene: &Scene, epoch: Epoch, params: &LinkParams) -> TopologySnapshot {
    let mut nodes = scene.nodes();
    nodes.sort();
    let edges = neighbor_topology(scene, epoch, params)
        .into_iter()
        .map(|tl| Edge { link: tl.link, weight_s: tl.sample.range_km / SPEED_OF_LIGHT_KM_S, status: tl.sample.status })
        .collect();
    TopologySnapshot { t: epoch.t, nodes, edges }
}

/// Snapshots at every grid epoch, in epoch order.
pub fn timeline(scene: &Scene, grid: &TimeGrid, params: &LinkParams) -> Vec<TopologySnapshot> {
    (0..grid.len()).into_par_iter().map(|k| snapshot(scene, grid.epoch(k), params)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub path: Vec<NodeId>,
    pub total_latency_s: f64,
    pub hop_count: usize,
    /// The shortest path ignoring the Sun would have used a blocked edge.
    pub blocked_detour: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Route {
    Reachable(RouteResult),
    /// No up path exists; lists the blocked edges on the geometric shortest
    /// path (empty when even the geometry offers no path).
    Unreachable { blocked_edges: Vec<DirectedLink> },
}

impl Route {
    pub fn reachable(&self) -> Option<&RouteResult> {
        match self {
            Route::Reachable(r) => Some(r),
            Route::Unreachable { .. } => None,
        }
    }
}

/// Picoseconds; integer sums make equal-latency ties exact.
fn to_ps(seconds: f64) -> u64 {
    (seconds * 1e12).round() as u64
}

struct Found {
    path: Vec<usize>,
    edges: Vec<usize>,
}

/// Minimum-latency path; ties go to the lexicographically smallest node
/// sequence.
fn shortest(snap: &TopologySnapshot, src: usize, dst: usize, per_hop_s: f64, usable: impl Fn(&Edge) -> bool) -> Option<Found> {
    let n = snap.nodes.len();
    let mut adj: Vec<Vec<(usize, u64, usize)>> = vec![Vec::new(); n];
    for (i, e) in snap.edges.iter().enumerate() {
        if !usable(e) {
            continue;
        }
        if let (Some(a), Some(b)) = (snap.index(e.link.tx), snap.index(e.link.rx)) {
            adj[a].push((b, to_ps(e.weight_s + per_hop_s), i));
        }
    }
    type Label = (u64, Vec<usize>, Vec<usize>);
    let mut best: Vec<Option<(u64, Vec<usize>)>> = vec![None; n];
    let mut heap: BinaryHeap<Reverse<Label>> = BinaryHeap::new();
    best[src] = Some((0, vec![src]));
    heap.push(Reverse((0, vec![src], Vec::new())));
    while let Some(Reverse((d, path, edges))) = heap.pop() {
        let v = *path.last().expect("non-empty path");
        if best[v].as_ref().is_some_and(|(bd, bp)| (*bd, bp) < (d, &path)) {
            continue;
        }
        if v == dst {
            return Some(Found { path, edges });
        }
        for &(u, w, ei) in &adj[v] {
            let nd = d + w;
            let mut np = path.clone();
            np.push(u);
            let better = match &best[u] {
                None => true,
                Some((bd, bp)) => (nd, &np) < (*bd, bp),
            };
            if better {
                let mut ne = edges.clone();
                ne.push(ei);
                best[u] = Some((nd, np.clone()));
                heap.push(Reverse((nd, np, ne)));
            }
        }
    }
    None
}

/// Route over up edges with zero per-hop delay.
pub fn route(snap: &TopologySnapshot, src: NodeId, dst: NodeId) -> Result<Route, NetsimError> {
    route_with_delay(snap, src, dst, 0.0)
}

/// Route over up edges, charging `per_hop_delay_s` for every hop.
pub fn route_with_delay(snap: &TopologySnapshot, src: NodeId, dst: NodeId, per_hop_delay_s: f64) -> Result<Route, NetsimError> {
    let s = snap.index(src).ok_or(NetsimError::UnknownNode(src))?;
    let d = snap.index(dst).ok_or(NetsimError::UnknownNode(dst))?;
    let geometric = shortest(snap, s, d, per_hop_delay_s, |e| e.status.is_geometric());
    let blocked_on_geometric: Vec<DirectedLink> = geometric
        .as_ref()
        .map(|g| g.edges.iter().map(|&i| &snap.edges[i]).filter(|e| e.status != LinkStatus::Up).map(|e| e.link).collect())
        .unwrap_or_default();
    match shortest(snap, s, d, per_hop_delay_s, |e| e.status == LinkStatus::Up) {
        Some(found) => {
            let total_latency_s = found.edges.iter().map(|&i| snap.edges[i].weight_s + per_hop_delay_s).sum();
            Ok(Route::Reachable(RouteResult {
                hop_count: found.edges.len(),
                path: found.path.into_iter().map(|i| snap.nodes[i]).collect(),
                total_latency_s,
                blocked_detour: !blocked_on_geometric.is_empty(),
            }))
        }
        None => Ok(Route::Unreachable { blocked_edges: blocked_on_geometric }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub src: NodeId,
    pub dst: NodeId,
    /// `None` when the pair is never reachable.
    pub max_latency_s: Option<f64>,
    pub min_latency_s: Option<f64>,
    pub mean_latency_s: Option<f64>,
    pub unreachable_fraction: f64,
    pub detour_fraction: f64,
    pub max_hops: usize,
    /// Epoch of the worst reachable latency.
    pub worst_t: Option<f64>,
    pub worst_path: Vec<NodeId>,
}

/// Aggregate routes between `src` and `dst` over pre-built snapshots.
pub fn latency_over(snaps: &[TopologySnapshot], src: NodeId, dst: NodeId, per_hop_delay_s: f64) -> Result<LatencyStats, NetsimError> {
    if snaps.is_empty() {
        return Err(NetsimError::NoSnapshots);
    }
    let mut stats = LatencyStats {
        src,
        dst,
        max_latency_s: None,
        min_latency_s: None,
        mean_latency_s: None,
        unreachable_fraction: 0.0,
        detour_fraction: 0.0,
        max_hops: 0,
        worst_t: None,
        worst_path: Vec::new(),
    };
    let (mut sum, mut reachable, mut unreachable, mut detours) = (0.0, 0usize, 0usize, 0usize);
    for snap in snaps {
        match route_with_delay(snap, src, dst, per_hop_delay_s)? {
            Route::Reachable(r) => {
                reachable += 1;
                sum += r.total_latency_s;
                detours += r.blocked_detour as usize;
                stats.max_hops = stats.max_hops.max(r.hop_count);
                stats.min_latency_s = Some(stats.min_latency_s.map_or(r.total_latency_s, |m| m.min(r.total_latency_s)));
                if stats.max_latency_s.is_none_or(|m| r.total_latency_s > m) {
                    stats.max_latency_s = Some(r.total_latency_s);
                    stats.worst_t = Some(snap.t);
                    stats.worst_path = r.path;
                }
            }
            Route::Unreachable { .. } => unreachable += 1,
        }
    }
    let n = snaps.len() as f64;
    stats.mean_latency_s = (reachable > 0).then(|| sum / reachable as f64);
    stats.unreachable_fraction = unreachable as f64 / n;
    stats.detour_fraction = detours as f64 / n;
    Ok(stats)
}

/// Route `src -> dst` at every grid epoch and aggregate.
pub fn worst_case_latency(
    scene: &Scene,
    src: NodeId,
    dst: NodeId,
    grid: &TimeGrid,
    params: &LinkParams,
) -> Result<LatencyStats, NetsimError> {
    for node in [src, dst] {
        if !scene.contains(node) {
            return Err(NetsimError::UnknownNode(node));
        }
    }
    let snaps = timeline(scene, grid, params);
    latency_over(&snaps, src, dst, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageRow {
    pub link_id: String,
    pub link: DirectedLink,
    pub max_outage_s: f64,
    pub outage_fraction: f64,
    pub buffer_mb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageReport {
    pub stream_rate_mbps: f64,
    pub rows: Vec<OutageRow>,
}

impl OutageReport {
    pub fn worst(&self) -> Option<&OutageRow> {
        self.rows.iter().max_by(|a, b| a.max_outage_s.total_cmp(&b.max_outage_s).then_with(|| b.link.cmp(&a.link)))
    }
}

/// Caching memory needed to ride out each link's longest outage.
pub fn buffer_requirements(contacts: &[ContactIntervals], stream_rate_mbps: f64) -> Result<OutageReport, NetsimError> {
    if !(stream_rate_mbps >= 0.0) {
        return Err(NetsimError::NegativeRate(stream_rate_mbps));
    }
    let rows = contacts
        .iter()
        .map(|c| {
            let max_outage_s = c.max_outage_s();
            OutageRow {
                link_id: c.link.id(),
                link: c.link,
                max_outage_s,
                outage_fraction: c.outage_fraction(),
                buffer_mb: stream_rate_mbps * max_outage_s,
            }
        })
        .collect();
    Ok(OutageReport { stream_rate_mbps, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouterRole {
    QuasiStatic,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterClass {
    pub node: NodeId,
    pub quasi_static_degree: usize,
    pub dynamic_degree: usize,
}

/// Per-edge role: SDC-to-SDC edges present (ignoring the Sun) in at least
/// `persistence_threshold` of the snapshots are quasi-static; client and
/// ground edges are always dynamic.
pub fn edge_roles(snaps: &[TopologySnapshot], persistence_threshold: f64) -> BTreeMap<(NodeId, NodeId), (LinkKind, RouterRole)> {
    let mut counts: BTreeMap<(NodeId, NodeId), (LinkKind, usize)> = BTreeMap::new();
    for snap in snaps {
        for e in &snap.edges {
            counts.entry((e.link.tx, e.link.rx)).or_insert((e.link.kind, 0)).1 += 1;
        }
    }
    let n = snaps.len().max(1) as f64;
    counts
        .into_iter()
        .map(|(key, (kind, count))| {
            let role = match kind {
                LinkKind::ClientAccess | LinkKind::Ground => RouterRole::Dynamic,
                _ if count as f64 / n >= persistence_threshold => RouterRole::QuasiStatic,
                _ => RouterRole::Dynamic,
            };
            (key, (kind, role))
        })
        .collect()
}

/// Quasi-static and dynamic out-degree of every node over the horizon.
pub fn classify_routers(snaps: &[TopologySnapshot], persistence_threshold: f64) -> Vec<RouterClass> {
    let mut per_node: BTreeMap<NodeId, RouterClass> = BTreeMap::new();
    if let Some(first) = snaps.first() {
        for &node in &first.nodes {
            per_node.insert(node, RouterClass { node, quasi_static_degree: 0, dynamic_degree: 0 });
        }
    }
    for ((tx, _), (_, role)) in edge_roles(snaps, persistence_threshold) {
        let entry = per_node.entry(tx).or_insert(RouterClass { node: tx, quasi_static_degree: 0, dynamic_degree: 0 });
        match role {
            RouterRole::QuasiStatic => entry.quasi_static_degree += 1,
            RouterRole::Dynamic => entry.dynamic_degree += 1,
        }
    }
    per_node.into_values().collect()
}
