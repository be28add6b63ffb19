//! Directed free-space optical link geometry, solar stray-light blocking and
//! contact-interval extraction.
//!
//! A terminal is shut down while the Sun sits inside its exclusion cone; there
//! is no partial degradation. The receiver of a directed link `tx -> rx`
//! points along `rx -> tx`, the transmitter along `tx -> rx`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{ClientNode, Constellation, Epoch, GroundStation, SatId, SunModel, TimeGrid, Vec3, EARTH_RADIUS_KM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IslError {
    #[error("link endpoints coincide")]
    CoincidentEndpoints,
    #[error("time grid has no samples")]
    EmptyGrid,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("a link cannot connect {0} to itself")]
    SelfLink(NodeId),
}

/// Which boresights the exclusion cone applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingPolicy {
    /// Only the receiving terminal is sensitive to stray light.
    #[default]
    ReceiverOnly,
    /// Both terminals must stay outside the cone.
    SdaStrict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkParams {
    pub policy: BlockingPolicy,
    /// Boresight-to-Sun angles strictly below this are blocked.
    pub exclusion_angle_deg: f64,
    /// Maximum range of SDC-to-SDC links.
    pub max_range_km: f64,
    /// Maximum range of client access links.
    pub client_max_range_km: f64,
    /// Atmosphere clearance added to the Earth radius for occlusion.
    pub grazing_margin_km: f64,
    /// Inter-ring links per satellite toward each adjacent plane.
    pub inter_ring_per_side: u32,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            policy: BlockingPolicy::ReceiverOnly,
            exclusion_angle_deg: 30.0,
            max_range_km: 6000.0,
            client_max_range_km: 5000.0,
            grazing_margin_km: 100.0,
            inter_ring_per_side: 1,
        }
    }
}

impl LinkParams {
    pub fn max_range_for(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::ClientAccess => self.client_max_range_km,
            _ => self.max_range_km,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(0.0..=180.0).contains(&self.exclusion_angle_deg) {
            errs.push(format!("exclusion_angle_deg must lie in [0, 180], got {}", self.exclusion_angle_deg));
        }
        if !(self.max_range_km > 0.0) {
            errs.push(format!("max_range_km must be positive, got {}", self.max_range_km));
        }
        if !(self.client_max_range_km > 0.0) {
            errs.push(format!("client_max_range_km must be positive, got {}", self.client_max_range_km));
        }
        if !(self.grazing_margin_km >= 0.0) {
            errs.push(format!("grazing_margin_km must be non-negative, got {}", self.grazing_margin_km));
        }
        errs
    }
}

/// Network node: SDC satellite, client platform or ground station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Sat(SatId),
    Client(u16),
    Ground(u16),
}

impl NodeId {
    pub const fn sat(plane: u16, slot: u16) -> Self {
        NodeId::Sat(SatId::new(plane, slot))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Sat(id) => write!(f, "S{id}"),
            NodeId::Client(i) => write!(f, "C{i}"),
            NodeId::Ground(i) => write!(f, "G{i}"),
        }
    }
}

impl FromStr for NodeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected S<plane>.<slot>, C<index> or G<index>, got {s:?}");
        let mut chars = s.chars();
        let tag = chars.next().ok_or_else(bad)?;
        let rest = chars.as_str();
        match tag {
            'S' => rest.parse().map(NodeId::Sat).map_err(|_| bad()),
            'C' => rest.parse().map(NodeId::Client).map_err(|_| bad()),
            'G' => rest.parse().map(NodeId::Ground).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    IntraRing,
    InterRing,
    ClientAccess,
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DirectedLink {
    pub tx: NodeId,
    pub rx: NodeId,
    pub kind: LinkKind,
}

impl DirectedLink {
    pub fn new(tx: NodeId, rx: NodeId, kind: LinkKind) -> Result<Self, IslError> {
        if tx == rx {
            return Err(IslError::SelfLink(tx));
        }
        Ok(Self { tx, rx, kind })
    }

    pub fn reversed(&self) -> Self {
        Self { tx: self.rx, rx: self.tx, kind: self.kind }
    }

    /// Stable textual id, `TX>RX`.
    pub fn id(&self) -> String {
        format!("{}>{}", self.tx, self.rx)
    }
}

impl fmt::Display for DirectedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.tx, self.rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStatus {
    Up,
    SunBlocked,
    OutOfRange,
    Occluded,
}

impl LinkStatus {
    /// Geometry allows the link (it may still be sun-blocked).
    pub fn is_geometric(self) -> bool {
        matches!(self, LinkStatus::Up | LinkStatus::SunBlocked)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedLinkSample {
    pub t: f64,
    pub range_km: f64,
    pub rx_boresight_sun_angle_deg: f64,
    pub tx_boresight_sun_angle_deg: f64,
    pub status: LinkStatus,
}

fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    // atan2 keeps precision near 0 and 180 degrees
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

/// Closest distance from the geocenter to the segment `a`-`b`.
pub fn segment_geocenter_distance(a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let dd = d.norm_squared();
    if dd == 0.0 {
        return a.norm();
    }
    let s = (-a.dot(&d) / dd).clamp(0.0, 1.0);
    (a + d * s).norm()
}

/// Whether the sample's terminals are inside the exclusion cone.
pub fn is_sun_blocked(sample: &DirectedLinkSample, policy: BlockingPolicy, exclusion_angle_deg: f64) -> bool {
    match policy {
        BlockingPolicy::ReceiverOnly => sample.rx_boresight_sun_angle_deg < exclusion_angle_deg,
        BlockingPolicy::SdaStrict => {
            sample.rx_boresight_sun_angle_deg.min(sample.tx_boresight_sun_angle_deg) < exclusion_angle_deg
        }
    }
}

/// Geometry and status of the directed link `tx -> rx`.
///
/// Status precedence: occlusion, then range, then the Sun.
pub fn link_geometry(
    t: f64,
    tx: &Vec3,
    rx: &Vec3,
    sun: &Vec3,
    kind: LinkKind,
    params: &LinkParams,
) -> Result<DirectedLinkSample, IslError> {
    let occluded = segment_geocenter_distance(tx, rx) < EARTH_RADIUS_KM + params.grazing_margin_km;
    sample_with_visibility(t, tx, rx, sun, !occluded, params.max_range_for(kind), params)
}

fn sample_with_visibility(
    t: f64,
    tx: &Vec3,
    rx: &Vec3,
    sun: &Vec3,
    visible: bool,
    max_range_km: f64,
    params: &LinkParams,
) -> Result<DirectedLinkSample, IslError> {
    let d = rx - tx;
    let range_km = d.norm();
    if range_km == 0.0 {
        return Err(IslError::CoincidentEndpoints);
    }
    let mut sample = DirectedLinkSample {
        t,
        range_km,
        rx_boresight_sun_angle_deg: angle_deg(&-d, sun),
        tx_boresight_sun_angle_deg: angle_deg(&d, sun),
        status: LinkStatus::Up,
    };
    sample.status = if !visible {
        LinkStatus::Occluded
    } else if range_km > max_range_km {
        LinkStatus::OutOfRange
    } else if is_sun_blocked(&sample, params.policy, params.exclusion_angle_deg) {
        LinkStatus::SunBlocked
    } else {
        LinkStatus::Up
    };
    Ok(sample)
}

/// Everything needed to place any network node at any epoch.
#[derive(Debug, Clone)]
pub struct Scene {
    pub constellation: Constellation,
    pub clients: Vec<ClientNode>,
    pub ground: Vec<GroundStation>,
    pub sun: SunModel,
}

impl Scene {
    pub fn new(constellation: Constellation) -> Self {
        Self { constellation, clients: Vec::new(), ground: Vec::new(), sun: SunModel::default() }
    }

    pub fn with_sun(mut self, sun: SunModel) -> Self {
        self.sun = sun;
        self
    }

    pub fn contains(&self, node: NodeId) -> bool {
        match node {
            NodeId::Sat(id) => self.constellation.contains(id),
            NodeId::Client(i) => (i as usize) < self.clients.len(),
            NodeId::Ground(i) => (i as usize) < self.ground.len(),
        }
    }

    /// All nodes, satellites first, then clients, then ground stations.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = self.constellation.sat_ids().map(NodeId::Sat).collect();
        nodes.extend((0..self.clients.len() as u16).map(NodeId::Client));
        nodes.extend((0..self.ground.len() as u16).map(NodeId::Ground));
        nodes
    }

    pub fn position(&self, node: NodeId, epoch: Epoch) -> Result<Vec3, IslError> {
        if !self.contains(node) {
            return Err(IslError::UnknownNode(node));
        }
        Ok(match node {
            NodeId::Sat(id) => self.constellation.state(id, epoch).position_eci_km,
            NodeId::Client(i) => self.clients[i as usize].position(epoch),
            NodeId::Ground(i) => self.ground[i as usize].position(epoch),
        })
    }

    pub fn sun(&self, epoch: Epoch) -> Vec3 {
        self.sun.direction(epoch)
    }

    /// Sample a fixed directed link at one epoch.
    pub fn sample(&self, link: &DirectedLink, epoch: Epoch, params: &LinkParams) -> Result<DirectedLinkSample, IslError> {
        let tx = self.position(link.tx, epoch)?;
        let rx = self.position(link.rx, epoch)?;
        let sun = self.sun(epoch);
        let ground = match (link.tx, link.rx) {
            (NodeId::Ground(g), other) | (other, NodeId::Ground(g)) => Some((g, other)),
            _ => None,
        };
        match ground {
            Some((g, other)) => {
                let station = &self.ground[g as usize];
                let target = self.position(other, epoch)?;
                let visible = station.elevation_deg(epoch, &target) >= station.min_elevation_deg;
                sample_with_visibility(epoch.t, &tx, &rx, &sun, visible, params.max_range_for(link.kind), params)
            }
            None => link_geometry(epoch.t, &tx, &rx, &sun, link.kind, params),
        }
    }
}

/// A link selected by the topology rule, with its sample at that epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopologyLink {
    pub link: DirectedLink,
    pub sample: DirectedLinkSample,
}

/// Directed links at one epoch.
///
/// Intra-ring links join ±1 slot neighbours in both directions. Each
/// satellite additionally points up to `inter_ring_per_side` links at the
/// nearest usable satellites of each adjacent plane (planes wrap around).
/// Clients and ground stations attach to their nearest / highest usable
/// satellite in both directions. Only links whose geometry allows them
/// (in range, not occluded) are returned; sun-blocked links are kept with
/// their status so callers can reason about detours.
pub fn neighbor_topology(scene: &Scene, epoch: Epoch, params: &LinkParams) -> Vec<TopologyLink> {
    let c = &scene.constellation;
    let sun = scene.sun(epoch);
    let positions: Vec<Vec3> = c.sat_ids().map(|id| c.state(id, epoch).position_eci_km).collect();
    let pos = |id: SatId| positions[c.index_of(id).expect("id from constellation")];
    let mut out = Vec::new();

    let push = |out: &mut Vec<TopologyLink>, link: DirectedLink, sample: DirectedLinkSample| {
        if sample.status.is_geometric() {
            out.push(TopologyLink { link, sample });
        }
    };

    for (p, plane) in c.planes().iter().enumerate() {
        let n = plane.n_sats as u16;
        if n < 2 {
            continue;
        }
        for s in 0..n {
            let tx = SatId::new(p as u16, s);
            let mut nbrs = vec![(s + 1) % n, (s + n - 1) % n];
            nbrs.dedup();
            for r in nbrs {
                let rx = SatId::new(p as u16, r);
                let link = DirectedLink { tx: NodeId::Sat(tx), rx: NodeId::Sat(rx), kind: LinkKind::IntraRing };
                if let Ok(sample) = link_geometry(epoch.t, &pos(tx), &pos(rx), &sun, LinkKind::IntraRing, params) {
                    push(&mut out, link, sample);
                }
            }
        }
    }

    let np = c.n_planes();
    if np >= 2 && params.inter_ring_per_side > 0 {
        for (p, plane) in c.planes().iter().enumerate() {
            let mut adjacent = vec![(p + 1) % np, (p + np - 1) % np];
            adjacent.dedup();
            for s in 0..plane.n_sats as u16 {
                let tx = SatId::new(p as u16, s);
                let tx_pos = pos(tx);
                for &q in &adjacent {
                    let mut candidates: Vec<(DirectedLinkSample, SatId)> = (0..c.planes()[q].n_sats as u16)
                        .filter_map(|r| {
                            let rx = SatId::new(q as u16, r);
                            link_geometry(epoch.t, &tx_pos, &pos(rx), &sun, LinkKind::InterRing, params)
                                .ok()
                                .filter(|smp| smp.status.is_geometric())
                                .map(|smp| (smp, rx))
                        })
                        .collect();
                    candidates.sort_by(|a, b| a.0.range_km.partial_cmp(&b.0.range_km).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
                    for (sample, rx) in candidates.into_iter().take(params.inter_ring_per_side as usize) {
                        let link = DirectedLink { tx: NodeId::Sat(tx), rx: NodeId::Sat(rx), kind: LinkKind::InterRing };
                        push(&mut out, link, sample);
                    }
                }
            }
        }
    }

    for (i, client) in scene.clients.iter().enumerate() {
        let cpos = client.position(epoch);
        let best = c
            .sat_ids()
            .filter_map(|id| {
                let there = link_geometry(epoch.t, &cpos, &pos(id), &sun, LinkKind::ClientAccess, params).ok()?;
                there.status.is_geometric().then_some((there.range_km, id))
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
        if let Some((_, id)) = best {
            let cnode = NodeId::Client(i as u16);
            for (tx, rx, a, b) in [(cnode, NodeId::Sat(id), cpos, pos(id)), (NodeId::Sat(id), cnode, pos(id), cpos)] {
                if let Ok(sample) = link_geometry(epoch.t, &a, &b, &sun, LinkKind::ClientAccess, params) {
                    push(&mut out, DirectedLink { tx, rx, kind: LinkKind::ClientAccess }, sample);
                }
            }
        }
    }

    for (g, station) in scene.ground.iter().enumerate() {
        let gpos = station.position(epoch);
        let best = c
            .sat_ids()
            .map(|id| (station.elevation_deg(epoch, &pos(id)), id))
            .filter(|(el, id)| *el >= station.min_elevation_deg && (pos(*id) - gpos).norm() <= params.max_range_km)
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(b.1.cmp(&a.1)));
        if let Some((_, id)) = best {
            let gnode = NodeId::Ground(g as u16);
            for (tx, rx, a, b) in [(gnode, NodeId::Sat(id), gpos, pos(id)), (NodeId::Sat(id), gnode, pos(id), gpos)] {
                if let Ok(sample) = sample_with_visibility(epoch.t, &a, &b, &sun, true, params.max_range_km, params) {
                    push(&mut out, DirectedLink { tx, rx, kind: LinkKind::Ground }, sample);
                }
            }
        }
    }

    out
}

/// Half-open time interval `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Up intervals of one directed link over a sampled horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactIntervals {
    pub link: DirectedLink,
    /// Sorted, disjoint intervals during which the link is up.
    pub intervals: Vec<Interval>,
    /// Covered horizon, `samples * step`.
    pub horizon_s: f64,
    pub step_s: f64,
}

impl ContactIntervals {
    /// Build from per-sample up flags on a uniform grid.
    pub fn from_flags(link: DirectedLink, up: &[bool], step_s: f64) -> Self {
        let mut intervals = Vec::new();
        let mut open: Option<usize> = None;
        for (k, &u) in up.iter().enumerate() {
            match (u, open) {
                (true, None) => open = Some(k),
                (false, Some(start)) => {
                    intervals.push(Interval { start_s: start as f64 * step_s, end_s: k as f64 * step_s });
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            intervals.push(Interval { start_s: start as f64 * step_s, end_s: up.len() as f64 * step_s });
        }
        Self { link, intervals, horizon_s: up.len() as f64 * step_s, step_s }
    }

    pub fn up_time_s(&self) -> f64 {
        self.intervals.iter().map(Interval::duration_s).sum()
    }

    /// Fraction of the horizon during which the link is down.
    pub fn outage_fraction(&self) -> f64 {
        if self.horizon_s <= 0.0 {
            return 0.0;
        }
        (1.0 - self.up_time_s() / self.horizon_s).clamp(0.0, 1.0)
    }

    /// Down periods, including those touching the horizon edges.
    pub fn gaps(&self) -> Vec<Interval> {
        let mut gaps = Vec::new();
        let mut cursor = 0.0;
        for iv in &self.intervals {
            if iv.start_s > cursor {
                gaps.push(Interval { start_s: cursor, end_s: iv.start_s });
            }
            cursor = iv.end_s;
        }
        if self.horizon_s > cursor {
            gaps.push(Interval { start_s: cursor, end_s: self.horizon_s });
        }
        gaps
    }

    pub fn max_outage_s(&self) -> f64 {
        self.gaps().iter().map(Interval::duration_s).fold(0.0, f64::max)
    }
}

/// Samples of a fixed directed link at every grid epoch.
pub fn link_samples(
    scene: &Scene,
    link: &DirectedLink,
    grid: &TimeGrid,
    params: &LinkParams,
) -> Result<Vec<DirectedLinkSample>, IslError> {
    if grid.is_empty() {
        return Err(IslError::EmptyGrid);
    }
    grid.epochs().map(|e| scene.sample(link, e, params)).collect()
}

/// Sweep a fixed directed link across the grid and merge up samples.
pub fn contact_intervals(
    scene: &Scene,
    link: &DirectedLink,
    grid: &TimeGrid,
    params: &LinkParams,
) -> Result<ContactIntervals, IslError> {
    let samples = link_samples(scene, link, grid, params)?;
    let up: Vec<bool> = samples.iter().map(|s| s.status == LinkStatus::Up).collect();
    Ok(ContactIntervals::from_flags(*link, &up, grid.step_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::{build_sdc_constellation, ConstellationConfig, OrbitPlane};
    use approx::assert_relative_eq;

    fn sample(rx: f64, tx: f64) -> DirectedLinkSample {
        DirectedLinkSample { t: 0.0, range_km: 1000.0, rx_boresight_sun_angle_deg: rx, tx_boresight_sun_angle_deg: tx, status: LinkStatus::Up }
    }

    #[test]
    fn exclusion_threshold_semantics() {
        let ro = BlockingPolicy::ReceiverOnly;
        let strict = BlockingPolicy::SdaStrict;
        assert!(is_sun_blocked(&sample(29.0, 90.0), ro, 30.0));
        assert!(!is_sun_blocked(&sample(31.0, 31.0), ro, 30.0));
        assert!(!is_sun_blocked(&sample(30.0, 30.0), strict, 30.0));
        assert!(!is_sun_blocked(&sample(150.0, 29.0), ro, 30.0));
        assert!(is_sun_blocked(&sample(150.0, 29.0), strict, 30.0));
    }

    #[test]
    fn chord_range_on_default_ring() {
        let a = EARTH_RADIUS_KM + 550.0;
        let tx = Vec3::new(a, 0.0, 0.0);
        let u = 36f64.to_radians();
        let rx = Vec3::new(a * u.cos(), a * u.sin(), 0.0);
        let s = link_geometry(0.0, &tx, &rx, &Vec3::z(), LinkKind::IntraRing, &LinkParams::default()).unwrap();
        assert_relative_eq!(s.range_km, 2.0 * a * 18f64.to_radians().sin(), max_relative = 1e-12);
        assert!((s.range_km - 4277.0).abs() < 1.0);
        assert_eq!(s.status, LinkStatus::Up);
        assert_relative_eq!(s.rx_boresight_sun_angle_deg, 90.0, epsilon = 1e-9);
    }

    #[test]
    fn anti_sun_receiver_never_blocked() {
        let tx = Vec3::new(7000.0, 0.0, 0.0);
        let rx = Vec3::new(7000.0, 1000.0, 0.0);
        // rx boresight points along -y
        let s = link_geometry(0.0, &tx, &rx, &Vec3::y(), LinkKind::IntraRing, &LinkParams::default()).unwrap();
        assert_relative_eq!(s.rx_boresight_sun_angle_deg, 180.0, epsilon = 1e-9);
        assert_eq!(s.status, LinkStatus::Up);
    }

    #[test]
    fn antipodal_is_occluded_and_coincident_is_error() {
        let a = Vec3::new(6921.0, 0.0, 0.0);
        let s = link_geometry(0.0, &a, &-a, &Vec3::z(), LinkKind::IntraRing, &LinkParams { max_range_km: 1e9, ..Default::default() }).unwrap();
        assert_eq!(s.status, LinkStatus::Occluded);
        assert_eq!(link_geometry(0.0, &a, &a, &Vec3::z(), LinkKind::IntraRing, &LinkParams::default()), Err(IslError::CoincidentEndpoints));
    }

    #[test]
    fn out_of_range_precedes_sun() {
        let tx = Vec3::new(7000.0, 0.0, 0.0);
        let rx = Vec3::new(7000.0, 7000.0, 0.0);
        let s = link_geometry(0.0, &tx, &rx, &-Vec3::y(), LinkKind::IntraRing, &LinkParams::default()).unwrap();
        assert_eq!(s.status, LinkStatus::OutOfRange);
    }

    #[test]
    fn ring_link_counts() {
        let ring = Constellation::new(vec![OrbitPlane::new(550.0, 53.0, 0.0, 10).unwrap()], vec![0.0]).unwrap();
        let links = neighbor_topology(&Scene::new(ring), Epoch::new(0.0, 80).unwrap(), &LinkParams::default());
        assert_eq!(links.iter().filter(|l| l.link.kind == LinkKind::IntraRing).count(), 20);
        let single = Constellation::new(vec![OrbitPlane::new(550.0, 53.0, 0.0, 1).unwrap()], vec![0.0]).unwrap();
        assert!(neighbor_topology(&Scene::new(single), Epoch::new(0.0, 80).unwrap(), &LinkParams::default()).is_empty());
    }

    #[test]
    fn default_constellation_degree_bounds() {
        let c = build_sdc_constellation(&ConstellationConfig::default()).unwrap();
        let scene = Scene::new(c.clone());
        let period = c.planes()[0].period_s();
        for k in 0..12 {
            let e = Epoch::new(k as f64 * period / 12.0, 80).unwrap();
            let links = neighbor_topology(&scene, e, &LinkParams::default());
            for id in c.sat_ids() {
                let out = links.iter().filter(|l| l.link.tx == NodeId::Sat(id)).count();
                assert!((2..=4).contains(&out), "{id} has {out} outgoing links at t={}", e.t);
            }
        }
    }

    #[test]
    fn flags_to_intervals_and_gaps() {
        let link = DirectedLink::new(NodeId::sat(0, 0), NodeId::sat(0, 1), LinkKind::IntraRing).unwrap();
        let ci = ContactIntervals::from_flags(link, &[false, true, true, false, false, true], 10.0);
        assert_eq!(ci.intervals, vec![Interval { start_s: 10.0, end_s: 30.0 }, Interval { start_s: 50.0, end_s: 60.0 }]);
        assert_relative_eq!(ci.outage_fraction(), 0.5);
        assert_relative_eq!(ci.max_outage_s(), 20.0);
        let all_up = ContactIntervals::from_flags(link, &[true; 4], 1.0);
        assert_eq!(all_up.max_outage_s(), 0.0);
        let all_down = ContactIntervals::from_flags(link, &[false; 4], 1.0);
        assert_eq!(all_down.max_outage_s(), 4.0);
        assert_eq!(all_down.outage_fraction(), 1.0);
    }

    #[test]
    fn node_id_text() {
        for s in ["S3.4", "C0", "G12"] {
            assert_eq!(s.parse::<NodeId>().unwrap().to_string(), s);
        }
        assert!("X1".parse::<NodeId>().is_err());
        assert!("S1".parse::<NodeId>().is_err());
        assert!(DirectedLink::new(NodeId::Client(0), NodeId::Client(0), LinkKind::ClientAccess).is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let ring = Constellation::new(vec![OrbitPlane::new(550.0, 53.0, 0.0, 10).unwrap()], vec![0.0]).unwrap();
        let scene = Scene::new(ring);
        let grid = TimeGrid { start_day_of_year: 80, horizon_s: 0.0, step_s: 10.0 };
        let link = DirectedLink::new(NodeId::sat(0, 0), NodeId::sat(0, 1), LinkKind::IntraRing).unwrap();
        assert_eq!(contact_intervals(&scene, &link, &grid, &LinkParams::default()), Err(IslError::EmptyGrid));
    }
}
