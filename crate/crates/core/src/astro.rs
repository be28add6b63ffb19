//! Time handling, Sun direction, circular two-body propagation and
//! constellation construction.
//!
//! All geometry is expressed in an Earth-centered inertial (ECI) frame in
//! kilometres. Orbits are ideal circles: no J2, no drag, no eccentricity.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Earth gravitational parameter, km³/s².
pub const MU_EARTH_KM3_S2: f64 = 398_600.441_8;
/// Mean Earth radius, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Earth sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;
/// Obliquity of the ecliptic used by the circular Sun model, degrees.
pub const OBLIQUITY_DEG: f64 = 23.44;
/// Geostationary orbit radius, km.
pub const GEO_RADIUS_KM: f64 = 42_164.0;
/// Mean Earth-Moon distance, km.
pub const MOON_DISTANCE_KM: f64 = 384_400.0;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AstroError {
    #[error("altitude must be positive, got {0} km")]
    NonPositiveAltitude(f64),
    #[error("inclination must lie in [0, 180] degrees, got {0}")]
    InvalidInclination(f64),
    #[error("day of year must lie in [1, 365], got {0}")]
    InvalidDayOfYear(u16),
    #[error("epoch offset must be finite")]
    NonFiniteTime,
    #[error("constellation needs at least one plane and one satellite per plane")]
    EmptyConstellation,
    #[error("{planes} planes but {offsets} phase offsets")]
    PhaseOffsetMismatch { planes: usize, offsets: usize },
    #[error("time grid step must be positive and not exceed the horizon (step {step_s} s, horizon {horizon_s} s)")]
    InvalidTimeGrid { step_s: f64, horizon_s: f64 },
    #[error("invalid client configuration: {0}")]
    InvalidClient(String),
}

/// A point in scenario time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    /// Seconds since the scenario epoch.
    pub t: f64,
    /// Day of year (1-365) anchoring the Sun model at `t = 0`.
    pub day_of_year: u16,
}

impl Epoch {
    pub fn new(t: f64, day_of_year: u16) -> Result<Self, AstroError> {
        if !t.is_finite() {
            return Err(AstroError::NonFiniteTime);
        }
        if !(1..=365).contains(&day_of_year) {
            return Err(AstroError::InvalidDayOfYear(day_of_year));
        }
        Ok(Self { t, day_of_year })
    }
}

/// Fixed-step sampling of the scenario horizon.
///
/// Sample `k` sits at `k * step_s` and represents the cell
/// `[k * step_s, (k + 1) * step_s)`; there are `floor(horizon / step)` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start_day_of_year: u16,
    pub horizon_s: f64,
    pub step_s: f64,
}

impl TimeGrid {
    pub fn new(start_day_of_year: u16, horizon_s: f64, step_s: f64) -> Result<Self, AstroError> {
        if !(1..=365).contains(&start_day_of_year) {
            return Err(AstroError::InvalidDayOfYear(start_day_of_year));
        }
        if !(step_s > 0.0 && step_s.is_finite() && horizon_s.is_finite() && horizon_s >= step_s) {
            return Err(AstroError::InvalidTimeGrid { step_s, horizon_s });
        }
        Ok(Self { start_day_of_year, horizon_s, step_s })
    }

    pub fn len(&self) -> usize {
        // tolerate horizons that are an exact multiple of the step up to rounding
        (self.horizon_s / self.step_s + 1e-9).floor() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Covered duration, `len() * step_s`.
    pub fn span_s(&self) -> f64 {
        self.len() as f64 * self.step_s
    }

    pub fn epoch(&self, k: usize) -> Epoch {
        Epoch { t: k as f64 * self.step_s, day_of_year: self.start_day_of_year }
    }

    pub fn epochs(&self) -> impl Iterator<Item = Epoch> + '_ {
        (0..self.len()).map(move |k| self.epoch(k))
    }
}

/// One circular orbital plane with equidistant satellites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPlane {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub n_sats: u32,
}

impl OrbitPlane {
    pub fn new(altitude_km: f64, inclination_deg: f64, raan_deg: f64, n_sats: u32) -> Result<Self, AstroError> {
        if !(altitude_km > 0.0) {
            return Err(AstroError::NonPositiveAltitude(altitude_km));
        }
        if !(0.0..=180.0).contains(&inclination_deg) {
            return Err(AstroError::InvalidInclination(inclination_deg));
        }
        if n_sats == 0 {
            return Err(AstroError::EmptyConstellation);
        }
        Ok(Self { altitude_km, inclination_deg, raan_deg: raan_deg.rem_euclid(360.0), n_sats })
    }

    pub fn radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    pub fn period_s(&self) -> f64 {
        period_from_radius(self.radius_km())
    }

    /// Argument of latitude of `slot` at time `t`, degrees (unwrapped).
    pub fn anomaly_deg(&self, phase_offset_deg: f64, slot: u32, t: f64) -> f64 {
        phase_offset_deg + slot as f64 * 360.0 / self.n_sats as f64 + 360.0 * t / self.period_s()
    }

    /// Position and velocity at argument of latitude `u_deg`.
    pub fn state_at_anomaly(&self, u_deg: f64) -> (Vec3, Vec3) {
        let r = self.radius_km();
        let speed = (MU_EARTH_KM3_S2 / r).sqrt();
        let (su, cu) = u_deg.to_radians().sin_cos();
        let (si, ci) = self.inclination_deg.to_radians().sin_cos();
        let (so, co) = self.raan_deg.to_radians().sin_cos();
        let position = Vec3::new(co * cu - so * ci * su, so * cu + co * ci * su, si * su) * r;
        let velocity = Vec3::new(-co * su - so * ci * cu, -so * su + co * ci * cu, si * cu) * speed;
        (position, velocity)
    }
}

fn period_from_radius(radius_km: f64) -> f64 {
    TAU * (radius_km.powi(3) / MU_EARTH_KM3_S2).sqrt()
}

/// Circular orbital period for a given altitude above the mean Earth radius.
pub fn orbital_period(altitude_km: f64) -> Result<f64, AstroError> {
    if !(altitude_km > 0.0) {
        return Err(AstroError::NonPositiveAltitude(altitude_km));
    }
    Ok(period_from_radius(EARTH_RADIUS_KM + altitude_km))
}

/// Circular orbital speed, km/s.
pub fn circular_speed(altitude_km: f64) -> Result<f64, AstroError> {
    if !(altitude_km > 0.0) {
        return Err(AstroError::NonPositiveAltitude(altitude_km));
    }
    Ok((MU_EARTH_KM3_S2 / (EARTH_RADIUS_KM + altitude_km)).sqrt())
}

/// Satellite identifier: orbital plane and slot within the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatId {
    pub plane: u16,
    pub slot: u16,
}

impl SatId {
    pub const fn new(plane: u16, slot: u16) -> Self {
        Self { plane, slot }
    }
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.plane, self.slot)
    }
}

impl FromStr for SatId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = s.split_once('.').ok_or_else(|| format!("expected PLANE.SLOT, got {s:?}"))?;
        let plane = p.parse().map_err(|_| format!("bad plane index in {s:?}"))?;
        let slot = q.parse().map_err(|_| format!("bad slot index in {s:?}"))?;
        Ok(Self { plane, slot })
    }
}

impl Serialize for SatId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SatId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    planes: Vec<OrbitPlane>,
    phase_offsets_deg: Vec<f64>,
}

impl Constellation {
    pub fn new(planes: Vec<OrbitPlane>, phase_offsets_deg: Vec<f64>) -> Result<Self, AstroError> {
        if planes.is_empty() {
            return Err(AstroError::EmptyConstellation);
        }
        if planes.len() != phase_offsets_deg.len() {
            return Err(AstroError::PhaseOffsetMismatch { planes: planes.len(), offsets: phase_offsets_deg.len() });
        }
        Ok(Self { planes, phase_offsets_deg })
    }

    pub fn planes(&self) -> &[OrbitPlane] {
        &self.planes
    }

    pub fn phase_offsets_deg(&self) -> &[f64] {
        &self.phase_offsets_deg
    }

    pub fn n_planes(&self) -> usize {
        self.planes.len()
    }

    /// Total satellite count.
    pub fn len(&self) -> usize {
        self.planes.iter().map(|p| p.n_sats as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: SatId) -> bool {
        self.planes.get(id.plane as usize).is_some_and(|p| (id.slot as u32) < p.n_sats)
    }

    /// All satellite ids in plane-major order.
    pub fn sat_ids(&self) -> impl Iterator<Item = SatId> + '_ {
        self.planes
            .iter()
            .enumerate()
            .flat_map(|(p, plane)| (0..plane.n_sats).map(move |s| SatId::new(p as u16, s as u16)))
    }

    /// Dense index of `id` in the order produced by [`Constellation::sat_ids`].
    pub fn index_of(&self, id: SatId) -> Option<usize> {
        if !self.contains(id) {
            return None;
        }
        let before: usize = self.planes[..id.plane as usize].iter().map(|p| p.n_sats as usize).sum();
        Some(before + id.slot as usize)
    }

    /// Longest orbital period among the planes.
    pub fn max_period_s(&self) -> f64 {
        self.planes.iter().map(OrbitPlane::period_s).fold(0.0, f64::max)
    }

    pub fn state(&self, id: SatId, epoch: Epoch) -> SatelliteState {
        let plane = &self.planes[id.plane as usize];
        let u = plane.anomaly_deg(self.phase_offsets_deg[id.plane as usize], id.slot as u32, epoch.t);
        let (position_eci_km, velocity_eci_kms) = plane.state_at_anomaly(u);
        SatelliteState { sat_id: id, position_eci_km, velocity_eci_kms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatelliteState {
    pub sat_id: SatId,
    pub position_eci_km: Vec3,
    pub velocity_eci_kms: Vec3,
}

/// States of every satellite at `epoch`, in [`Constellation::sat_ids`] order.
pub fn propagate(constellation: &Constellation, epoch: Epoch) -> Vec<SatelliteState> {
    constellation.sat_ids().map(|id| constellation.state(id, epoch)).collect()
}

/// Unit vector from Earth to Sun in ECI using a circular-ecliptic model.
pub fn sun_direction(epoch: Epoch) -> Vec3 {
    let days = epoch.day_of_year as f64 + epoch.t / 86_400.0 - 80.0;
    let lambda = TAU * days / 365.25;
    let (sl, cl) = lambda.sin_cos();
    let (se, ce) = OBLIQUITY_DEG.to_radians().sin_cos();
    Vec3::new(cl, ce * sl, se * sl).normalize()
}

/// Source of the Sun direction for a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SunModel {
    /// [`sun_direction`] driven by the epoch.
    #[default]
    CircularEcliptic,
    /// A fixed direction, for controlled what-if geometry.
    Fixed { direction: [f64; 3] },
}

impl SunModel {
    pub fn direction(&self, epoch: Epoch) -> Vec3 {
        match self {
            SunModel::CircularEcliptic => sun_direction(epoch),
            SunModel::Fixed { direction } => Vec3::from(*direction).normalize(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            SunModel::CircularEcliptic => Ok(()),
            SunModel::Fixed { direction } => {
                let v = Vec3::from(*direction);
                if v.iter().all(|c| c.is_finite()) && v.norm() > 0.0 {
                    Ok(())
                } else {
                    Err("fixed Sun direction must be finite and non-zero".into())
                }
            }
        }
    }
}

/// Parameters of a Walker-delta SDC constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationConfig {
    pub planes: u32,
    pub sats_per_plane: u32,
    pub inclination_deg: f64,
    pub altitude_km: f64,
    /// Angular range over which plane RAANs are spread uniformly.
    pub raan_spread_deg: f64,
    /// Walker phasing factor F: plane `p` is offset by `p * F * 360 / total`.
    pub walker_phasing: u32,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            planes: 20,
            sats_per_plane: 10,
            inclination_deg: 53.0,
            altitude_km: 550.0,
            raan_spread_deg: 360.0,
            walker_phasing: 1,
        }
    }
}

pub fn build_sdc_constellation(config: &ConstellationConfig) -> Result<Constellation, AstroError> {
    if config.planes == 0 || config.sats_per_plane == 0 {
        return Err(AstroError::EmptyConstellation);
    }
    let total = (config.planes * config.sats_per_plane) as f64;
    let mut planes = Vec::with_capacity(config.planes as usize);
    let mut offsets = Vec::with_capacity(config.planes as usize);
    for p in 0..config.planes {
        let raan = p as f64 * config.raan_spread_deg / config.planes as f64;
        planes.push(OrbitPlane::new(config.altitude_km, config.inclination_deg, raan, config.sats_per_plane)?);
        offsets.push((p * config.walker_phasing) as f64 * 360.0 / total);
    }
    Constellation::new(planes, offsets)
}

/// Client platforms served by the SDC network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientConfig {
    /// Scout/mothership pair sharing one circular orbit; the scout leads.
    LeoPair {
        #[serde(default = "default_client_altitude")]
        altitude_km: f64,
        #[serde(default = "default_client_inclination")]
        inclination_deg: f64,
        #[serde(default)]
        raan_deg: f64,
        #[serde(default)]
        initial_anomaly_deg: f64,
        #[serde(default = "default_lead_separation")]
        lead_separation_deg: f64,
    },
    /// Geostationary relay placeholder on the equator.
    Geo {
        #[serde(default)]
        longitude_deg: f64,
    },
    /// Static placeholder for a lunar-surface asset.
    LunarSurface {
        #[serde(default = "default_moon_distance")]
        distance_km: f64,
        #[serde(default = "default_moon_direction")]
        direction: [f64; 3],
    },
}

fn default_client_altitude() -> f64 {
    800.0
}
fn default_client_inclination() -> f64 {
    53.0
}
fn default_lead_separation() -> f64 {
    2.0
}
fn default_moon_distance() -> f64 {
    MOON_DISTANCE_KM
}
fn default_moon_direction() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClientMotion {
    Orbit { plane: OrbitPlane, anomaly0_deg: f64 },
    Fixed(Vec3),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientNode {
    pub label: String,
    pub motion: ClientMotion,
}

impl ClientNode {
    pub fn position(&self, epoch: Epoch) -> Vec3 {
        match &self.motion {
            ClientMotion::Orbit { plane, anomaly0_deg } => {
                plane.state_at_anomaly(plane.anomaly_deg(*anomaly0_deg, 0, epoch.t)).0
            }
            ClientMotion::Fixed(p) => *p,
        }
    }

    pub fn velocity(&self, epoch: Epoch) -> Vec3 {
        match &self.motion {
            ClientMotion::Orbit { plane, anomaly0_deg } => {
                plane.state_at_anomaly(plane.anomaly_deg(*anomaly0_deg, 0, epoch.t)).1
            }
            ClientMotion::Fixed(_) => Vec3::zeros(),
        }
    }
}

/// Expand a client configuration into its nodes.
pub fn build_client(config: &ClientConfig) -> Result<Vec<ClientNode>, AstroError> {
    match *config {
        ClientConfig::LeoPair { altitude_km, inclination_deg, raan_deg, initial_anomaly_deg, lead_separation_deg } => {
            if !(lead_separation_deg > 0.0 && lead_separation_deg < 360.0) {
                return Err(AstroError::InvalidClient(format!(
                    "lead separation must lie in (0, 360) degrees, got {lead_separation_deg}"
                )));
            }
            let plane = OrbitPlane::new(altitude_km, inclination_deg, raan_deg, 1)?;
            Ok(vec![
                ClientNode {
                    label: "scout".into(),
                    motion: ClientMotion::Orbit { plane, anomaly0_deg: initial_anomaly_deg + lead_separation_deg },
                },
                ClientNode { label: "mothership".into(), motion: ClientMotion::Orbit { plane, anomaly0_deg: initial_anomaly_deg } },
            ])
        }
        ClientConfig::Geo { longitude_deg } => {
            let plane = OrbitPlane::new(GEO_RADIUS_KM - EARTH_RADIUS_KM, 0.0, 0.0, 1)?;
            Ok(vec![ClientNode { label: "geo".into(), motion: ClientMotion::Orbit { plane, anomaly0_deg: longitude_deg } }])
        }
        ClientConfig::LunarSurface { distance_km, direction } => {
            let dir = Vec3::from(direction);
            if !(distance_km > 0.0) || dir.norm() == 0.0 || !dir.iter().all(|c| c.is_finite()) {
                return Err(AstroError::InvalidClient("lunar client needs a positive distance and non-zero direction".into()));
            }
            Ok(vec![ClientNode { label: "lunar_surface".into(), motion: ClientMotion::Fixed(dir.normalize() * distance_km) }])
        }
    }
}

/// Ground station on a spherical rotating Earth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStation {
    pub name: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
    #[serde(default = "default_min_elevation")]
    pub min_elevation_deg: f64,
}

fn default_min_elevation() -> f64 {
    10.0
}

impl GroundStation {
    /// ECI position; longitude is measured from the ECI X axis at `t = 0`.
    pub fn position(&self, epoch: Epoch) -> Vec3 {
        let lon = self.lon_deg.to_radians() + EARTH_ROTATION_RAD_S * epoch.t;
        let (sl, cl) = self.lat_deg.to_radians().sin_cos();
        Vec3::new(cl * lon.cos(), cl * lon.sin(), sl) * EARTH_RADIUS_KM
    }

    /// Elevation of `target` above the local horizon, degrees.
    pub fn elevation_deg(&self, epoch: Epoch, target: &Vec3) -> f64 {
        let site = self.position(epoch);
        let up = site.normalize();
        let los = target - site;
        let n = los.norm();
        if n == 0.0 {
            return 90.0;
        }
        (up.dot(&los) / n).clamp(-1.0, 1.0).asin().to_degrees()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn period_at_550_km() {
        let t = orbital_period(550.0).unwrap();
        // 2*pi*sqrt(6921^3/398600.4418)
        assert_relative_eq!(t, 5730.0, max_relative = 1e-3);
    }

    #[test]
    fn speed_at_800_km_near_7_5() {
        let v = circular_speed(800.0).unwrap();
        assert!((v - 7.45).abs() < 0.01, "{v}");
        assert!((v / 7.5 - 1.0).abs() < 0.01);
    }

    #[test]
    fn period_scaling_law() {
        // a -> a * 2^(2/3) doubles the period
        let a = EARTH_RADIUS_KM + 550.0;
        let a2 = a * 2f64.powf(2.0 / 3.0);
        let t1 = orbital_period(550.0).unwrap();
        let t2 = orbital_period(a2 - EARTH_RADIUS_KM).unwrap();
        assert_relative_eq!(t2, 2.0 * t1, max_relative = 1e-12);
    }

    #[test]
    fn non_positive_altitude_rejected() {
        assert_eq!(orbital_period(0.0), Err(AstroError::NonPositiveAltitude(0.0)));
        assert!(orbital_period(-5.0).is_err());
        assert!(orbital_period(f64::NAN).is_err());
    }

    #[test]
    fn identity_orientation_on_x_axis() {
        let plane = OrbitPlane::new(550.0, 0.0, 0.0, 4).unwrap();
        let c = Constellation::new(vec![plane], vec![0.0]).unwrap();
        let s = c.state(SatId::new(0, 0), Epoch::new(0.0, 80).unwrap());
        assert_relative_eq!(s.position_eci_km, Vec3::new(plane.radius_km(), 0.0, 0.0), epsilon = 1e-9);
    }

    #[test]
    fn periodic_after_one_period() {
        let c = build_sdc_constellation(&ConstellationConfig::default()).unwrap();
        let t = c.planes()[0].period_s();
        let a = propagate(&c, Epoch::new(0.0, 80).unwrap());
        let b = propagate(&c, Epoch::new(t, 80).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x.position_eci_km - y.position_eci_km).norm() <= 1e-9 * x.position_eci_km.norm() * 10.0);
        }
    }

    #[test]
    fn half_period_slot_zero_meets_slot_five() {
        let plane = OrbitPlane::new(550.0, 53.0, 40.0, 10).unwrap();
        let c = Constellation::new(vec![plane], vec![7.0]).unwrap();
        let half = plane.period_s() / 2.0;
        let p0 = c.state(SatId::new(0, 0), Epoch::new(half, 1).unwrap()).position_eci_km;
        let p5 = c.state(SatId::new(0, 5), Epoch::new(0.0, 1).unwrap()).position_eci_km;
        assert!((p0 - p5).norm() < 1e-6);
    }

    #[test]
    fn sun_at_equinox_and_solstice() {
        let s = sun_direction(Epoch::new(0.0, 80).unwrap());
        assert!((s - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-2);
        let s = sun_direction(Epoch::new(0.0, 172).unwrap());
        // lambda = 2*pi*92/365.25, z = sin(eps) * sin(lambda)
        let lambda = TAU * 92.0 / 365.25;
        assert_relative_eq!(s.z, OBLIQUITY_DEG.to_radians().sin() * lambda.sin(), epsilon = 1e-12);
        assert!((s.z - OBLIQUITY_DEG.to_radians().sin()).abs() < 1e-3);
    }

    #[test]
    fn default_constellation_shape() {
        let c = build_sdc_constellation(&ConstellationConfig::default()).unwrap();
        assert_eq!(c.len(), 200);
        assert_relative_eq!(c.planes()[1].raan_deg - c.planes()[0].raan_deg, 18.0, epsilon = 1e-12);
        let single = build_sdc_constellation(&ConstellationConfig { planes: 1, sats_per_plane: 1, ..Default::default() }).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(
            build_sdc_constellation(&ConstellationConfig { planes: 0, ..Default::default() }),
            Err(AstroError::EmptyConstellation)
        );
        assert_eq!(
            build_sdc_constellation(&ConstellationConfig { sats_per_plane: 0, ..Default::default() }),
            Err(AstroError::EmptyConstellation)
        );
    }

    #[test]
    fn leo_pair_shares_orbit() {
        let nodes = build_client(&ClientConfig::LeoPair {
            altitude_km: 800.0,
            inclination_deg: 53.0,
            raan_deg: 10.0,
            initial_anomaly_deg: 0.0,
            lead_separation_deg: 3.0,
        })
        .unwrap();
        assert_eq!(nodes.len(), 2);
        let e = Epoch::new(123.0, 100).unwrap();
        let (a, b) = (nodes[0].position(e), nodes[1].position(e));
        assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-12);
        let normal = a.cross(&b).normalize();
        let va = nodes[0].velocity(e);
        assert!(normal.dot(&va).abs() < 1e-9 * va.norm());
        let sep = (a.dot(&b) / (a.norm() * b.norm())).acos().to_degrees();
        assert_relative_eq!(sep, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn geo_and_lunar_clients() {
        let geo = build_client(&ClientConfig::Geo { longitude_deg: 0.0 }).unwrap();
        let ClientMotion::Orbit { plane, .. } = geo[0].motion else { panic!() };
        assert_relative_eq!(plane.radius_km(), 42_164.0, epsilon = 1e-9);
        assert!((plane.period_s() - 86_164.0).abs() < 1.0, "{}", plane.period_s());
        let moon = build_client(&ClientConfig::LunarSurface { distance_km: MOON_DISTANCE_KM, direction: [0.0, 2.0, 0.0] }).unwrap();
        let e0 = Epoch::new(0.0, 1).unwrap();
        let e1 = Epoch::new(5000.0, 1).unwrap();
        assert_eq!(moon[0].position(e0), Vec3::new(0.0, 384_400.0, 0.0));
        assert_eq!(moon[0].position(e0), moon[0].position(e1));
    }

    #[test]
    fn client_rejects_bad_parameters() {
        assert!(build_client(&ClientConfig::LeoPair {
            altitude_km: -1.0,
            inclination_deg: 0.0,
            raan_deg: 0.0,
            initial_anomaly_deg: 0.0,
            lead_separation_deg: 1.0
        })
        .is_err());
        assert!(build_client(&ClientConfig::LunarSurface { distance_km: 1.0, direction: [0.0; 3] }).is_err());
        let bad: Result<ClientConfig, _> = serde_json::from_str(r#"{"kind":"mars_orbit"}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn time_grid_cells() {
        let g = TimeGrid::new(80, 100.0, 10.0).unwrap();
        assert_eq!(g.len(), 10);
        let single = TimeGrid::new(80, 10.0, 10.0).unwrap();
        assert_eq!(single.len(), 1);
        assert!(TimeGrid::new(80, 5.0, 10.0).is_err());
        assert!(TimeGrid::new(80, 5.0, 0.0).is_err());
        assert!(TimeGrid::new(0, 50.0, 10.0).is_err());
        let g = TimeGrid::new(1, 0.3, 0.1).unwrap();
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn ground_station_sees_zenith() {
        let gs = GroundStation { name: "eq".into(), lat_deg: 0.0, lon_deg: 0.0, min_elevation_deg: 10.0 };
        let e = Epoch::new(0.0, 1).unwrap();
        let overhead = Vec3::new(EARTH_RADIUS_KM + 550.0, 0.0, 0.0);
        assert_relative_eq!(gs.elevation_deg(e, &overhead), 90.0, epsilon = 1e-9);
        assert!(gs.elevation_deg(e, &-overhead) < 0.0);
    }

    #[test]
    fn sat_id_text_round_trip() {
        let id: SatId = "3.7".parse().unwrap();
        assert_eq!(id, SatId::new(3, 7));
        assert_eq!(id.to_string(), "3.7");
        assert!("3".parse::<SatId>().is_err());
    }
}
