//! Space data center (SDC) constellation simulator and design forecasting.
//!
//! - [`astro`]: circular orbits, Walker constellations, Sun direction
//! - [`isl`]: inter-satellite link geometry, Sun exclusion, contact intervals
//! - [`netsim`]: topology snapshots, routing, outage buffers, router roles
//! - [`workload`]: use-case data rates and compute demand
//! - [`forecast`]: roadmap curves, design sizing, calibration
//! - [`scenario`]: scenario files, runs, reports, sweeps
//! - `api`: HTTP/JSON service (feature `server`)

#[cfg(feature = "server")]
pub mod api;
pub mod astro;
pub mod forecast;
pub mod isl;
pub mod netsim;
pub mod scenario;
pub mod workload;

/// Crate version recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
