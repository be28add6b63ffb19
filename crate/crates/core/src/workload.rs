//! Imaging data rates and compute demand of the reference use cases.
//!
//! `MB` is always 10^6 bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BYTES_PER_MB: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkloadError {
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("ground resolution {resolution_m} m exceeds swath {swath_km} km")]
    ResolutionExceedsSwath { resolution_m: f64, swath_km: f64 },
    #[error("compute intensity must satisfy min <= mean <= max, got {min} / {mean} / {max}")]
    IntensityOrder { min: f64, mean: f64, max: f64 },
    #[error("workload has no object size; use the imaging data rate")]
    MissingObjectSize,
    #[error("workload overrides the image with a fixed object size; use the object stream rate")]
    ObjectSizeOverride,
    #[error("unknown workload preset {0:?}")]
    UnknownPreset(String),
}

/// Processing cost per megabyte of input, GFLOP/MB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intensity {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Intensity {
    /// Range with the midpoint as mean.
    pub fn from_range(min: f64, max: f64) -> Self {
        Self { min, mean: (min + max) / 2.0, max }
    }
}

/// Region-of-interest follow-up stream at a finer resolution (the UC1
/// mothership scans).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetailStream {
    pub ground_resolution_m: f64,
    /// Fraction of the full-swath fine-resolution image actually acquired.
    pub roi_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingWorkload {
    pub swath_km: f64,
    pub ground_resolution_m: f64,
    pub channels: u32,
    pub bits_per_channel: u32,
    /// Image acquisition time, or mean object recurrence when
    /// `object_size_mb` is set.
    pub acquisition_or_recurrence_s: f64,
    pub intensity_gflop_per_mb: Intensity,
    /// Client satellites or rovers feeding one SDC node.
    pub n_sources: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_size_mb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail_stream: Option<DetailStream>,
}

fn positive(field: &'static str, value: f64) -> Result<(), WorkloadError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WorkloadError::NonPositive { field, value })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), WorkloadError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WorkloadError::Negative { field, value })
    }
}

impl ImagingWorkload {
    /// Every violated constraint, not just the first.
    pub fn validate(&self) -> Vec<WorkloadError> {
        let mut errs = Vec::new();
        let checks = [
            positive("swath_km", self.swath_km),
            positive("ground_resolution_m", self.ground_resolution_m),
            positive("channels", self.channels as f64),
            positive("bits_per_channel", self.bits_per_channel as f64),
            positive("acquisition_or_recurrence_s", self.acquisition_or_recurrence_s),
            positive("n_sources", self.n_sources as f64),
            positive("intensity_gflop_per_mb.min", self.intensity_gflop_per_mb.min),
        ];
        errs.extend(checks.into_iter().filter_map(Result::err));
        let i = self.intensity_gflop_per_mb;
        if !(i.min <= i.mean && i.mean <= i.max) {
            errs.push(WorkloadError::IntensityOrder { min: i.min, mean: i.mean, max: i.max });
        }
        if self.ground_resolution_m > self.swath_km * 1000.0 {
            errs.push(WorkloadError::ResolutionExceedsSwath { resolution_m: self.ground_resolution_m, swath_km: self.swath_km });
        }
        if let Some(size) = self.object_size_mb {
            errs.extend(non_negative("object_size_mb", size).err());
        }
        if let Some(d) = self.detail_stream {
            errs.extend(positive("detail_stream.ground_resolution_m", d.ground_resolution_m).err());
            if !(d.roi_fraction >= 0.0 && d.roi_fraction <= 1.0) {
                errs.push(WorkloadError::Negative { field: "detail_stream.roi_fraction", value: d.roi_fraction });
            }
        }
        errs
    }

    pub fn bytes_per_pixel(&self) -> f64 {
        self.channels as f64 * self.bits_per_channel as f64 / 8.0
    }

    pub fn pixels_per_image(&self) -> f64 {
        pixels(self.swath_km, self.ground_resolution_m)
    }
}

fn pixels(swath_km: f64, resolution_m: f64) -> f64 {
    (swath_km * 1000.0 / resolution_m).powi(2)
}

fn imaging_rate(swath_km: f64, resolution_m: f64, w: &ImagingWorkload) -> Result<f64, WorkloadError> {
    positive("swath_km", swath_km)?;
    positive("ground_resolution_m", resolution_m)?;
    positive("acquisition_or_recurrence_s", w.acquisition_or_recurrence_s)?;
    if resolution_m > swath_km * 1000.0 {
        return Err(WorkloadError::ResolutionExceedsSwath { resolution_m, swath_km });
    }
    let bytes = pixels(swath_km, resolution_m) * w.bytes_per_pixel();
    Ok(bytes / BYTES_PER_MB / w.acquisition_or_recurrence_s)
}

/// Data rate of a square swath image stream, MB/s.
pub fn image_data_rate(w: &ImagingWorkload) -> Result<f64, WorkloadError> {
    if w.object_size_mb.is_some() {
        return Err(WorkloadError::ObjectSizeOverride);
    }
    imaging_rate(w.swath_km, w.ground_resolution_m, w)
}

/// Data rate of a fixed-size object stream, MB/s.
pub fn object_stream_rate(w: &ImagingWorkload) -> Result<f64, WorkloadError> {
    let size = w.object_size_mb.ok_or(WorkloadError::MissingObjectSize)?;
    non_negative("object_size_mb", size)?;
    positive("acquisition_or_recurrence_s", w.acquisition_or_recurrence_s)?;
    Ok(size / w.acquisition_or_recurrence_s)
}

/// Per-source rate of the primary stream, whichever form it takes.
pub fn stream_rate(w: &ImagingWorkload) -> Result<f64, WorkloadError> {
    match w.object_size_mb {
        Some(_) => object_stream_rate(w),
        None => image_data_rate(w),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadDemand {
    pub data_rate_mbps: f64,
    pub aggregate_data_rate_mbps: f64,
    pub compute_gflops: f64,
    pub aggregate_compute_gflops: f64,
}

pub fn compute_demand(rate_mbps: f64, intensity_gflop_per_mb: f64, n_sources: u32) -> Result<WorkloadDemand, WorkloadError> {
    non_negative("rate_mbps", rate_mbps)?;
    non_negative("intensity_gflop_per_mb", intensity_gflop_per_mb)?;
    let compute_gflops = rate_mbps * intensity_gflop_per_mb;
    Ok(WorkloadDemand {
        data_rate_mbps: rate_mbps,
        aggregate_data_rate_mbps: rate_mbps * n_sources as f64,
        compute_gflops,
        aggregate_compute_gflops: compute_gflops * n_sources as f64,
    })
}

/// Convert a per-pixel cost (kFLOP/pixel) into GFLOP/MB.
pub fn intensity_from_per_pixel_cost(kflop_per_pixel: f64, channels: u32, bits_per_channel: u32) -> Result<f64, WorkloadError> {
    positive("kflop_per_pixel", kflop_per_pixel)?;
    positive("channels", channels as f64)?;
    positive("bits_per_channel", bits_per_channel as f64)?;
    let bytes_per_pixel = channels as f64 * bits_per_channel as f64 / 8.0;
    // kFLOP/byte == GFLOP/MB
    Ok(kflop_per_pixel / bytes_per_pixel)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamDemand {
    pub stream: String,
    pub n_sources: u32,
    pub intensity_gflop_per_mb: f64,
    #[serde(flatten)]
    pub demand: WorkloadDemand,
}

/// Demand of every stream of a workload at its mean intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadAssessment {
    pub streams: Vec<StreamDemand>,
    /// Sum of all streams' aggregate compute.
    pub combined_compute_gflops: f64,
    /// Minimum SDC compute requirement: aggregate compute of the primary stream.
    pub required_compute_tflops: f64,
    pub compute_range_gflops: [f64; 2],
}

impl WorkloadAssessment {
    pub fn primary(&self) -> &StreamDemand {
        &self.streams[0]
    }
}

pub fn assess(w: &ImagingWorkload) -> Result<WorkloadAssessment, WorkloadError> {
    if let Some(e) = w.validate().into_iter().next() {
        return Err(e);
    }
    let mean = w.intensity_gflop_per_mb.mean;
    let rate = stream_rate(w)?;
    let primary = compute_demand(rate, mean, w.n_sources)?;
    let name = if w.object_size_mb.is_some() { "objects" } else { "imaging" };
    let mut streams = vec![StreamDemand { stream: name.into(), n_sources: w.n_sources, intensity_gflop_per_mb: mean, demand: primary }];
    if let Some(d) = w.detail_stream {
        let rate = imaging_rate(w.swath_km, d.ground_resolution_m, w)? * d.roi_fraction;
        streams.push(StreamDemand {
            stream: "detail".into(),
            n_sources: w.n_sources,
            intensity_gflop_per_mb: mean,
            demand: compute_demand(rate, mean, w.n_sources)?,
        });
    }
    let combined_compute_gflops = streams.iter().map(|s| s.demand.aggregate_compute_gflops).sum();
    let agg_rate = primary.aggregate_data_rate_mbps;
    Ok(WorkloadAssessment {
        combined_compute_gflops,
        required_compute_tflops: primary.aggregate_compute_gflops / 1000.0,
        compute_range_gflops: [agg_rate * w.intensity_gflop_per_mb.min, agg_rate * w.intensity_gflop_per_mb.max],
        streams,
    })
}

/// Segmentation cost range of the reference U-Net, kFLOP per RGB pixel.
pub const SEGMENTATION_KFLOP_PER_PIXEL: (f64, f64) = (272.0, 1900.0);

fn segmentation_intensity() -> Intensity {
    let (lo, hi) = SEGMENTATION_KFLOP_PER_PIXEL;
    let lo = intensity_from_per_pixel_cost(lo, 3, 8).expect("positive constants");
    let hi = intensity_from_per_pixel_cost(hi, 3, 8).expect("positive constants");
    Intensity::from_range(lo, hi)
}

pub const PRESET_NAMES: [&str; 3] = ["uc1", "uc2", "uc3"];

/// Built-in workloads of the three reference use cases.
pub fn preset(name: &str) -> Result<ImagingWorkload, WorkloadError> {
    let base = ImagingWorkload {
        swath_km: 290.0,
        ground_resolution_m: 100.0,
        channels: 3,
        bits_per_channel: 8,
        acquisition_or_recurrence_s: 40.0,
        intensity_gflop_per_mb: segmentation_intensity(),
        n_sources: 1,
        object_size_mb: None,
        detail_stream: None,
    };
    match name {
        // scout at 100 m plus mothership ROI scans at 10 m
        "uc1" => Ok(ImagingWorkload { detail_stream: Some(DetailStream { ground_resolution_m: 10.0, roi_fraction: 0.01 }), ..base }),
        // future sensor: 50 MB products every 20 s, four clients per node
        "uc2" => Ok(ImagingWorkload { acquisition_or_recurrence_s: 20.0, n_sources: 4, object_size_mb: Some(50.0), ..base }),
        // lunar rovers: 3 MB per minute, twenty rovers
        "uc3" => Ok(ImagingWorkload { acquisition_or_recurrence_s: 60.0, n_sources: 20, object_size_mb: Some(3.0), ..base }),
        other => Err(WorkloadError::UnknownPreset(other.to_string())),
    }
}
