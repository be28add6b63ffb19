use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Report, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format {other:?}, expected json or csv")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Files written in CSV mode, when the matching section exists.
pub const CSV_TABLES: [&str; 7] = ["meta.csv", "topology.csv", "routers.csv", "outage.csv", "routing.csv", "workload.csv", "forecast.csv"];

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn io_err(path: &Path, e: impl fmt::Display) -> ScenarioError {
    ScenarioError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn write_table(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf, ScenarioError> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(header).map_err(|e| io_err(&path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Pretty JSON of a report with a trailing newline.
pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Pretty JSON of a resolved scenario with a trailing newline.
pub fn scenario_json(scenario: &super::Scenario) -> String {
    let mut s = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    s.push('\n');
    s
}

/// Write `report` into `dir`: `report.json`, or one CSV file per table.
pub fn emit(report: &Report, format: OutputFormat, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, ScenarioError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    match format {
        OutputFormat::Json => {
            let path = dir.join("report.json");
            std::fs::write(&path, report_json(report)).map_err(|e| io_err(&path, e))?;
            Ok(vec![path])
        }
        OutputFormat::Csv => emit_csv(report, dir),
    }
}

fn emit_csv(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut files = Vec::new();
    let meta = vec![
        vec!["tool".into(), report.tool.clone()],
        vec!["version".into(), report.version.clone()],
        vec!["name".into(), report.scenario.name.clone()],
        vec!["content_hash".into(), report.content_hash.clone()],
    ];
    files.push(write_table(dir, "meta.csv", &["key", "value"], meta)?);

    if let Some(t) = &report.topology {
        let rows = t
            .snapshots
            .iter()
            .map(|s| vec![num(s.t), s.links.to_string(), s.up_links.to_string(), s.sun_blocked_links.to_string(), s.strongly_connected.to_string()])
            .collect();
        files.push(write_table(dir, "topology.csv", &["t", "links", "up_links", "sun_blocked_links", "strongly_connected"], rows)?);
        let rows = t
            .routers
            .iter()
            .map(|r| vec![r.node.to_string(), r.quasi_static_degree.to_string(), r.dynamic_degree.to_string()])
            .collect();
        files.push(write_table(dir, "routers.csv", &["node", "quasi_static_degree", "dynamic_degree"], rows)?);
    }
    if let Some(o) = &report.outage {
        let rows = o
            .rows
            .iter()
            .map(|r| vec![r.link_id.clone(), num(r.max_outage_s), num(r.outage_fraction), num(r.buffer_mb)])
            .collect();
        files.push(write_table(dir, "outage.csv", &["link_id", "max_outage_s", "outage_fraction", "buffer_MB"], rows)?);
    }
    if let Some(r) = &report.routing {
        let rows = r
            .pairs
            .iter()
            .map(|p| {
                vec![
                    p.src.to_string(),
                    p.dst.to_string(),
                    opt(p.max_latency_s),
                    opt(p.min_latency_s),
                    opt(p.mean_latency_s),
                    num(p.unreachable_fraction),
                    num(p.detour_fraction),
                    p.max_hops.to_string(),
                    opt(p.worst_t),
                    p.worst_path.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
                ]
            })
            .collect();
        let header = [
            "src",
            "dst",
            "max_latency_s",
            "min_latency_s",
            "mean_latency_s",
            "unreachable_fraction",
            "detour_fraction",
            "max_hops",
            "worst_t",
            "worst_path",
        ];
        files.push(write_table(dir, "routing.csv", &header, rows)?);
    }
    if let Some(w) = &report.workload {
        let rows = w
            .streams
            .iter()
            .map(|s| {
                vec![
                    s.stream.clone(),
                    s.n_sources.to_string(),
                    num(s.intensity_gflop_per_mb),
                    num(s.demand.data_rate_mbps),
                    num(s.demand.aggregate_data_rate_mbps),
                    num(s.demand.compute_gflops),
                    num(s.demand.aggregate_compute_gflops),
                ]
            })
            .collect();
        let header = [
            "stream",
            "n_sources",
            "intensity_GFLOP_per_MB",
            "data_rate_MBps",
            "aggregate_data_rate_MBps",
            "compute_GFLOPS",
            "aggregate_compute_GFLOPS",
        ];
        files.push(write_table(dir, "workload.csv", &header, rows)?);
    }
    if let Some(f) = &report.forecast {
        let rows = vec![
            ("year", f.year.to_string()),
            ("total_power_w", num(f.total_power_w)),
            ("available_compute_tflops", num(f.available_compute_tflops)),
            ("raw_compute_tflops", num(f.raw_compute_tflops)),
            ("required_compute_tflops", opt(f.required_compute_tflops)),
            ("shortfall", f.shortfall.to_string()),
            ("satellite_mass_kg", num(f.satellite_mass_kg)),
            ("compute_efficiency_w_per_tflops", num(f.compute_efficiency_w_per_tflops)),
            ("chip_efficiency_w_per_tflops", num(f.chip_efficiency_w_per_tflops)),
            ("cost_of_power_eur_per_w", opt(f.cost_of_power_eur_per_w)),
            ("cost_of_compute_eur_per_tflops", opt(f.cost_of_compute_eur_per_tflops)),
            ("total_cost_eur", num(f.total_cost_eur)),
            ("launch_cost_eur", num(f.launch_cost_eur)),
            ("hardware_cost_eur", num(f.hardware_cost_eur)),
        ];
        let rows = rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
        files.push(write_table(dir, "forecast.csv", &["metric", "value"], rows)?);
    }
    Ok(files)
}
