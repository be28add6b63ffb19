use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdc_core::api::{self, ApiConfig};
use sdc_core::forecast::{calibrate, table2_targets, ForecastParams, TargetTable};
use sdc_core::scenario::{
    emit, load_scenario, preset_names, preset_scenario, preset_source, report_json, run, sweep, OutputFormat, Scenario, ScenarioError,
};

#[derive(Parser)]
#[command(name = "sdc", version, about = "SDC constellation simulator and design forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a preset name) and write its report.
    Run {
        scenario: String,
        /// Output directory; the JSON report goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Run a scenario once per value of a numeric field.
    Sweep {
        scenario: String,
        /// Dotted field path, e.g. design.year or links.exclusion_angle_deg.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Also write sweep.csv and one report per point here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP/JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory with the built explorer UI.
        #[arg(long)]
        ui: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        horizon_cap_periods: f64,
    },
    /// List or print scenario presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Refit the forecast parameters to a target table.
    Calibrate {
        /// Target table JSON; defaults to the shipped reference table.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Prior parameters JSON; defaults to the shipped priors.
        #[arg(long)]
        priors: Option<PathBuf>,
        /// Write the parameters here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        if e.exit_code() == 1 {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

/// A path, or a preset name when no such file exists.
fn load(arg: &str) -> Result<Scenario, ScenarioError> {
    if !Path::new(arg).exists() && preset_names().iter().any(|n| n == arg) {
        return preset_scenario(arg);
    }
    load_scenario(arg)
}

fn stdout_write(text: &str) -> Result<(), Failure> {
    std::io::stdout().lock().write_all(text.as_bytes()).map_err(runtime)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, out, format } => {
            let scenario = load(&scenario)?;
            let report = run(&scenario)?;
            let format = format.unwrap_or(scenario.output.format);
            let dir = out.or_else(|| scenario.output.dir.as_ref().map(PathBuf::from));
            match (dir, format) {
                (None, OutputFormat::Json) => stdout_write(&report_json(&report))?,
                (None, OutputFormat::Csv) => return Err(Failure::Validation("csv output needs --out DIR".into())),
                (Some(dir), format) => {
                    for path in emit(&report, format, &dir)? {
                        println!("{}", path.display());
                    }
                }
            }
        }
        Command::Sweep { scenario, axis, values, out } => {
            let scenario = load(&scenario)?;
            let result = sweep(&scenario, &axis, &values)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &result.rows {
                w.serialize(row).map_err(runtime)?;
            }
            let table = String::from_utf8(w.into_inner().map_err(runtime)?).map_err(runtime)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(runtime)?;
                std::fs::write(dir.join("sweep.csv"), &table).map_err(runtime)?;
                for (i, report) in result.reports.iter().enumerate() {
                    std::fs::write(dir.join(format!("report_{i:03}.json")), report_json(report)).map_err(runtime)?;
                }
            }
            stdout_write(&table)?;
        }
        Command::Serve { port, host, ui, horizon_cap_periods } => {
            let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| Failure::Validation(format!("bad address: {e}")))?;
            let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
            eprintln!("listening on http://{addr}");
            rt.block_on(api::serve(addr, ApiConfig { horizon_cap_periods, ui_dir: ui })).map_err(runtime)?;
        }
        Command::Presets { action: PresetAction::List } => {
            for name in preset_names() {
                println!("{name}");
            }
        }
        Command::Presets { action: PresetAction::Show { name } } => stdout_write(&preset_source(&name)?)?,
        Command::Calibrate { targets, priors, out } => {
            let targets: TargetTable = match targets {
                Some(p) => read_json(&p)?,
                None => table2_targets(),
            };
            let priors: ForecastParams = match priors {
                Some(p) => read_json(&p)?,
                None => ForecastParams::priors(),
            };
            let res = calibrate(&targets, &priors).map_err(|e| Failure::Validation(e.to_string()))?;
            for (label, f) in &res.fitted_fractions {
                eprintln!("fitted {label}.compute_power_fraction = {f}");
            }
            for c in &res.residuals {
                eprintln!("{:<6} {:<34} target {:>12} model {:>14.6} error {:>6.2}%", c.row, c.cell, c.target, c.model, 100.0 * c.rel_error);
            }
            eprintln!("max relative error {:.2}%", 100.0 * res.max_rel_error);
            let mut text = serde_json::to_string_pretty(&res.params).map_err(runtime)?;
            text.push('\n');
            match out {
                Some(path) => std::fs::write(&path, text).map_err(runtime)?,
                None => stdout_write(&text)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
