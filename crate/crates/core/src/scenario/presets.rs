use std::path::PathBuf;

use super::{parse_scenario, Scenario, ScenarioError};

/// Directory searched for `<name>.json` before the built-in presets.
pub const PRESET_DIR_ENV: &str = "SDC_PRESET_DIR";

const BUILTIN: [(&str, &str); 3] = [
    ("uc1", include_str!("../../presets/uc1.json")),
    ("uc2", include_str!("../../presets/uc2.json")),
    ("uc3", include_str!("../../presets/uc3.json")),
];

fn preset_dir() -> Option<PathBuf> {
    std::env::var_os(PRESET_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Built-in names plus any `*.json` in the preset directory, sorted.
pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = BUILTIN.iter().map(|(n, _)| n.to_string()).collect();
    if let Some(entries) = preset_dir().and_then(|d| std::fs::read_dir(d).ok()) {
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_string());
                }
            }
        }
    }
    names.sort();
    names.dedup();
    names
}

/// Raw JSON of a preset; the preset directory overrides built-ins.
pub fn preset_source(name: &str) -> Result<String, ScenarioError> {
    if let Some(dir) = preset_dir() {
        let path = dir.join(format!("{name}.json"));
        if path.is_file() {
            return std::fs::read_to_string(&path)
                .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() });
        }
    }
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| ScenarioError::UnknownPreset(name.to_string()))
}

pub fn preset_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario(&preset_source(name)?)
}
