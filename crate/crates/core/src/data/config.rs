//! Experiment configuration files: TOML with fixed sections. Unknown or
//! misspelled keys are rejected with the key name in the message. Dotted
//! `key=value` overrides are applied to the parsed document before
//! deserialization so they go through the same validation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::eval::BiasBenchConfig;
use crate::hw::HwConfig;
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentMeta,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub hw: HwConfig,
    #[serde(default)]
    pub ais: AisSection,
    #[serde(default)]
    pub bias: BiasBenchConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub classify: ClassifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentMeta {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub visible: usize,
    pub hidden: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            visible: 12,
            hidden: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic,
    Idx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub source: DataSource,
    /// Synthetic mode: how many vectors to sample.
    pub n_samples: usize,
    /// IDX mode: image and (optional) label file paths.
    pub images: Option<String>,
    pub labels: Option<String>,
    /// IDX mode: cap on the number of samples taken from the file.
    pub limit: Option<usize>,
    pub binarize: BinarizeKind,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinarizeKind {
    Threshold,
    Stochastic,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            source: DataSource::Synthetic,
            n_samples: 100,
            images: None,
            labels: None,
            limit: None,
            binarize: BinarizeKind::Threshold,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AisSection {
    pub n_temps: usize,
    pub n_runs: usize,
    pub base: AisBaseKind,
    /// Evaluate a saved model instead of a freshly initialized one.
    pub model: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AisBaseKind {
    Uniform,
    Fitted,
}

impl Default for AisSection {
    fn default() -> Self {
        Self {
            n_temps: 1000,
            n_runs: 100,
            base: AisBaseKind::Fitted,
            model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Static-variation RMS values of the grid.
    pub variation_grid: Vec<f64>,
    /// Dynamic-noise RMS values of the grid.
    pub noise_grid: Vec<f64>,
    pub smoothing_window: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            variation_grid: vec![0.03, 0.10, 0.17, 0.24, 0.30],
            noise_grid: vec![0.03, 0.10, 0.17, 0.24, 0.30],
            smoothing_window: 10,
        }
    }
}

impl SweepSection {
    /// Cartesian product, variation-major.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.variation_grid
            .iter()
            .flat_map(|&v| self.noise_grid.iter().map(move |&n| (v, n)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    pub reg: f64,
    pub head_learning_rate: f64,
    pub head_epochs: usize,
    /// Held-out fraction of the data used for test accuracy.
    pub test_fraction: f64,
    /// Optional IDX files with held-out data; overrides test_fraction.
    pub test_images: Option<String>,
    pub test_labels: Option<String>,
}

impl Default for ClassifySection {
    fn default() -> Self {
        Self {
            reg: 1e-4,
            head_learning_rate: 0.5,
            head_epochs: 400,
            test_fraction: 0.2,
            test_images: None,
            test_labels: None,
        }
    }
}

/// Parse config text, rejecting unknown keys.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig, DataError> {
    toml::from_str(text).map_err(|e| DataError::Config {
        path: origin.to_string(),
        message: e.to_string(),
    })
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())
}

pub fn to_toml_string(config: &ExperimentConfig) -> String {
    toml::to_string_pretty(config).expect("config serializes")
}

/// Apply `section.key=value` overrides onto a parsed TOML document. Values
/// are parsed as TOML scalars, falling back to strings.
pub fn apply_overrides(
    config: &ExperimentConfig,
    overrides: &[String],
) -> Result<ExperimentConfig, DataError> {
    if overrides.is_empty() {
        return Ok(config.clone());
    }
    let text = to_toml_string(config);
    let mut doc: toml::Table = toml::from_str(&text).expect("round-trip of our own config");
    for entry in overrides {
        let (path, raw_value) = entry.split_once('=').ok_or_else(|| DataError::Config {
            path: "override".into(),
            message: format!("override {entry:?} is not of the form key=value"),
        })?;
        let value = parse_scalar(raw_value.trim());
        set_path(&mut doc, path.trim(), value).map_err(|message| DataError::Config {
            path: "override".into(),
            message,
        })?;
    }
    let merged = toml::to_string(&doc).expect("table serializes");
    parse_config(&merged, "override")
}

fn parse_scalar(raw: &str) -> toml::Value {
    let probe = format!("x = {raw}");
    if let Ok(table) = probe.parse::<toml::Table>() {
        if let Some(value) = table.get("x") {
            return value.clone();
        }
    }
    toml::Value::String(raw.to_string())
}

fn set_path(doc: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), String> {
    let mut parts = path.split('.').peekable();
    let mut current = doc;
    loop {
        let key = parts.next().ok_or_else(|| format!("empty override path {path:?}"))?;
        if parts.peek().is_none() {
            current.insert(key.to_string(), value);
            return Ok(());
        }
        current = current
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("override path {path:?} crosses a non-table value"))?;
    }
}
