//! Config-file loading and resolution of flags over file values over defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

/// Every key a config file may set. Keys are the snake_case form of the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub sigma: Option<f64>,
    pub v: Option<f64>,
    pub c: Option<f64>,
    pub eta: Option<f64>,
    pub strategy: Option<String>,
    pub alpha: Option<f64>,
    pub r0: Option<f64>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub tack: Option<i8>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub record_stride: Option<usize>,
    pub damping_n: Option<u32>,
    pub wind_schedule: Option<PathBuf>,
    pub n: Option<usize>,
    pub tail_max: Option<usize>,
    pub cycles: Option<u32>,
    pub alpha0: Option<f64>,
    pub beta: Option<f64>,
    pub r1: Option<f64>,
    pub shift_limit: Option<u32>,
    pub margin: Option<f64>,
    pub no_shifts: Option<bool>,
    pub t_end: Option<f64>,
    pub dts: Option<Vec<f64>>,
    pub refine: Option<usize>,
    pub radial_steps: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag value if given, else file value, else the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
