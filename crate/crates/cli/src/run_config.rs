//! Run configuration files: JSON documents supplying defaults for the
//! scenario and loop parameters. Every physical quantity carries its unit in
//! the key name; unknown keys are rejected with the offending key named.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dispersim_core::temporal::WidthConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Option<ScenarioSection>,
    #[serde(default, rename = "loop")]
    pub loop_section: Option<LoopSection>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default)]
    pub platform: Option<String>,
    #[serde(default)]
    pub platform_files: Option<Vec<PathBuf>>,
    #[serde(default)]
    pub jitter_ps: Option<f64>,
    #[serde(default)]
    pub pulse_fwhm_ps: Option<f64>,
    #[serde(default)]
    pub pump_photons: Option<f64>,
    #[serde(default)]
    pub pair_probability: Option<f64>,
    #[serde(default)]
    pub contamination_threshold: Option<f64>,
    #[serde(default)]
    pub width_convention: Option<WidthConvention>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSection {
    #[serde(default)]
    pub loop_delay_ns: Option<f64>,
    #[serde(default)]
    pub rep_rate_khz: Option<f64>,
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub tap_ratio: Option<f64>,
    #[serde(default)]
    pub loop_loss_db: Option<f64>,
    #[serde(default)]
    pub differential_delay_ps: Option<f64>,
    #[serde(default)]
    pub creation_probability: Option<f64>,
    #[serde(default)]
    pub pump_clicks_per_bin_scale: Option<f64>,
    #[serde(default)]
    pub detector_jitter_ps: Option<f64>,
    #[serde(default)]
    pub efficiency: Option<f64>,
    #[serde(default)]
    pub dead_time_ns: Option<f64>,
    #[serde(default)]
    pub dark_count_rate_hz: Option<f64>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("config '{}' rejected: {e}", path.display()))
    }
}
