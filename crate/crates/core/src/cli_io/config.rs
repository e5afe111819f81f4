//! TOML run configuration. Every key is optional; command-line flags win
//! over the file, and the file wins over built-in defaults.
//!
//! ```toml
//! tool_rpm = 120.0
//! duration_s = 200.0
//! sample_rate_hz = 1000.0
//! noise_sigma_nm = 0.002
//! bend = true
//! bend_cable_speed_mm_s = 0.1
//! notch_harmonics = 3
//! detector_threshold_nm = 0.2
//! seed = 7
//! ```

use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // scenario
    pub tool_rpm: Option<f64>,
    pub duration_s: Option<f64>,
    pub sample_rate_hz: Option<f64>,
    pub noise_sigma_nm: Option<f64>,
    pub fibers: Option<u8>,
    /// Relative amplitudes of the 2x, 3x, ... tool partials.
    pub harmonic_amplitudes: Option<Vec<f64>>,
    pub preset: Option<String>,

    // bend profile
    pub bend: Option<bool>,
    pub bend_cable_speed_mm_s: Option<f64>,
    pub bend_pull_s: Option<f64>,
    pub bend_hold_s: Option<f64>,
    pub bend_cycles: Option<usize>,
    pub bend_curvature_gain_invm_per_mm: Option<f64>,
    pub bend_slack_scale: Option<f64>,

    // vibration model
    pub f1_hz: Option<f64>,
    pub f2_hz: Option<f64>,
    pub mass_ratio: Option<f64>,
    pub damping_ratio: Option<f64>,
    pub peak_output_nm: Option<f64>,

    // filtering
    pub notch_harmonics: Option<usize>,
    pub notch_bandwidth_hz: Option<f64>,
    pub shape_cutoff_hz: Option<f64>,

    // detection
    pub detector_threshold_nm: Option<f64>,
    pub detector_drift_nm: Option<f64>,
    pub detector_window_s: Option<f64>,

    // sweep
    pub sweep_min_rpm: Option<f64>,
    pub sweep_max_rpm: Option<f64>,
    pub sweep_points: Option<usize>,

    pub calibration_file: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            Error::Config(msg.lines().next().unwrap_or("invalid configuration").to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
