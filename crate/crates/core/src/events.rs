//! Level-shift detection on vibration-filtered channels.
//!
//! A two-sided Page CUSUM runs on deviations from a trailing baseline, the
//! mean of the previous `window_s` seconds:
//!
//! ```text
//! d[n]  = x[n] - mean(x[n-W .. n])
//! S+[n] = max(0, S+[n-1] + d[n] - drift)
//! S-[n] = max(0, S-[n-1] - d[n] - drift)
//! ```
//!
//! An alarm fires when either sum reaches the threshold. Both sums then
//! reset and detection pauses for one window while the baseline settles on
//! the new level. The first window of a record only fills the baseline.
//!
//! The baseline never depends on past alarms, so raising the threshold can
//! only delay alarms, never add them.

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD_NM: f64 = 0.2;
pub const DEFAULT_DRIFT_NM: f64 = 0.01;
pub const DEFAULT_WINDOW_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub threshold_nm: f64,
    /// Per-sample deviation absorbed before anything accumulates.
    pub drift_nm: f64,
    /// Baseline length and post-alarm hold-off.
    pub window_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold_nm: DEFAULT_THRESHOLD_NM,
            drift_nm: DEFAULT_DRIFT_NM,
            window_s: DEFAULT_WINDOW_S,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.drift_nm.is_finite() && self.drift_nm > 0.0) {
            return Err(Error::Config(format!("drift must be positive, got {}", self.drift_nm)));
        }
        if !(self.threshold_nm.is_finite() && self.threshold_nm > self.drift_nm) {
            return Err(Error::Config(format!(
                "threshold {} nm must exceed drift {} nm",
                self.threshold_nm, self.drift_nm
            )));
        }
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(Error::Config(format!("window must be positive, got {} s", self.window_s)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    pub index: usize,
    pub time_s: f64,
    /// Accumulated deviation at the alarm (nm), at least the threshold.
    pub magnitude_nm: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    pub events: Vec<StepEvent>,
    pub config: DetectorConfig,
}

/// Runs the detector over one channel. Event times count from the first
/// sample; add the trace start time for absolute times.
pub fn detect_steps(channel: &[f64], config: &DetectorConfig, sample_rate_hz: f64) -> Result<EventReport> {
    config.validate()?;
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::Config(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let w = ((config.window_s * sample_rate_hz).round() as usize).max(1);
    let (h, k) = (config.threshold_nm, config.drift_nm);

    // Deviations are taken from the record's first sample to keep the
    // running sums small next to absolute wavelengths.
    let origin = channel.first().copied().unwrap_or(0.0);
    let mut events = Vec::new();
    let mut window_sum = 0.0;
    let (mut up, mut down) = (0.0f64, 0.0f64);
    let mut resume = w;

    for (i, &v) in channel.iter().enumerate() {
        let x = v - origin;
        if i >= resume {
            let d = x - window_sum / w as f64;
            up = (up + d - k).max(0.0);
            down = (down - d - k).max(0.0);
            let alarm = if up >= h {
                Some((Direction::Up, up))
            } else if down >= h {
                Some((Direction::Down, down))
            } else {
                None
            };
            if let Some((direction, magnitude_nm)) = alarm {
                events.push(StepEvent {
                    index: i,
                    time_s: i as f64 / sample_rate_hz,
                    magnitude_nm,
                    direction,
                });
                up = 0.0;
                down = 0.0;
                resume = i + w;
            }
        }
        window_sum += x;
        if i >= w {
            window_sum -= channel[i - w] - origin;
        }
    }

    Ok(EventReport {
        events,
        config: *config,
    })
}
