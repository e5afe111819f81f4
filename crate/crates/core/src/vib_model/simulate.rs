use super::{bend_curvature, BendProfile, TwoDofParams};
use crate::error::{Error, Result};
use crate::shape::CalibrationModel;
use crate::trace::{ChannelLabel, WavelengthTrace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

pub const DEFAULT_NOISE_SIGMA_NM: f64 = 0.002;
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1000.0;
pub const PRESET_NAMES: [&str; 3] = ["soft-70rpm", "hard-2250rpm", "paper"];
/// Relative amplitudes of the 2x and 3x partials in the bending presets.
const PRESET_HARMONICS: [f64; 2] = [0.25, 0.1];

/// One simulated recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub rpm: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub bend: Option<BendProfile>,
    pub noise_sigma_nm: f64,
    /// Base wavelength and curvature sensitivity per active area.
    pub calibration: CalibrationModel,
    /// Relative amplitudes of the 2x, 3x, ... partials of the tool response.
    pub harmonics: Vec<f64>,
    /// 1 or 2. The second fiber sits opposite the first and sees the shape
    /// term with reversed sign.
    pub fibers: u8,
}

impl Default for Scenario {
    /// 10 s straight-pose recording at 120 rpm.
    fn default() -> Self {
        Self {
            rpm: 120.0,
            duration_s: 10.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            bend: None,
            noise_sigma_nm: DEFAULT_NOISE_SIGMA_NM,
            calibration: CalibrationModel::default(),
            harmonics: Vec::new(),
            fibers: 1,
        }
    }
}

impl Scenario {
    pub fn straight(rpm: f64, duration_s: f64) -> Self {
        Self {
            rpm,
            duration_s,
            ..Self::default()
        }
    }

    /// Default bend profile over its full length, with tool partials.
    pub fn bending(rpm: f64) -> Self {
        let bend = BendProfile::default();
        Self {
            rpm,
            duration_s: bend.total_duration_s(),
            bend: Some(bend),
            harmonics: PRESET_HARMONICS.to_vec(),
            ..Self::default()
        }
    }

    /// Named presets: the two recommended tool velocities and the 120 rpm
    /// bending run used for spectral analysis.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "soft-70rpm" => Ok(Self::bending(70.0)),
            "hard-2250rpm" => Ok(Self::bending(2250.0)),
            "paper" => Ok(Self::bending(120.0)),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    /// Forcing frequency of the tool (Hz).
    pub fn forcing_hz(&self) -> f64 {
        self.rpm / 60.0
    }

    pub fn n_harmonics_modeled(&self) -> usize {
        1 + self.harmonics.len()
    }

    pub fn n_samples(&self) -> usize {
        ((self.duration_s * self.sample_rate_hz).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rpm.is_finite() && self.rpm >= 0.0) {
            return Err(Error::Config(format!("rpm must be non-negative, got {}", self.rpm)));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {} s",
                self.duration_s
            )));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {} Hz",
                self.sample_rate_hz
            )));
        }
        let highest = self.forcing_hz() * self.n_harmonics_modeled() as f64;
        if self.sample_rate_hz <= 2.0 * highest {
            return Err(Error::Config(format!(
                "sample rate {} Hz does not exceed twice the highest modeled tool frequency {} Hz",
                self.sample_rate_hz, highest
            )));
        }
        if !(self.noise_sigma_nm.is_finite() && self.noise_sigma_nm >= 0.0) {
            return Err(Error::Config("noise sigma must be non-negative".into()));
        }
        if self.harmonics.iter().any(|h| !h.is_finite()) {
            return Err(Error::Config("harmonic amplitudes must be finite".into()));
        }
        if !(self.fibers == 1 || self.fibers == 2) {
            return Err(Error::Config(format!("fibers must be 1 or 2, got {}", self.fibers)));
        }
        self.calibration.validate()?;
        if let Some(bend) = &self.bend {
            bend.validate()?;
        }
        Ok(())
    }
}

/// Generates the wavelength trace of `scenario`.
///
/// Each channel is base wavelength, plus the bend shape term through the
/// area's sensitivity, plus the steady-state tool vibration (scaled up while
/// the cable is slack), plus Gaussian noise. If the recording outlasts the
/// bend profile, the final pose is held.
pub fn simulate(scenario: &Scenario, params: &TwoDofParams, seed: u64) -> Result<WavelengthTrace> {
    scenario.validate()?;
    params.validate()?;

    let fs = scenario.sample_rate_hz;
    let n = scenario.n_samples();
    let w = 2.0 * PI * scenario.forcing_hz();
    let phasor = params.output_phasor(scenario.forcing_hz())?;
    let (amp, phase) = (phasor.norm(), phasor.arg());

    let calib = &scenario.calibration;
    let n_aa = calib.areas.len();
    let mut labels = Vec::new();
    for fiber in 0..scenario.fibers {
        for aa in 0..n_aa {
            labels.push(ChannelLabel { fiber, aa: aa as u8 });
        }
    }
    let mut channels = vec![Vec::with_capacity(n); labels.len()];

    let noise = if scenario.noise_sigma_nm > 0.0 {
        Some(Normal::new(0.0, scenario.noise_sigma_nm).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let bend_end = scenario.bend.as_ref().map(|b| b.total_duration_s());
    for i in 0..n {
        let t = i as f64 / fs;
        let (curvature, slack) = match (&scenario.bend, bend_end) {
            (Some(b), Some(end)) => {
                let s = bend_curvature(b, t.min(end))?;
                (s.curvature_per_m, b.slack_factor(s.displacement_mm))
            }
            _ => (0.0, 1.0),
        };

        let mut vib = 0.0;
        if amp > 0.0 {
            vib = (w * t + phase).sin();
            for (h, rel) in scenario.harmonics.iter().enumerate() {
                let m = (h + 2) as f64;
                vib += rel * (m * (w * t + phase)).sin();
            }
            vib *= amp * slack;
        }

        for (label, channel) in labels.iter().zip(channels.iter_mut()) {
            let area = &calib.areas[label.aa as usize];
            let sign = if label.fiber == 0 { 1.0 } else { -1.0 };
            let mut v = area.base_wavelength_nm
                + sign * area.sensitivity_nm_per_invm * curvature
                + vib;
            if let Some(dist) = &noise {
                v += dist.sample(&mut rng);
            }
            channel.push(v);
        }
    }

    WavelengthTrace::new(fs, 0.0, labels, channels)
}
