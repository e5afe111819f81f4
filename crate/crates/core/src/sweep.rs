//! Amplitude-vs-RPM sweeps and resonance identification.

use crate::error::{Error, Result};
use crate::filtering::period_average;
use crate::spectral::feature_spectrum;
use crate::trace::WavelengthTrace;
use crate::vib_model::{frf_amplitude, simulate, Scenario, TwoDofParams};
use rayon::prelude::*;

pub const DEFAULT_DISCARD_FRACTION: f64 = 0.2;
/// A local maximum counts as a resonance when it stands this far (relative
/// to its own height) above the deeper of its two surrounding valleys.
const MIN_RELATIVE_PROMINENCE: f64 = 0.1;
/// Avoid bands cover amplitudes above this fraction of the peak.
const AVOID_BAND_FRACTION: f64 = 0.5;
const MIN_PERIODS: f64 = 3.0;
/// Residual spans below this (nm) count as no oscillation at all.
const FLAT_SPAN_NM: f64 = 1e-9;

pub const DEFAULT_GRID_MIN_RPM: f64 = 10.0;
pub const DEFAULT_GRID_MAX_RPM: f64 = 2400.0;
pub const DEFAULT_GRID_POINTS: usize = 40;

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_rpm_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub fn default_rpm_grid() -> Vec<f64> {
    log_rpm_grid(DEFAULT_GRID_MIN_RPM, DEFAULT_GRID_MAX_RPM, DEFAULT_GRID_POINTS)
}

/// Straight pose, no noise, 30 s per point.
pub fn default_sweep_template() -> Scenario {
    Scenario {
        duration_s: 30.0,
        noise_sigma_nm: 0.0,
        ..Scenario::default()
    }
}

/// Half peak-to-peak of the oscillation left after discarding the leading
/// `discard_fraction` and removing slow shape content.
///
/// The oscillation frequency is taken from the spectrum of the retained
/// samples; see [`steady_amplitude_at`] when it is known.
pub fn steady_amplitude(samples: &[f64], sample_rate_hz: f64, discard_fraction: f64) -> Result<f64> {
    let kept = retained(samples, sample_rate_hz, discard_fraction)?;
    if is_flat(kept) {
        return Ok(0.0);
    }
    let spectrum = feature_spectrum(kept, sample_rate_hz)?;
    let k = spectrum
        .argmax_non_dc()
        .ok_or_else(|| Error::Measurement("too few samples to find an oscillation".into()))?;
    amplitude_at(kept, sample_rate_hz, spectrum.frequency_hz[k])
}

/// [`steady_amplitude`] with a known oscillation frequency.
pub fn steady_amplitude_at(
    samples: &[f64],
    sample_rate_hz: f64,
    discard_fraction: f64,
    frequency_hz: f64,
) -> Result<f64> {
    let kept = retained(samples, sample_rate_hz, discard_fraction)?;
    if is_flat(kept) {
        return Ok(0.0);
    }
    amplitude_at(kept, sample_rate_hz, frequency_hz)
}

fn retained(samples: &[f64], sample_rate_hz: f64, discard_fraction: f64) -> Result<&[f64]> {
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::Domain(format!(
            "discard fraction must lie in [0, 1), got {discard_fraction}"
        )));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::Domain(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let start = (samples.len() as f64 * discard_fraction).floor() as usize;
    let kept = &samples[start.min(samples.len())..];
    if kept.is_empty() {
        return Err(Error::Measurement("no samples left after the discard".into()));
    }
    Ok(kept)
}

fn is_flat(samples: &[f64]) -> bool {
    let (lo, hi) = min_max(samples);
    hi - lo <= FLAT_SPAN_NM
}

fn min_max(samples: &[f64]) -> (f64, f64) {
    samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn amplitude_at(samples: &[f64], sample_rate_hz: f64, frequency_hz: f64) -> Result<f64> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(Error::Measurement(format!(
            "oscillation frequency must be positive, got {frequency_hz} Hz"
        )));
    }
    let periods = samples.len() as f64 / sample_rate_hz * frequency_hz;
    if periods < MIN_PERIODS {
        return Err(Error::Measurement(format!(
            "{periods:.2} periods of {frequency_hz} Hz retained, need at least {MIN_PERIODS}"
        )));
    }

    // A one-period moving average follows the slow shape and cancels the
    // oscillation and its harmonics.
    let period = sample_rate_hz / frequency_hz;
    let (offset, shape) = period_average(samples, period)?;
    let residual: Vec<f64> = shape
        .iter()
        .enumerate()
        .map(|(j, s)| samples[j + offset] - s)
        .collect();

    let hi = refined_extremum(&residual, 1.0);
    let lo = -refined_extremum(&residual, -1.0);
    Ok(0.5 * (hi - lo))
}

/// Largest value of `sign * x`, refined by a parabola through the extreme
/// sample and its neighbours.
fn refined_extremum(x: &[f64], sign: f64) -> f64 {
    let (i, &v) = x
        .iter()
        .enumerate()
        .max_by(|a, b| (sign * a.1).total_cmp(&(sign * b.1)))
        .expect("residual is non-empty");
    let v = sign * v;
    if i == 0 || i + 1 == x.len() {
        return v;
    }
    let (l, r) = (sign * x[i - 1], sign * x[i + 1]);
    let curv = l - 2.0 * v + r;
    if curv >= 0.0 {
        return v;
    }
    v - 0.125 * (r - l) * (r - l) / curv
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attribution {
    SensorDominant,
    ManipulatorDominant,
}

impl Attribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Attribution::SensorDominant => "sensor-dominant",
            Attribution::ManipulatorDominant => "manipulator-dominant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub rpm: f64,
    pub amplitude_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    /// Peak velocity refined between grid points (rpm).
    pub rpm: f64,
    pub frequency_hz: f64,
    /// Largest sampled amplitude of this peak (nm).
    pub amplitude_nm: f64,
    pub avoid_band_rpm: (f64, f64),
    pub attribution: Attribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub points: Vec<SweepPoint>,
    pub resonances: Vec<Resonance>,
}

impl ResonanceReport {
    pub fn natural_frequencies_hz(&self) -> Vec<f64> {
        self.resonances.iter().map(|r| r.frequency_hz).collect()
    }

    pub fn avoid_bands_rpm(&self) -> Vec<(f64, f64)> {
        self.resonances.iter().map(|r| r.avoid_band_rpm).collect()
    }

    /// Whether `rpm` falls inside any avoid band.
    pub fn is_avoided(&self, rpm: f64) -> bool {
        self.resonances
            .iter()
            .any(|r| r.avoid_band_rpm.0 <= rpm && rpm <= r.avoid_band_rpm.1)
    }

    /// Human-readable summary block.
    pub fn summary(&self) -> String {
        let mut s = format!("points: {}\npeaks: {}\n", self.points.len(), self.resonances.len());
        for (i, r) in self.resonances.iter().enumerate() {
            s.push_str(&format!(
                "peak {}: {:.1} rpm ({:.3} Hz), amplitude {:.4} nm, {}, avoid {:.1}-{:.1} rpm\n",
                i + 1,
                r.rpm,
                r.frequency_hz,
                r.amplitude_nm,
                r.attribution.as_str(),
                r.avoid_band_rpm.0,
                r.avoid_band_rpm.1
            ));
        }
        s
    }
}

fn check_grid(rpms: &[f64]) -> Result<()> {
    if rpms.len() < 10 {
        return Err(Error::Input(format!("need at least 10 RPM points, got {}", rpms.len())));
    }
    if rpms.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Input("RPM values must be positive".into()));
    }
    if rpms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("RPM values must be strictly increasing".into()));
    }
    Ok(())
}

/// Simulates one trace per RPM from `template` and analyzes the curve. Point
/// `i` uses seed `seed + i`; points run in parallel.
pub fn run_sweep(
    rpms: &[f64],
    template: &Scenario,
    params: &TwoDofParams,
    seed: u64,
) -> Result<ResonanceReport> {
    check_grid(rpms)?;
    params.validate()?;
    for &rpm in rpms {
        let periods = template.duration_s * rpm / 60.0 * (1.0 - DEFAULT_DISCARD_FRACTION);
        if periods < MIN_PERIODS {
            return Err(Error::Input(format!(
                "{} s records hold only {periods:.2} retained periods at {rpm} rpm",
                template.duration_s
            )));
        }
    }

    let amplitudes = rpms
        .par_iter()
        .enumerate()
        .map(|(i, &rpm)| {
            let scenario = Scenario {
                rpm,
                ..template.clone()
            };
            let trace = simulate(&scenario, params, seed.wrapping_add(i as u64))?;
            steady_amplitude_at(
                &trace.channels[0],
                trace.sample_rate_hz,
                DEFAULT_DISCARD_FRACTION,
                rpm / 60.0,
            )
        })
        .collect::<Result<Vec<f64>>>()?;

    analyze_points(
        rpms.iter()
            .zip(amplitudes)
            .map(|(&rpm, amplitude_nm)| SweepPoint { rpm, amplitude_nm })
            .collect(),
        params,
    )
}

/// Sweep over recorded traces, one `(rpm, trace)` pair per velocity. The
/// first channel of each trace is measured.
pub fn sweep_from_traces(
    traces: &[(f64, WavelengthTrace)],
    params: &TwoDofParams,
) -> Result<ResonanceReport> {
    let rpms: Vec<f64> = traces.iter().map(|(r, _)| *r).collect();
    check_grid(&rpms)?;
    params.validate()?;
    let amplitudes = traces
        .par_iter()
        .map(|(rpm, trace)| {
            steady_amplitude_at(
                &trace.channels[0],
                trace.sample_rate_hz,
                DEFAULT_DISCARD_FRACTION,
                rpm / 60.0,
            )
        })
        .collect::<Result<Vec<f64>>>()?;
    analyze_points(
        rpms.iter()
            .zip(amplitudes)
            .map(|(&rpm, amplitude_nm)| SweepPoint { rpm, amplitude_nm })
            .collect(),
        params,
    )
}

/// Peak picking, refinement, avoid bands and attribution on a measured curve.
pub fn analyze_points(points: Vec<SweepPoint>, params: &TwoDofParams) -> Result<ResonanceReport> {
    let amp: Vec<f64> = points.iter().map(|p| p.amplitude_nm).collect();
    let rpm: Vec<f64> = points.iter().map(|p| p.rpm).collect();
    let n = amp.len();

    let mut resonances = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(amp[i] > amp[i - 1] && amp[i] >= amp[i + 1]) {
            continue;
        }
        if relative_prominence(&amp, i) < MIN_RELATIVE_PROMINENCE {
            continue;
        }
        let peak_rpm = refine_peak_rpm(&rpm, &amp, i);
        let frequency_hz = peak_rpm / 60.0;
        let displacement = frf_amplitude(params, frequency_hz)?;
        let attribution = if displacement.x1 > displacement.x2 {
            Attribution::ManipulatorDominant
        } else {
            Attribution::SensorDominant
        };
        let (lo, hi) = avoid_band(&rpm, &amp, i);
        resonances.push(Resonance {
            rpm: peak_rpm,
            frequency_hz,
            amplitude_nm: amp[i],
            avoid_band_rpm: (lo.min(peak_rpm), hi.max(peak_rpm)),
            attribution,
        });
    }
    Ok(ResonanceReport { points, resonances })
}

fn relative_prominence(amp: &[f64], i: usize) -> f64 {
    let h = amp[i];
    let mut left = h;
    for &v in amp[..i].iter().rev() {
        if v > h {
            break;
        }
        left = left.min(v);
    }
    let mut right = h;
    for &v in &amp[i + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    if h <= 0.0 {
        return 0.0;
    }
    (h - left.max(right)) / h
}

/// Vertex of the parabola through `(rpm^2, 1 / amp^2)` at the peak and its
/// neighbours. Near a lightly damped resonance the inverse squared amplitude
/// is close to quadratic in the squared forcing frequency, so the vertex
/// lands much closer to the true peak than the grid point does. Falls back
/// to the grid point if the fit is not convex or leaves the bracket.
fn refine_peak_rpm(rpm: &[f64], amp: &[f64], i: usize) -> f64 {
    let u: Vec<f64> = (i - 1..=i + 1).map(|j| rpm[j] * rpm[j]).collect();
    let v: Vec<f64> = (i - 1..=i + 1).map(|j| 1.0 / (amp[j] * amp[j])).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return rpm[i];
    }
    // Newton divided differences
    let d01 = (v[1] - v[0]) / (u[1] - u[0]);
    let d12 = (v[2] - v[1]) / (u[2] - u[1]);
    let c2 = (d12 - d01) / (u[2] - u[0]);
    if !(c2 > 0.0) {
        return rpm[i];
    }
    // v(u) = v0 + d01 (u - u0) + c2 (u - u0)(u - u1)
    let vertex = 0.5 * (u[0] + u[1]) - d01 / (2.0 * c2);
    if !(vertex > u[0] && vertex < u[2]) {
        return rpm[i];
    }
    vertex.sqrt()
}

/// RPM interval around peak `i` where the curve stays above half the peak,
/// with linear interpolation at the crossings.
fn avoid_band(rpm: &[f64], amp: &[f64], i: usize) -> (f64, f64) {
    let level = AVOID_BAND_FRACTION * amp[i];
    let cross = |a: usize, b: usize| {
        let t = (amp[a] - level) / (amp[a] - amp[b]);
        rpm[a] + t * (rpm[b] - rpm[a])
    };
    let mut lo = rpm[0];
    for j in (0..i).rev() {
        if amp[j] <= level {
            lo = cross(j + 1, j);
            break;
        }
    }
    let mut hi = rpm[rpm.len() - 1];
    for j in i + 1..rpm.len() {
        if amp[j] <= level {
            hi = cross(j - 1, j);
            break;
        }
    }
    (lo, hi)
}
