//! Second-order IIR sections for tool-vibration removal and shape extraction.
//!
//! Notches place a zero pair on the unit circle at the notch frequency and a
//! pole pair just inside it at the same angle:
//!
//! ```text
//! beta = tan(pi * bw / fs),  g = 1 / (1 + beta)
//! H(z) = g (1 - 2 cos(w0) z^-1 + z^-2) / (1 - 2 g cos(w0) z^-1 + (2 g - 1) z^-2)
//! ```
//!
//! which has unit gain at DC and Nyquist and a -3 dB width of `bw`.
//!
//! Filtering runs each section forward and then backward, so the applied
//! magnitude is the squared section response with zero phase. Records are
//! extended at both ends by odd reflection over three pole time constants,
//! and each pass starts from the steady state of its first sample.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

/// Required single-pass attenuation at every notch center (dB).
pub const NOTCH_DEPTH_DB: f64 = -40.0;
pub const DEFAULT_NOTCH_HARMONICS: usize = 3;
const MIN_NOTCH_BANDWIDTH_HZ: f64 = 0.2;
/// Scales a single-pass Butterworth cutoff so the forward-backward response
/// is -3 dB at the requested cutoff: `(sqrt(2) - 1)^(-1/4)`.
const ZERO_PHASE_CUTOFF_SCALE: f64 = 1.246_505_137_646_745_2;

/// Notch bandwidth used when none is given: a quarter of the fundamental,
/// at least 0.2 Hz.
pub fn default_notch_bandwidth_hz(fundamental_hz: f64) -> f64 {
    (0.25 * fundamental_hz).max(MIN_NOTCH_BANDWIDTH_HZ)
}

/// `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, freq_hz: f64, sample_rate_hz: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / sample_rate_hz);
        let z2 = z1 * z1;
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z1 + self.a[1] * z2;
        num / den
    }

    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / (1.0 + self.a[0] + self.a[1])
    }

    /// Largest pole modulus.
    pub fn pole_radius(&self) -> f64 {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            a2.sqrt()
        } else {
            let s = disc.sqrt();
            ((-a1 + s) / 2.0).abs().max(((-a1 - s) / 2.0).abs())
        }
    }

    pub fn is_stable(&self) -> bool {
        self.a.iter().chain(&self.b).all(|v| v.is_finite()) && self.pole_radius() < 1.0
    }

    /// Samples for the impulse response envelope to fall by `e`.
    fn time_constant_samples(&self) -> f64 {
        let r = self.pole_radius();
        if r <= 0.0 {
            1.0
        } else {
            -1.0 / r.ln()
        }
    }

    /// Direct-form II transposed pass, starting from the steady state for a
    /// constant input equal to `x[0]`.
    fn run(&self, x: &[f64]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let Some(&x0) = x.first() else {
            return Vec::new();
        };
        let y0 = self.dc_gain() * x0;
        let mut z2 = b2 * x0 - a2 * y0;
        let mut z1 = y0 - b0 * x0;
        let mut out = Vec::with_capacity(x.len());
        for &v in x {
            let y = b0 * v + z1;
            z1 = b1 * v - a1 * y + z2;
            z2 = b2 * v - a2 * y;
            out.push(y);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Notch {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
}

/// An immutable, validated cascade of biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    sections: Vec<Biquad>,
    sample_rate_hz: f64,
    notches: Vec<Notch>,
}

impl FilterSpec {
    /// Checks stability of every section and the notch depth at each
    /// declared center.
    pub fn new(sections: Vec<Biquad>, sample_rate_hz: f64, notches: Vec<Notch>) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Design(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        for (i, s) in sections.iter().enumerate() {
            if !s.is_stable() {
                return Err(Error::Design(format!(
                    "section {i} is unstable (pole radius {})",
                    s.pole_radius()
                )));
            }
        }
        let spec = Self {
            sections,
            sample_rate_hz,
            notches,
        };
        for n in &spec.notches {
            let db = spec.gain_db(n.center_hz);
            if db > NOTCH_DEPTH_DB {
                return Err(Error::Design(format!(
                    "cascade reaches only {db:.1} dB at the {} Hz notch",
                    n.center_hz
                )));
            }
        }
        Ok(spec)
    }

    /// Passes every input through unchanged.
    pub fn identity(sample_rate_hz: f64) -> Result<Self> {
        Self::new(Vec::new(), sample_rate_hz, Vec::new())
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn notches(&self) -> &[Notch] {
        &self.notches
    }

    /// Single-pass cascade response.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        self.sections
            .iter()
            .map(|s| s.response(freq_hz, self.sample_rate_hz))
            .product()
    }

    /// Single-pass cascade gain (dB).
    pub fn gain_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.response(freq_hz).norm().log10()
    }

    /// Magnitude applied by [`apply_zero_phase`]: the squared cascade gain.
    pub fn zero_phase_magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm_sqr()
    }

    /// One causal pass through the cascade, each section starting settled on
    /// the first sample it sees.
    pub fn apply_forward(&self, samples: &[f64]) -> Vec<f64> {
        self.sections
            .iter()
            .fold(samples.to_vec(), |x, section| section.run(&x))
    }

    /// Coefficient file: `#` comment lines with the sample rate and notches,
    /// then one `b0 b1 b2 a1 a2` line per section.
    pub fn to_coefficient_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sample_rate_hz {}", self.sample_rate_hz);
        for n in &self.notches {
            let _ = writeln!(out, "# notch {} {}", n.center_hz, n.bandwidth_hz);
        }
        for s in &self.sections {
            let _ = writeln!(out, "{} {} {} {} {}", s.b[0], s.b[1], s.b[2], s.a[0], s.a[1]);
        }
        out
    }

    /// Parses [`FilterSpec::to_coefficient_text`] output. Errors carry the
    /// 1-based line number.
    pub fn from_coefficient_text(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut fs = None;
        let mut notches = Vec::new();
        let mut sections = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let num = |tok: &str| -> std::result::Result<f64, (usize, String)> {
                tok.parse::<f64>()
                    .map_err(|_| (line_no, format!("'{tok}' is not a number")))
            };
            if let Some(comment) = line.strip_prefix('#') {
                let toks: Vec<&str> = comment.split_whitespace().collect();
                match toks.as_slice() {
                    ["sample_rate_hz", v] => fs = Some(num(v)?),
                    ["notch", c, bw] => notches.push(Notch {
                        center_hz: num(c)?,
                        bandwidth_hz: num(bw)?,
                    }),
                    _ => {}
                }
                continue;
            }
            let vals = line
                .split_whitespace()
                .map(num)
                .collect::<std::result::Result<Vec<f64>, _>>()?;
            if vals.len() != 5 {
                return Err((line_no, format!("expected 5 coefficients, found {}", vals.len())));
            }
            sections.push(Biquad {
                b: [vals[0], vals[1], vals[2]],
                a: [vals[3], vals[4]],
            });
        }
        let fs = fs.ok_or((1, "missing '# sample_rate_hz' line".to_string()))?;
        Self::new(sections, fs, notches).map_err(|e| (1, e.to_string()))
    }
}

fn notch_section(center_hz: f64, bandwidth_hz: f64, sample_rate_hz: f64) -> Biquad {
    let w0 = 2.0 * PI * center_hz / sample_rate_hz;
    let beta = (PI * bandwidth_hz / sample_rate_hz).tan();
    let g = 1.0 / (1.0 + beta);
    let c = w0.cos();
    Biquad {
        b: [g, -2.0 * g * c, g],
        a: [-2.0 * g * c, 2.0 * g - 1.0],
    }
}

/// One notch per harmonic `m * fundamental_hz`, `m = 1..=n_harmonics`.
pub fn design_bandstop(
    fundamental_hz: f64,
    n_harmonics: usize,
    bandwidth_hz: f64,
    sample_rate_hz: f64,
) -> Result<FilterSpec> {
    if !(fundamental_hz.is_finite() && fundamental_hz > 0.0) {
        return Err(Error::Design(format!(
            "fundamental must be positive, got {fundamental_hz} Hz"
        )));
    }
    if n_harmonics == 0 {
        return Err(Error::Design("need at least one harmonic".into()));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::Design(format!(
            "sample rate must be positive, got {sample_rate_hz} Hz"
        )));
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0 && bandwidth_hz < nyquist) {
        return Err(Error::Design(format!(
            "bandwidth must lie in (0, {nyquist}) Hz, got {bandwidth_hz}"
        )));
    }
    let top = fundamental_hz * n_harmonics as f64;
    if top >= nyquist {
        return Err(Error::Design(format!(
            "notch at {top} Hz is at or above the {nyquist} Hz Nyquist frequency"
        )));
    }

    let (sections, notches) = (1..=n_harmonics)
        .map(|m| {
            let center_hz = m as f64 * fundamental_hz;
            (
                notch_section(center_hz, bandwidth_hz, sample_rate_hz),
                Notch {
                    center_hz,
                    bandwidth_hz,
                },
            )
        })
        .unzip();
    FilterSpec::new(sections, sample_rate_hz, notches)
}

/// Second-order Butterworth low-pass whose zero-phase response is -3 dB at
/// `cutoff_hz`.
pub fn design_lowpass(cutoff_hz: f64, sample_rate_hz: f64) -> Result<FilterSpec> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::Design(format!(
            "sample rate must be positive, got {sample_rate_hz} Hz"
        )));
    }
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0) {
        return Err(Error::Design(format!(
            "cutoff must lie in (0, {}) Hz, got {cutoff_hz}",
            sample_rate_hz / 2.0
        )));
    }
    let k = (PI * cutoff_hz / sample_rate_hz).tan() * ZERO_PHASE_CUTOFF_SCALE;
    let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
    let b0 = k * k * norm;
    let section = Biquad {
        b: [b0, 2.0 * b0, b0],
        a: [2.0 * (k * k - 1.0) * norm, (1.0 - SQRT_2 * k + k * k) * norm],
    };
    FilterSpec::new(vec![section], sample_rate_hz, Vec::new())
}

/// Forward-backward filtering through every section of `spec`.
pub fn apply_zero_phase(spec: &FilterSpec, samples: &[f64]) -> Result<Vec<f64>> {
    let n_sections = spec.sections.len();
    if samples.is_empty() || samples.len() <= 6 * n_sections {
        return Err(Error::Input(format!(
            "{} samples is too short for {} sections (need more than {})",
            samples.len(),
            n_sections,
            6 * n_sections
        )));
    }
    if n_sections == 0 {
        return Ok(samples.to_vec());
    }

    // Work on deviations from the mean; absolute wavelengths near 1535 nm
    // would otherwise swamp nm-scale detail in the recursions.
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut x: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    let mut dc = 1.0;
    for section in &spec.sections {
        x = filtfilt_section(section, &x);
        dc *= section.dc_gain() * section.dc_gain();
    }
    // Designs here have unit DC gain; what is left is coefficient rounding,
    // amplified by the near-zero denominators of narrow sections.
    if (dc - 1.0).abs() < 1e-6 {
        dc = 1.0;
    }
    Ok(x.into_iter().map(|v| v + dc * mean).collect())
}

fn filtfilt_section(section: &Biquad, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let pad = ((3.0 * section.time_constant_samples()).ceil() as usize).min(n - 1);

    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    let mut y = section.run(&ext);
    y.reverse();
    let mut y = section.run(&y);
    y.reverse();
    y.drain(..pad);
    y.truncate(n);
    y
}

/// Zero-phase low-pass at `cutoff_hz`: the slow shape content of a channel.
pub fn extract_shape_component(samples: &[f64], cutoff_hz: f64, sample_rate_hz: f64) -> Result<Vec<f64>> {
    let spec = design_lowpass(cutoff_hz, sample_rate_hz)?;
    apply_zero_phase(&spec, samples)
}

/// Centered moving average over one period of `period_samples` (fractional
/// lengths allowed, end samples weighted by the fractional part).
///
/// This low-pass has exact nulls at `1 / period` and all its multiples, so it
/// strips a periodic component of that period and keeps slower content.
/// Output index `i` corresponds to input index `i + offset`, where `offset`
/// is the returned half-window; only fully covered positions are produced.
pub fn period_average(samples: &[f64], period_samples: f64) -> Result<(usize, Vec<f64>)> {
    if !(period_samples.is_finite() && period_samples >= 1.0) {
        return Err(Error::Domain(format!(
            "period must be at least one sample, got {period_samples}"
        )));
    }
    // Inner samples weigh 1 and the two boundary samples share the
    // remainder, so the weights sum to the period. This is a blend of the
    // two odd-length boxcars around the period, which cancels the leakage
    // to first order in the fractional part (exact for integer periods).
    let full = ((period_samples - 1.0) / 2.0).floor() as usize;
    let edge_w = (period_samples - 2.0 * full as f64 - 1.0) / 2.0;
    let edge = full + 1;
    if samples.len() < 2 * edge + 1 {
        return Err(Error::Input(format!(
            "{} samples cannot hold a {period_samples}-sample window",
            samples.len()
        )));
    }

    let mut prefix = Vec::with_capacity(samples.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in samples {
        acc += v;
        prefix.push(acc);
    }
    let out = (edge..samples.len() - edge)
        .map(|i| {
            let inner = prefix[i + full + 1] - prefix[i - full];
            let outer = samples[i - edge] + samples[i + edge];
            (inner + edge_w * outer) / period_samples
        })
        .collect();
    Ok((edge, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn three_notches_each_deep_at_center() {
        let spec = design_bandstop(2.0, 3, 0.5, 1000.0).unwrap();
        assert_eq!(spec.sections().len(), 3);
        let centers: Vec<f64> = spec.notches().iter().map(|n| n.center_hz).collect();
        assert_eq!(centers, vec![2.0, 4.0, 6.0]);
        for c in centers {
            assert!(spec.gain_db(c) <= NOTCH_DEPTH_DB);
        }
    }

    #[test]
    fn unit_dc_gain() {
        let spec = design_bandstop(4.0, 1, 0.5, 1000.0).unwrap();
        assert!((spec.response(0.0).norm() - 1.0).abs() < 1e-3);
        assert!((spec.sections()[0].dc_gain() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn notch_above_nyquist_is_rejected() {
        assert!(matches!(
            design_bandstop(300.0, 2, 1.0, 1000.0),
            Err(Error::Design(_))
        ));
    }

    #[test]
    fn minus_three_db_at_band_edges() {
        let spec = design_bandstop(10.0, 1, 2.0, 1000.0).unwrap();
        // edges sit geometrically around the center: f1 f2 = f0^2, f2 - f1 = bw
        let f1 = -1.0 + 101.0f64.sqrt();
        let lo = spec.response(f1).norm_sqr();
        let hi = spec.response(f1 + 2.0).norm_sqr();
        assert!((lo - 0.5).abs() < 0.01, "{lo}");
        assert!((hi - 0.5).abs() < 0.01, "{hi}");
    }

    #[test]
    fn passband_below_quarter_fundamental() {
        let spec = design_bandstop(2.0, 3, 0.5, 1000.0).unwrap();
        for f in [0.0, 0.1, 0.25, 0.5] {
            assert!(spec.gain_db(f).abs() <= 0.1, "{f} Hz: {} dB", spec.gain_db(f));
        }
    }

    #[test]
    fn identity_spec_is_exact() {
        let spec = FilterSpec::identity(1000.0).unwrap();
        let x = sine(3.0, 1.0, 1000.0, 777);
        assert_eq!(apply_zero_phase(&spec, &x).unwrap(), x);
    }

    #[test]
    fn unstable_section_is_rejected() {
        let bad = Biquad {
            b: [1.0, 0.0, 0.0],
            a: [0.0, 1.2],
        };
        assert!(matches!(
            FilterSpec::new(vec![bad], 1000.0, Vec::new()),
            Err(Error::Design(_))
        ));
    }

    #[test]
    fn short_input_is_rejected() {
        let spec = design_bandstop(2.0, 3, 0.5, 1000.0).unwrap();
        assert!(apply_zero_phase(&spec, &[0.0; 18]).is_err());
        assert!(apply_zero_phase(&spec, &[0.0; 19]).is_ok());
    }

    #[test]
    fn notch_removes_its_tone() {
        let fs = 1000.0;
        let spec = design_bandstop(2.0, 1, 0.5, fs).unwrap();
        let x = sine(2.0, 1.0, fs, 20_000);
        let y = apply_zero_phase(&spec, &x).unwrap();
        let settled = &y[5_000..15_000];
        let amp = settled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(amp <= 0.01, "residual {amp}");
    }

    #[test]
    fn lowpass_passes_dc_exactly() {
        let x = vec![1535.3; 5000];
        let y = extract_shape_component(&x, 0.2, 1000.0).unwrap();
        assert!(y.iter().all(|v| (v - 1535.3).abs() < 1e-9));
    }

    #[test]
    fn lowpass_is_minus_three_db_at_cutoff_after_both_passes() {
        let spec = design_lowpass(0.2, 1000.0).unwrap();
        assert!((spec.zero_phase_magnitude(0.2) - 0.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn lowpass_separates_two_tones() {
        let fs = 100.0;
        let n = 40_000;
        let slow = sine(0.01, 1.0, fs, n);
        let x: Vec<f64> = slow
            .iter()
            .zip(sine(2.0, 1.0, fs, n))
            .map(|(a, b)| a + b)
            .collect();
        let y = extract_shape_component(&x, 0.2, fs).unwrap();
        let worst = y[2000..n - 2000]
            .iter()
            .zip(&slow[2000..n - 2000])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(worst <= 0.02, "{worst}");
    }

    #[test]
    fn lowpass_smears_steps() {
        let fs = 100.0;
        let cutoff = 0.5;
        let x: Vec<f64> = (0..4000).map(|i| if i < 2000 { 0.0 } else { 1.0 }).collect();
        let y = extract_shape_component(&x, cutoff, fs).unwrap();
        // span over which the output departs from the input by more than 1% of the step
        let altered: Vec<usize> = (0..x.len()).filter(|&i| (y[i] - x[i]).abs() > 0.01).collect();
        let spread_s = (altered[altered.len() - 1] - altered[0]) as f64 / fs;
        assert!(spread_s >= 1.0 / cutoff, "step smeared over {spread_s} s");
    }

    #[test]
    fn bad_cutoff_is_rejected() {
        assert!(design_lowpass(0.0, 1000.0).is_err());
        assert!(design_lowpass(500.0, 1000.0).is_err());
    }

    #[test]
    fn coefficient_text_round_trips() {
        let spec = design_bandstop(2.0, 3, 0.5, 1000.0).unwrap();
        let text = spec.to_coefficient_text();
        assert!(text.starts_with("# sample_rate_hz 1000\n"));
        let back = FilterSpec::from_coefficient_text(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn coefficient_text_errors_name_the_line() {
        let err = FilterSpec::from_coefficient_text("# sample_rate_hz 1000\n1 2 3\n").unwrap_err();
        assert_eq!(err.0, 2);
    }

    #[test]
    fn period_average_cancels_periodic_content() {
        let fs = 1000.0;
        for period in [25.0, 62.696, 500.0, 1001.3] {
            let f = fs / period;
            let x: Vec<f64> = (0..10_000)
                .map(|i| {
                    let t = i as f64 / fs;
                    0.7 + 0.01 * t + (2.0 * PI * f * t).sin() + 0.3 * (4.0 * PI * f * t).cos()
                })
                .collect();
            let (offset, avg) = period_average(&x, period).unwrap();
            let tol = if period.fract() == 0.0 { 1e-9 } else { 5.0 / period.powi(3) };
            for (j, v) in avg.iter().enumerate().step_by(101) {
                let t = (j + offset) as f64 / fs;
                assert!((v - (0.7 + 0.01 * t)).abs() < tol, "period {period}: {v}");
            }
        }
    }
}
