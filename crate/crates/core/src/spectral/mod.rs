//! Frequency-domain analysis of wavelength traces.
//!
//! The transform follows the usual N-point DFT convention,
//! `X[k] = sum_n x[n] exp(-2 pi i k n / N)`, with bin `k` sitting at
//! `k * sample_rate_hz / N` Hz. Magnitude views are one-sided and amplitude
//! normalized: an on-bin sinusoid of amplitude `A` reports `A` at its bin,
//! for both the rectangular and the Hann window.
//!
//! Feature identification separates the slow shape content (the base
//! frequency, well below [`DEFAULT_SHAPE_BAND_CUTOFF_HZ`]) from the
//! tool-locked fundamental and its integer harmonics.

pub mod fft;

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Separates shape content from tool vibration. The base frequency sits near
/// 0.01 Hz and the slowest tool fundamental of interest (24 rpm) at 0.4 Hz.
pub const DEFAULT_SHAPE_BAND_CUTOFF_HZ: f64 = 0.05;
/// Five times the default simulator noise floor.
pub const DEFAULT_MIN_PROMINENCE_NM: f64 = 0.01;
/// Tool-induced content stays below this for the velocities of interest.
pub const DEFAULT_MAX_FEATURE_HZ: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" | "boxcar" => Ok(Window::Rectangular),
            "hann" | "hanning" => Ok(Window::Hann),
            other => Err(Error::Config(format!("unknown window '{other}'"))),
        }
    }
}

/// Complex DFT bins of a (possibly windowed, possibly zero-padded) record.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Transform length, including zero padding.
    pub n: usize,
    pub sample_rate_hz: f64,
    pub bins: Vec<Complex64>,
    pub window: Window,
    /// Sum of the window over the original samples; divides magnitudes so
    /// that on-bin sinusoids report their amplitude.
    pub coherent_gain: f64,
}

impl Spectrum {
    /// Frequency of bin `k` in Hz.
    pub fn frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz / self.n as f64
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz / self.n as f64
    }

    /// One-sided amplitude spectrum over `[0, sample_rate_hz / 2]`.
    pub fn magnitude(&self) -> MagnitudeSpectrum {
        let half = self.n / 2;
        let mut frequency_hz = Vec::with_capacity(half + 1);
        let mut magnitude_nm = Vec::with_capacity(half + 1);
        for k in 0..=half {
            let edge = k == 0 || (self.n.is_multiple_of(2) && k == half);
            let factor = if edge { 1.0 } else { 2.0 };
            frequency_hz.push(self.frequency_hz(k));
            magnitude_nm.push(factor * self.bins[k].norm() / self.coherent_gain);
        }
        MagnitudeSpectrum {
            frequency_hz,
            magnitude_nm,
            bin_width_hz: self.bin_width_hz(),
        }
    }
}

/// One-sided, amplitude-normalized magnitude view of a [`Spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrum {
    pub frequency_hz: Vec<f64>,
    pub magnitude_nm: Vec<f64>,
    pub bin_width_hz: f64,
}

impl MagnitudeSpectrum {
    pub fn len(&self) -> usize {
        self.frequency_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency_hz.is_empty()
    }

    /// Index of the largest bin excluding DC, if any.
    pub fn argmax_non_dc(&self) -> Option<usize> {
        (1..self.len()).max_by(|&a, &b| self.magnitude_nm[a].total_cmp(&self.magnitude_nm[b]))
    }
}

/// Plain N-point DFT of real samples (rectangular window, no padding).
pub fn dft(x: &[f64], sample_rate_hz: f64) -> Result<Spectrum> {
    transform(x, sample_rate_hz, Window::Rectangular, None)
}

/// Windowed, optionally zero-padded transform.
pub fn transform(
    x: &[f64],
    sample_rate_hz: f64,
    window: Window,
    zero_pad_to: Option<usize>,
) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::Domain("cannot transform an empty sequence".into()));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::Domain(format!("sample rate must be positive, got {sample_rate_hz}")));
    }
    let n = match zero_pad_to {
        Some(len) if len < x.len() => {
            return Err(Error::Domain(format!(
                "zero_pad_to = {len} is shorter than the {} input samples",
                x.len()
            )))
        }
        Some(len) => len,
        None => x.len(),
    };

    let w = window.coefficients(x.len());
    let coherent_gain: f64 = w.iter().sum();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (slot, (v, wi)) in buf.iter_mut().zip(x.iter().zip(&w)) {
        *slot = Complex64::new(v * wi, 0.0);
    }
    Ok(Spectrum {
        n,
        sample_rate_hz,
        bins: fft::fft(&buf),
        window,
        coherent_gain,
    })
}

/// One-sided amplitude spectrum of a channel.
pub fn magnitude_spectrum(
    channel: &[f64],
    sample_rate_hz: f64,
    window: Window,
    zero_pad_to: Option<usize>,
) -> Result<MagnitudeSpectrum> {
    Ok(transform(channel, sample_rate_hz, window, zero_pad_to)?.magnitude())
}

/// Hann-windowed spectrum of the mean-removed channel, the view used for
/// feature identification. Removing the mean keeps the large absolute
/// wavelength out of the lowest bins.
pub fn feature_spectrum(channel: &[f64], sample_rate_hz: f64) -> Result<MagnitudeSpectrum> {
    if channel.is_empty() {
        return Err(Error::Domain("cannot analyze an empty channel".into()));
    }
    let mean = channel.iter().sum::<f64>() / channel.len() as f64;
    let centered: Vec<f64> = channel.iter().map(|v| v - mean).collect();
    magnitude_spectrum(&centered, sample_rate_hz, Window::Hann, None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub frequency_hz: f64,
    pub magnitude_nm: f64,
    pub prominence_nm: f64,
}

/// Local maxima with at least `min_prominence` nm of prominence, at or below
/// `max_freq_hz`, sorted by descending magnitude.
///
/// Prominence is the drop from the peak to the higher of its two bases, each
/// base being the lowest point between the peak and the next higher bin (or
/// the spectrum edge) on that side. End bins are never peaks.
pub fn find_peaks(
    spectrum: &MagnitudeSpectrum,
    min_prominence: f64,
    max_freq_hz: f64,
) -> Result<Vec<Peak>> {
    if !(min_prominence > 0.0) {
        return Err(Error::Domain(format!(
            "min_prominence must be positive, got {min_prominence}"
        )));
    }
    let mag = &spectrum.magnitude_nm;
    let len = mag.len();
    let mut peaks = Vec::new();

    let mut i = 1;
    while i + 1 < len {
        if mag[i - 1] < mag[i] {
            let mut j = i;
            while j + 1 < len && mag[j + 1] == mag[i] {
                j += 1;
            }
            if j + 1 < len && mag[j + 1] < mag[i] {
                let k = (i + j) / 2;
                if spectrum.frequency_hz[k] <= max_freq_hz {
                    let prominence = prominence(mag, k);
                    if prominence >= min_prominence {
                        peaks.push(Peak {
                            index: k,
                            frequency_hz: spectrum.frequency_hz[k],
                            magnitude_nm: mag[k],
                            prominence_nm: prominence,
                        });
                    }
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    peaks.sort_by(|a, b| b.magnitude_nm.total_cmp(&a.magnitude_nm).then(a.index.cmp(&b.index)));
    Ok(peaks)
}

fn prominence(mag: &[f64], k: usize) -> f64 {
    let height = mag[k];
    let mut left_min = height;
    for &v in mag[..k].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &mag[k + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

/// Tunables for [`identify_features`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub shape_band_cutoff_hz: f64,
    pub min_prominence_nm: f64,
    pub max_freq_hz: f64,
    /// Snap the fundamental to the RPM hint when within this many bins.
    pub snap_bins: f64,
    /// Highest harmonic multiple searched.
    pub max_harmonic: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            shape_band_cutoff_hz: DEFAULT_SHAPE_BAND_CUTOFF_HZ,
            min_prominence_nm: DEFAULT_MIN_PROMINENCE_NM,
            max_freq_hz: DEFAULT_MAX_FEATURE_HZ,
            snap_bins: 2.0,
            max_harmonic: 5,
        }
    }
}

/// Base frequency, tool fundamental and harmonics read off a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFeatures {
    /// Strongest peak inside the shape band.
    pub base_frequency_hz: Option<f64>,
    /// Strongest peak above the shape band; `None` for vibration-free data.
    pub fundamental_hz: Option<f64>,
    pub harmonics_hz: Vec<f64>,
    /// Every detected peak, strongest first.
    pub peaks: Vec<Peak>,
    pub bin_width_hz: f64,
}

impl SpectralFeatures {
    /// Magnitude of the detected peak nearest to `frequency_hz`.
    pub fn amplitude_near(&self, frequency_hz: f64) -> Option<f64> {
        self.peaks
            .iter()
            .min_by(|a, b| {
                (a.frequency_hz - frequency_hz)
                    .abs()
                    .total_cmp(&(b.frequency_hz - frequency_hz).abs())
            })
            .map(|p| p.magnitude_nm)
    }
}

pub fn identify_features(
    spectrum: &MagnitudeSpectrum,
    rpm_hint: Option<f64>,
    config: &FeatureConfig,
) -> Result<SpectralFeatures> {
    let bin = spectrum.bin_width_hz;
    if !(bin <= 0.5) {
        return Err(Error::Domain(format!(
            "frequency resolution {bin} Hz is coarser than 0.5 Hz; need at least 2 s of data"
        )));
    }
    let peaks = find_peaks(spectrum, config.min_prominence_nm, config.max_freq_hz)?;
    let cutoff = config.shape_band_cutoff_hz;

    // `peaks` is sorted strongest first.
    let base_frequency_hz = peaks
        .iter()
        .find(|p| p.frequency_hz <= cutoff)
        .map(|p| p.frequency_hz);
    let fundamental = peaks.iter().find(|p| p.frequency_hz > cutoff).copied();

    let fundamental_hz = fundamental.map(|p| match rpm_hint {
        Some(rpm) if rpm > 0.0 && (p.frequency_hz - rpm / 60.0).abs() <= config.snap_bins * bin => {
            rpm / 60.0
        }
        _ => p.frequency_hz,
    });

    let mut harmonics_hz = Vec::new();
    if let (Some(f0), Some(fund)) = (fundamental_hz, fundamental) {
        for m in 2..=config.max_harmonic {
            let target = m as f64 * f0;
            if let Some(h) = peaks
                .iter()
                .filter(|p| p.index != fund.index && (p.frequency_hz - target).abs() <= bin)
                .max_by(|a, b| a.magnitude_nm.total_cmp(&b.magnitude_nm))
            {
                harmonics_hz.push(h.frequency_hz);
            }
        }
    }

    Ok(SpectralFeatures {
        base_frequency_hz,
        fundamental_hz,
        harmonics_hz,
        peaks,
        bin_width_hz: bin,
    })
}

/// Mean removal, Hann window, then feature identification.
pub fn analyze_channel(
    channel: &[f64],
    sample_rate_hz: f64,
    rpm_hint: Option<f64>,
    config: &FeatureConfig,
) -> Result<(MagnitudeSpectrum, SpectralFeatures)> {
    let spectrum = feature_spectrum(channel, sample_rate_hz)?;
    let features = identify_features(&spectrum, rpm_hint, config)?;
    Ok((spectrum, features))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, amp: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn unit_impulse_is_flat() {
        let s = dft(&[1.0, 0.0, 0.0, 0.0], 4.0).unwrap();
        for b in &s.bins {
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_is_dc_only() {
        let c = 2.5;
        let n = 37;
        let s = dft(&vec![c; n], 1.0).unwrap();
        assert!((s.bins[0].re - c * n as f64).abs() < 1e-12 * c * n as f64);
        for b in &s.bins[1..] {
            assert!(b.norm() < 1e-12 * c * n as f64);
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(dft(&[], 1000.0), Err(Error::Domain(_))));
    }

    #[test]
    fn one_second_axis_reaches_nyquist() {
        let m = magnitude_spectrum(&vec![0.0; 1000], 1000.0, Window::Rectangular, None).unwrap();
        assert_eq!(m.len(), 501);
        assert_eq!(m.frequency_hz[0], 0.0);
        assert_eq!(*m.frequency_hz.last().unwrap(), 500.0);
    }

    #[test]
    fn on_bin_unit_sine_reports_unit_amplitude() {
        let x = tone(2.0, 1.0, 1000.0, 10_000);
        for window in [Window::Rectangular, Window::Hann] {
            let m = magnitude_spectrum(&x, 1000.0, window, None).unwrap();
            let k = m.argmax_non_dc().unwrap();
            assert!((m.frequency_hz[k] - 2.0).abs() < 1e-12);
            assert!((m.magnitude_nm[k] - 1.0).abs() < 1e-6, "{window:?}");
        }
    }

    #[test]
    fn zero_padding_shorter_than_input_is_rejected() {
        assert!(matches!(
            magnitude_spectrum(&[1.0; 8], 8.0, Window::Hann, Some(4)),
            Err(Error::Domain(_))
        ));
        let padded = magnitude_spectrum(&[1.0; 8], 8.0, Window::Rectangular, Some(16)).unwrap();
        assert_eq!(padded.len(), 9);
        assert!((padded.magnitude_nm[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let m = MagnitudeSpectrum {
            frequency_hz: (0..100).map(|k| k as f64 * 0.1).collect(),
            magnitude_nm: vec![0.5; 100],
            bin_width_hz: 0.1,
        };
        assert!(find_peaks(&m, 0.01, 40.0).unwrap().is_empty());
    }

    #[test]
    fn two_tones_are_ordered_by_magnitude() {
        let fs = 1000.0;
        let n = 10_000;
        let x: Vec<f64> = tone(4.0, 0.3, fs, n)
            .iter()
            .zip(tone(2.0, 1.0, fs, n))
            .map(|(a, b)| a + b)
            .collect();
        let m = magnitude_spectrum(&x, fs, Window::Rectangular, None).unwrap();
        let peaks = find_peaks(&m, 0.01, 40.0).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].frequency_hz - 2.0).abs() < 1e-9);
        assert!((peaks[1].frequency_hz - 4.0).abs() < 1e-9);
        assert!((peaks[1].magnitude_nm - 0.3).abs() < 1e-9);
    }

    #[test]
    fn peaks_beyond_max_frequency_are_ignored() {
        let x = tone(60.0, 1.0, 1000.0, 10_000);
        let m = magnitude_spectrum(&x, 1000.0, Window::Rectangular, None).unwrap();
        assert!(find_peaks(&m, 0.01, 40.0).unwrap().is_empty());
        assert_eq!(find_peaks(&m, 0.01, 100.0).unwrap().len(), 1);
    }

    #[test]
    fn non_positive_prominence_is_rejected() {
        let m = magnitude_spectrum(&[0.0; 16], 16.0, Window::Rectangular, None).unwrap();
        assert!(find_peaks(&m, 0.0, 8.0).is_err());
    }

    #[test]
    fn prominence_uses_the_higher_base() {
        // small shoulder on the flank of a large peak
        let mag = vec![0.0, 1.0, 5.0, 3.0, 3.2, 0.0, 0.0];
        let m = MagnitudeSpectrum {
            frequency_hz: (0..mag.len()).map(|k| k as f64).collect(),
            magnitude_nm: mag,
            bin_width_hz: 1.0,
        };
        let peaks = find_peaks(&m, 0.1, 100.0).unwrap();
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks[1].index, 4);
        assert!((peaks[1].prominence_nm - 0.2).abs() < 1e-12);
    }

    #[test]
    fn harmonic_partials_are_listed() {
        let fs = 1000.0;
        let n = 20_000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 3.0 * t).sin()
                    + 0.4 * (2.0 * PI * 6.0 * t).sin()
                    + 0.2 * (2.0 * PI * 9.0 * t).sin()
            })
            .collect();
        let (_, f) = analyze_channel(&x, fs, None, &FeatureConfig::default()).unwrap();
        assert_eq!(f.fundamental_hz, Some(3.0));
        assert_eq!(f.harmonics_hz, vec![6.0, 9.0]);
        assert!(f.base_frequency_hz.is_none());
    }

    #[test]
    fn fundamental_snaps_to_rpm_hint() {
        let fs = 1000.0;
        // 2.05 Hz tone, 10 s record: nearest bin is 2.0 or 2.1
        let x = tone(2.05, 1.0, fs, 10_000);
        let (_, f) = analyze_channel(&x, fs, Some(123.0), &FeatureConfig::default()).unwrap();
        assert_eq!(f.fundamental_hz, Some(123.0 / 60.0));
        let (_, f) = analyze_channel(&x, fs, Some(300.0), &FeatureConfig::default()).unwrap();
        assert_ne!(f.fundamental_hz, Some(5.0));
    }

    #[test]
    fn short_records_are_rejected_for_features() {
        let x = tone(2.0, 1.0, 1000.0, 1000);
        assert!(matches!(
            analyze_channel(&x, 1000.0, None, &FeatureConfig::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn vibration_free_data_has_no_fundamental() {
        let fs = 100.0;
        let x: Vec<f64> = (0..20_000)
            .map(|i| 0.6 * (2.0 * PI * 0.01 * i as f64 / fs).sin())
            .collect();
        let (_, f) = analyze_channel(&x, fs, None, &FeatureConfig::default()).unwrap();
        assert_eq!(f.fundamental_hz, None);
        assert!((f.base_frequency_hz.unwrap() - 0.01).abs() < 1e-12);
    }
}
