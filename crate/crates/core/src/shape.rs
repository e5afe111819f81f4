//! Wavelength to curvature conversion and planar shape reconstruction.
//!
//! Each active area senses the curvature of the segment around it. Segment
//! boundaries sit halfway between neighbouring areas, and each segment is a
//! circular arc. The centerline starts at the base pointing along +z and
//! positive curvature bends it toward +x, so a straight manipulator ends at
//! `(0, length_mm)`.
//!
//! Curvatures are in 1/m, lengths in mm.

use crate::error::{Error, Result};

/// Interrogator wavelength band (nm).
pub const BAND_MIN_NM: f64 = 1510.0;
pub const BAND_MAX_NM: f64 = 1590.0;

pub const DEFAULT_BASE_WAVELENGTH_NM: f64 = 1535.3;
pub const DEFAULT_SENSITIVITY_NM_PER_INVM: f64 = 13.0;
pub const DEFAULT_LENGTH_MM: f64 = 35.0;

/// Below this bend angle (rad) arc offsets use their Taylor series.
const SERIES_ANGLE: f64 = 1e-4;
/// Largest bend angle between polyline vertices.
const MAX_VERTEX_ANGLE: f64 = 0.05;
const MIN_VERTICES_PER_SEGMENT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaCalibration {
    pub base_wavelength_nm: f64,
    pub sensitivity_nm_per_invm: f64,
}

/// Linear wavelength model per active area: `lambda = base + sensitivity * kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    pub areas: Vec<AreaCalibration>,
}

impl Default for CalibrationModel {
    fn default() -> Self {
        Self {
            areas: vec![
                AreaCalibration {
                    base_wavelength_nm: DEFAULT_BASE_WAVELENGTH_NM,
                    sensitivity_nm_per_invm: DEFAULT_SENSITIVITY_NM_PER_INVM,
                };
                3
            ],
        }
    }
}

impl CalibrationModel {
    pub fn validate(&self) -> Result<()> {
        if self.areas.is_empty() {
            return Err(Error::Config("calibration has no active areas".into()));
        }
        for (i, a) in self.areas.iter().enumerate() {
            if !(a.sensitivity_nm_per_invm.is_finite() && a.sensitivity_nm_per_invm != 0.0) {
                return Err(Error::Config(format!(
                    "active area {i}: sensitivity must be finite and nonzero"
                )));
            }
            if !(BAND_MIN_NM..=BAND_MAX_NM).contains(&a.base_wavelength_nm) {
                return Err(Error::Config(format!(
                    "active area {i}: base wavelength {} nm outside {BAND_MIN_NM}-{BAND_MAX_NM} nm",
                    a.base_wavelength_nm
                )));
            }
        }
        Ok(())
    }

    /// Wavelengths produced by the given curvatures.
    pub fn wavelengths(&self, curvatures: &[f64]) -> Result<Vec<f64>> {
        if curvatures.len() != self.areas.len() {
            return Err(Error::Input(format!(
                "{} curvatures for {} active areas",
                curvatures.len(),
                self.areas.len()
            )));
        }
        Ok(self
            .areas
            .iter()
            .zip(curvatures)
            .map(|(a, k)| a.base_wavelength_nm + a.sensitivity_nm_per_invm * k)
            .collect())
    }
}

/// `kappa_i = (lambda_i - base_i) / sensitivity_i`.
pub fn wavelength_to_curvature(wavelengths_nm: &[f64], calib: &CalibrationModel) -> Result<Vec<f64>> {
    if wavelengths_nm.len() != calib.areas.len() {
        return Err(Error::Input(format!(
            "{} wavelengths for {} calibrated active areas",
            wavelengths_nm.len(),
            calib.areas.len()
        )));
    }
    wavelengths_nm
        .iter()
        .zip(&calib.areas)
        .enumerate()
        .map(|(i, (&w, a))| {
            if !(BAND_MIN_NM..=BAND_MAX_NM).contains(&w) {
                return Err(Error::Measurement(format!(
                    "active area {i}: {w} nm outside the {BAND_MIN_NM}-{BAND_MAX_NM} nm band"
                )));
            }
            Ok((w - a.base_wavelength_nm) / a.sensitivity_nm_per_invm)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmGeometry {
    pub length_mm: f64,
    pub aa_positions_mm: Vec<f64>,
    pub od_mm: f64,
    pub id_mm: f64,
    pub channel_d_mm: f64,
}

impl Default for CmGeometry {
    /// Active areas at a quarter, half and three quarters of the length.
    fn default() -> Self {
        let l = DEFAULT_LENGTH_MM;
        Self {
            length_mm: l,
            aa_positions_mm: vec![0.25 * l, 0.5 * l, 0.75 * l],
            od_mm: 6.0,
            id_mm: 4.0,
            channel_d_mm: 0.5,
        }
    }
}

impl CmGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm.is_finite() && self.length_mm > 0.0) {
            return Err(Error::Config("length must be positive".into()));
        }
        if self.aa_positions_mm.is_empty() {
            return Err(Error::Config("geometry needs at least one active area".into()));
        }
        let mut prev = 0.0;
        for &p in &self.aa_positions_mm {
            if !(p > prev && p <= self.length_mm) {
                return Err(Error::Config(
                    "active-area positions must increase strictly within (0, length]".into(),
                ));
            }
            prev = p;
        }
        if !(self.od_mm > self.id_mm && self.id_mm > 0.0) {
            return Err(Error::Config("need od > id > 0".into()));
        }
        if !(self.channel_d_mm > 0.0) {
            return Err(Error::Config("channel diameter must be positive".into()));
        }
        Ok(())
    }

    /// Arc-length boundaries of the constant-curvature segments, from 0 to
    /// `length_mm`.
    pub fn segment_bounds_mm(&self) -> Vec<f64> {
        let p = &self.aa_positions_mm;
        let mut b = Vec::with_capacity(p.len() + 1);
        b.push(0.0);
        b.extend(p.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        b.push(self.length_mm);
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterlinePoint {
    pub s_mm: f64,
    pub x_mm: f64,
    pub z_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEstimate {
    pub segment_curvatures: Vec<f64>,
    pub segment_bounds_mm: Vec<f64>,
    pub centerline: Vec<CenterlinePoint>,
    /// Tip position `(x_mm, z_mm)`.
    pub tip: (f64, f64),
}

impl ShapeEstimate {
    /// Sum of polyline chord lengths (mm).
    pub fn polyline_length_mm(&self) -> f64 {
        self.centerline
            .windows(2)
            .map(|w| (w[1].x_mm - w[0].x_mm).hypot(w[1].z_mm - w[0].z_mm))
            .sum()
    }
}

/// Planar pose: position and heading angle measured from +z toward +x.
#[derive(Debug, Clone, Copy)]
struct Pose {
    x: f64,
    z: f64,
    theta: f64,
}

impl Pose {
    /// Pose after an arc of curvature `kappa` (1/mm) and length `s` (mm).
    fn advance(self, kappa: f64, s: f64) -> Pose {
        let (lateral, axial) = arc_offsets(kappa, s);
        let (sin_t, cos_t) = self.theta.sin_cos();
        Pose {
            x: self.x + axial * sin_t + lateral * cos_t,
            z: self.z + axial * cos_t - lateral * sin_t,
            theta: self.theta + kappa * s,
        }
    }
}

/// Local `((1 - cos a) / kappa, sin a / kappa)` with `a = kappa s`.
fn arc_offsets(kappa: f64, s: f64) -> (f64, f64) {
    let a = kappa * s;
    if a.abs() < SERIES_ANGLE {
        let a2 = a * a;
        let lateral = s * a * (0.5 - a2 / 24.0 * (1.0 - a2 / 30.0));
        let axial = s * (1.0 - a2 / 6.0 * (1.0 - a2 / 20.0));
        (lateral, axial)
    } else {
        ((1.0 - a.cos()) / kappa, a.sin() / kappa)
    }
}

/// Piecewise-constant-curvature centerline from one curvature per active area.
pub fn reconstruct(curvatures: &[f64], geometry: &CmGeometry) -> Result<ShapeEstimate> {
    geometry.validate()?;
    if curvatures.len() != geometry.aa_positions_mm.len() {
        return Err(Error::Input(format!(
            "{} curvatures for {} active areas",
            curvatures.len(),
            geometry.aa_positions_mm.len()
        )));
    }
    if curvatures.iter().any(|k| !k.is_finite()) {
        return Err(Error::Domain("curvatures must be finite".into()));
    }

    let bounds = geometry.segment_bounds_mm();
    let mut pose = Pose {
        x: 0.0,
        z: 0.0,
        theta: 0.0,
    };
    let mut centerline = vec![CenterlinePoint {
        s_mm: 0.0,
        x_mm: 0.0,
        z_mm: 0.0,
    }];

    for (seg, &k) in curvatures.iter().enumerate() {
        let (s0, s1) = (bounds[seg], bounds[seg + 1]);
        let len = s1 - s0;
        let kappa = k * 1e-3;
        let steps = ((kappa * len).abs() / MAX_VERTEX_ANGLE)
            .ceil()
            .max(MIN_VERTICES_PER_SEGMENT as f64) as usize;
        for j in 1..=steps {
            let ds = if j == steps { len } else { len * j as f64 / steps as f64 };
            let p = pose.advance(kappa, ds);
            centerline.push(CenterlinePoint {
                s_mm: s0 + ds,
                x_mm: p.x,
                z_mm: p.z,
            });
        }
        pose = pose.advance(kappa, len);
    }

    Ok(ShapeEstimate {
        segment_curvatures: curvatures.to_vec(),
        segment_bounds_mm: bounds,
        centerline,
        tip: (pose.x, pose.z),
    })
}

/// One calibration observation: wavelengths of all areas at a known curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    pub wavelengths_nm: Vec<f64>,
    pub curvature_per_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFit {
    pub model: CalibrationModel,
    /// RMS of the fit residuals per area (nm).
    pub residual_rms_nm: Vec<f64>,
}

/// Least-squares line per active area through (curvature, wavelength).
pub fn fit_calibration(samples: &[CalibrationSample]) -> Result<CalibrationFit> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Fit("no calibration samples".into()))?;
    let n_aa = first.wavelengths_nm.len();
    if n_aa == 0 {
        return Err(Error::Fit("samples carry no wavelengths".into()));
    }
    if samples.iter().any(|s| s.wavelengths_nm.len() != n_aa) {
        return Err(Error::Fit("samples disagree on the number of active areas".into()));
    }
    if samples
        .iter()
        .any(|s| !s.curvature_per_m.is_finite() || s.wavelengths_nm.iter().any(|w| !w.is_finite()))
    {
        return Err(Error::Fit("samples must be finite".into()));
    }

    let n = samples.len() as f64;
    let k_mean = samples.iter().map(|s| s.curvature_per_m).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.curvature_per_m - k_mean).powi(2)).sum();
    let k_scale = samples
        .iter()
        .map(|s| s.curvature_per_m.abs())
        .fold(0.0, f64::max);
    if !(sxx > 1e-24 * n * k_scale.max(1.0).powi(2)) {
        return Err(Error::Fit(
            "need at least two distinct curvature levels".into(),
        ));
    }

    let mut areas = Vec::with_capacity(n_aa);
    let mut residual_rms_nm = Vec::with_capacity(n_aa);
    for i in 0..n_aa {
        let w_mean = samples.iter().map(|s| s.wavelengths_nm[i]).sum::<f64>() / n;
        let sxy: f64 = samples
            .iter()
            .map(|s| (s.curvature_per_m - k_mean) * (s.wavelengths_nm[i] - w_mean))
            .sum();
        let slope = sxy / sxx;
        let intercept = w_mean - slope * k_mean;
        let sse: f64 = samples
            .iter()
            .map(|s| (s.wavelengths_nm[i] - intercept - slope * s.curvature_per_m).powi(2))
            .sum();
        areas.push(AreaCalibration {
            base_wavelength_nm: intercept,
            sensitivity_nm_per_invm: slope,
        });
        residual_rms_nm.push((sse / n).sqrt());
    }

    let model = CalibrationModel { areas };
    model
        .validate()
        .map_err(|e| Error::Fit(format!("fitted model is unusable: {e}")))?;
    Ok(CalibrationFit {
        model,
        residual_rms_nm,
    })
}
