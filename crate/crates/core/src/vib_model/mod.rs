//! Two-degree-of-freedom rotating-unbalance model of the manipulator and the
//! sensor assembly riding in its channel.
//!
//! Coordinate 1 is the manipulator tip, coordinate 2 the sensor assembly.
//! The tool's unbalance drives coordinate 1 with `me * w^2 * sin(w t)`:
//!
//! ```text
//! M = diag(m1, m2)        K = [[k1 + k2, -k2], [-k2, k2]]        C = diag(c1, c2)
//! (K - w^2 M + i w C) X = [me w^2, 0]
//! ```
//!
//! Both dampers are referenced to the stationary frame. The optical output
//! is the phasor `gain1 * X1 + gain2 * X2` in nm.
//!
//! The default model places the eigenfrequencies at 0.4 Hz and 16 Hz with the
//! low mode dominated by sensor motion and the high mode by the manipulator.

mod bend;
mod simulate;

pub use bend::{bend_curvature, BendPhase, BendProfile, BendSegment, BendState};
pub use simulate::{simulate, Scenario, DEFAULT_NOISE_SIGMA_NM, PRESET_NAMES};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const DEFAULT_F1_HZ: f64 = 0.4;
pub const DEFAULT_F2_HZ: f64 = 16.0;
pub const DEFAULT_MASS_RATIO: f64 = 0.1;
pub const DEFAULT_DAMPING_RATIO: f64 = 0.05;
/// Peak optical vibration amplitude of the default model.
pub const DEFAULT_PEAK_OUTPUT_NM: f64 = 0.3;
/// Sensor displacement to wavelength: 1 nm per micrometre.
pub const DEFAULT_SENSOR_GAIN_NM_PER_M: f64 = 1.0e6;
const NOMINAL_UNBALANCE_KG_M: f64 = 1.0e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDofParams {
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub c1: f64,
    pub c2: f64,
    pub unbalance_me: f64,
    pub gain1: f64,
    pub gain2: f64,
}

/// Steady-state complex displacements (m) of both coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub x1: Complex64,
    pub x2: Complex64,
}

/// Steady-state displacement amplitudes (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub x1: f64,
    pub x2: f64,
}

impl TwoDofParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.m1,
            self.m2,
            self.k1,
            self.k2,
            self.c1,
            self.c2,
            self.unbalance_me,
            self.gain1,
            self.gain2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("all model parameters must be finite".into()));
        }
        if !(self.m1 > 0.0 && self.m2 > 0.0) {
            return Err(Error::Parameter("masses must be positive".into()));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::Parameter("stiffnesses must be positive".into()));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::Parameter("dampers must be non-negative".into()));
        }
        if self.unbalance_me < 0.0 {
            return Err(Error::Parameter("unbalance must be non-negative".into()));
        }
        let [f1, f2] = self.natural_frequencies_hz();
        if !(f1 > 0.0 && f2 > f1) {
            return Err(Error::Parameter("eigenfrequencies must be real and distinct".into()));
        }
        Ok(())
    }

    /// Undamped eigenfrequencies (Hz), ascending.
    pub fn natural_frequencies_hz(&self) -> [f64; 2] {
        // det(K - lambda M) = m1 m2 lambda^2 - (m1 k2 + m2 (k1 + k2)) lambda + k1 k2
        let a = self.m1 * self.m2;
        let b = self.m1 * self.k2 + self.m2 * (self.k1 + self.k2);
        let c = self.k1 * self.k2;
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        // stable pair of roots
        let hi = (b + disc) / (2.0 * a);
        let lo = c / (a * hi);
        [lo.sqrt() / (2.0 * PI), hi.sqrt() / (2.0 * PI)]
    }

    /// Complex steady-state response at `forcing_hz`.
    pub fn response(&self, forcing_hz: f64) -> Result<Response> {
        if !(forcing_hz.is_finite() && forcing_hz >= 0.0) {
            return Err(Error::Domain(format!(
                "forcing frequency must be non-negative, got {forcing_hz}"
            )));
        }
        let w = 2.0 * PI * forcing_hz;
        let w2 = w * w;
        let a11 = Complex64::new(self.k1 + self.k2 - w2 * self.m1, w * self.c1);
        let a22 = Complex64::new(self.k2 - w2 * self.m2, w * self.c2);
        let a12 = -self.k2;
        let det = a11 * a22 - a12 * a12;
        let force = self.unbalance_me * w2;

        let scale = (self.k1 + self.k2) * self.k2;
        if det.norm() <= 1e-14 * scale {
            if force == 0.0 {
                return Ok(Response {
                    x1: Complex64::new(0.0, 0.0),
                    x2: Complex64::new(0.0, 0.0),
                });
            }
            return Err(Error::UndampedResonance { forcing_hz });
        }
        Ok(Response {
            x1: force * a22 / det,
            x2: force * (-a12) / det,
        })
    }

    /// Optical output phasor (nm) at `forcing_hz`.
    pub fn output_phasor(&self, forcing_hz: f64) -> Result<Complex64> {
        let r = self.response(forcing_hz)?;
        Ok(self.gain1 * r.x1 + self.gain2 * r.x2)
    }

    /// Optical vibration amplitude (nm) at `forcing_hz`.
    pub fn output_amplitude_nm(&self, forcing_hz: f64) -> Result<f64> {
        Ok(self.output_phasor(forcing_hz)?.norm())
    }

    /// Largest optical amplitude near either eigenfrequency, with the
    /// frequency where it occurs.
    pub fn peak_output(&self) -> Result<(f64, f64)> {
        let mut best = (0.0, 0.0);
        for fr in self.natural_frequencies_hz() {
            let (lo, hi) = ((0.8 * fr).ln(), (1.2 * fr).ln());
            let steps = 4000;
            for i in 0..=steps {
                let f = (lo + (hi - lo) * i as f64 / steps as f64).exp();
                let a = self.output_amplitude_nm(f)?;
                if a > best.1 {
                    best = (f, a);
                }
            }
        }
        Ok(best)
    }

    /// Rescales the unbalance so the peak optical amplitude equals `peak_nm`.
    pub fn with_peak_output(mut self, peak_nm: f64) -> Result<Self> {
        if !(peak_nm.is_finite() && peak_nm > 0.0) {
            return Err(Error::Parameter(format!("peak output must be positive, got {peak_nm}")));
        }
        let (_, current) = self.peak_output()?;
        if !(current.is_finite() && current > 0.0) {
            return Err(Error::Parameter(
                "model has no finite positive peak response to scale".into(),
            ));
        }
        self.unbalance_me *= peak_nm / current;
        Ok(self)
    }
}

impl Default for TwoDofParams {
    /// The calibrated default model.
    fn default() -> Self {
        calibrate_default_params(
            DEFAULT_F1_HZ,
            DEFAULT_F2_HZ,
            DEFAULT_MASS_RATIO,
            DEFAULT_DAMPING_RATIO,
        )
        .and_then(|p| p.with_peak_output(DEFAULT_PEAK_OUTPUT_NM))
        .expect("default model parameters are valid")
    }
}

/// Steady-state displacement amplitudes `|x1|`, `|x2|` in metres.
pub fn frf_amplitude(params: &TwoDofParams, forcing_hz: f64) -> Result<Amplitudes> {
    params.validate()?;
    let r = params.response(forcing_hz)?;
    Ok(Amplitudes {
        x1: r.x1.norm(),
        x2: r.x2.norm(),
    })
}

/// Builds a model with `m1 = 1`, `m2 = mass_ratio` whose undamped
/// eigenfrequencies are `f1_hz` and `f2_hz`, and whose dampers give each mode
/// the modal damping ratio `damping_ratio`.
///
/// Of the two stiffness pairs that hit the targets, the one with the soft
/// coupling spring is returned, so the low mode is carried by the sensor.
/// The unbalance is nominal and the output reads the sensor coordinate only;
/// use [`TwoDofParams::with_peak_output`] to set the optical scale.
pub fn calibrate_default_params(
    f1_hz: f64,
    f2_hz: f64,
    mass_ratio: f64,
    damping_ratio: f64,
) -> Result<TwoDofParams> {
    if !(f1_hz.is_finite() && f2_hz.is_finite() && f1_hz > 0.0 && f2_hz > f1_hz) {
        return Err(Error::Parameter(format!(
            "need 0 < f1 < f2, got f1 = {f1_hz} Hz, f2 = {f2_hz} Hz"
        )));
    }
    if !(mass_ratio > 0.0 && mass_ratio < 1.0) {
        return Err(Error::Parameter(format!("mass ratio must lie in (0, 1), got {mass_ratio}")));
    }
    if !(0.0..1.0).contains(&damping_ratio) {
        return Err(Error::Parameter(format!(
            "damping ratio must lie in [0, 1), got {damping_ratio}"
        )));
    }

    let (m1, m2) = (1.0, mass_ratio);
    let l1 = (2.0 * PI * f1_hz).powi(2);
    let l2 = (2.0 * PI * f2_hz).powi(2);
    let sum = l1 + l2;
    let prod = l1 * l2;

    // k2^2 (1 + mu) / mu - sum k2 + mu prod = 0, with k1 = mu prod / k2
    let qa = (1.0 + mass_ratio) / mass_ratio;
    let disc = sum * sum - 4.0 * qa * mass_ratio * prod;
    if disc < 0.0 {
        return Err(Error::Parameter(format!(
            "no real stiffness pair places eigenfrequencies at {f1_hz} and {f2_hz} Hz \
             with mass ratio {mass_ratio}"
        )));
    }
    let big = (sum + disc.sqrt()) / (2.0 * qa);
    let k2 = mass_ratio * prod / (qa * big);
    let k1 = mass_ratio * prod / k2;
    if !(k1 > 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
        return Err(Error::Parameter("no positive-stiffness solution".into()));
    }

    // modal damping: c1 phi1^2 + c2 phi2^2 = 2 zeta w (m1 phi1^2 + m2 phi2^2)
    let mode = |lambda: f64| [k2, k1 + k2 - lambda * m1];
    let (p, q) = (mode(l1), mode(l2));
    let rhs = |phi: [f64; 2], lambda: f64| {
        2.0 * damping_ratio * lambda.sqrt() * (m1 * phi[0] * phi[0] + m2 * phi[1] * phi[1])
    };
    let (r1, r2) = (rhs(p, l1), rhs(q, l2));
    let (a, b, c, d) = (p[0] * p[0], p[1] * p[1], q[0] * q[0], q[1] * q[1]);
    let det = a * d - b * c;
    if det.abs() <= 1e-12 * (a * d).abs().max((b * c).abs()) {
        return Err(Error::Parameter("mode shapes do not determine the dampers".into()));
    }
    let c1 = (r1 * d - b * r2) / det;
    let c2 = (a * r2 - c * r1) / det;
    if c1 < -1e-12 * c1.abs().max(c2.abs()) || c2 < -1e-12 * c1.abs().max(c2.abs()) {
        return Err(Error::Parameter(
            "requested modal damping needs a negative damper".into(),
        ));
    }

    let params = TwoDofParams {
        m1,
        m2,
        k1,
        k2,
        c1: c1.max(0.0),
        c2: c2.max(0.0),
        unbalance_me: NOMINAL_UNBALANCE_KG_M,
        gain1: 0.0,
        gain2: DEFAULT_SENSOR_GAIN_NM_PER_M,
    };

    let got = params.natural_frequencies_hz();
    for (g, want) in got.iter().zip([f1_hz, f2_hz]) {
        if ((g - want) / want).abs() > 1e-6 {
            return Err(Error::Parameter(format!(
                "stiffness solve missed {want} Hz (got {g} Hz)"
            )));
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_forcing_gives_zero_response() {
        let a = frf_amplitude(&TwoDofParams::default(), 0.0).unwrap();
        assert_eq!((a.x1, a.x2), (0.0, 0.0));
    }

    #[test]
    fn negative_forcing_is_rejected() {
        assert!(matches!(
            frf_amplitude(&TwoDofParams::default(), -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn default_eigenfrequencies() {
        let p = calibrate_default_params(0.4, 16.0, 0.1, 0.05).unwrap();
        let [f1, f2] = p.natural_frequencies_hz();
        assert!((f1 / 0.4 - 1.0).abs() < 1e-6);
        assert!((f2 / 16.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn characteristic_polynomial_roots_match_targets() {
        let p = calibrate_default_params(1.0, 2.0, 0.5, 0.0).unwrap();
        assert_eq!((p.c1, p.c2), (0.0, 0.0));
        for f in [1.0, 2.0] {
            let l = (2.0 * PI * f).powi(2);
            let det = (p.k1 + p.k2 - l * p.m1) * (p.k2 - l * p.m2) - p.k2 * p.k2;
            let scale = (p.k1 + p.k2) * p.k2;
            assert!(det.abs() < 1e-9 * scale, "f = {f}: det = {det}");
        }
    }

    #[test]
    fn coincident_targets_are_rejected() {
        assert!(matches!(
            calibrate_default_params(2.0, 2.0, 0.1, 0.05),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn wide_mass_ratio_without_solution_is_rejected() {
        // targets too close for a light sensor: discriminant goes negative
        assert!(calibrate_default_params(1.0, 1.01, 0.1, 0.05).is_err());
    }

    #[test]
    fn undamped_system_at_eigenfrequency_is_singular() {
        let p = calibrate_default_params(1.0, 2.0, 0.5, 0.0).unwrap();
        let f = p.natural_frequencies_hz()[0];
        assert!(matches!(
            p.response(f),
            Err(Error::UndampedResonance { .. })
        ));
    }

    #[test]
    fn default_peak_output_is_calibrated() {
        let p = TwoDofParams::default();
        let (_, peak) = p.peak_output().unwrap();
        assert!((peak - DEFAULT_PEAK_OUTPUT_NM).abs() < 1e-12);
    }

    #[test]
    fn modes_split_between_sensor_and_manipulator() {
        let p = TwoDofParams::default();
        let low = frf_amplitude(&p, 0.4).unwrap();
        let high = frf_amplitude(&p, 16.0).unwrap();
        assert!(low.x2 > low.x1);
        assert!(high.x1 > high.x2);
    }

    #[test]
    fn swept_output_has_two_maxima() {
        let p = TwoDofParams::default();
        let n = 20_000;
        let (lo, hi) = (0.05f64.ln(), 40f64.ln());
        let amp: Vec<f64> = (0..n)
            .map(|i| {
                let f = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
                p.output_amplitude_nm(f).unwrap()
            })
            .collect();
        let maxima: Vec<usize> = (1..n - 1)
            .filter(|&i| amp[i] > amp[i - 1] && amp[i] >= amp[i + 1])
            .collect();
        assert_eq!(maxima.len(), 2);
        let freq = |i: usize| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        assert!((freq(maxima[0]) - 0.4).abs() < 0.02);
        assert!((freq(maxima[1]) - 16.0).abs() < 0.5);
    }
}
