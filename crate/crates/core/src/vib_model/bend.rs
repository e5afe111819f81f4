use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BendPhase {
    Hold,
    Pull,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendSegment {
    pub phase: BendPhase,
    pub duration_s: f64,
}

impl BendSegment {
    pub fn hold(duration_s: f64) -> Self {
        Self { phase: BendPhase::Hold, duration_s }
    }
    pub fn pull(duration_s: f64) -> Self {
        Self { phase: BendPhase::Pull, duration_s }
    }
    pub fn release(duration_s: f64) -> Self {
        Self { phase: BendPhase::Release, duration_s }
    }
}

/// Cable actuation program: constant-speed pulls and releases with holds.
#[derive(Debug, Clone, PartialEq)]
pub struct BendProfile {
    pub cable_speed_mm_s: f64,
    pub segments: Vec<BendSegment>,
    /// Curvature per mm of cable displacement (1/m per mm).
    pub curvature_gain: f64,
    /// Vibration multiplier when the cable is slack (near zero displacement).
    pub slack_amplitude_scale: f64,
    /// Displacement below which the cable counts as slack (mm).
    pub slack_threshold_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendState {
    pub curvature_per_m: f64,
    pub displacement_mm: f64,
}

pub const DEFAULT_CABLE_SPEED_MM_S: f64 = 0.1;
pub const DEFAULT_PULL_S: f64 = 44.0;
pub const DEFAULT_HOLD_S: f64 = 6.0;
pub const DEFAULT_CYCLES: usize = 2;
/// 0.1 /m of curvature at the default 4.4 mm stroke.
pub const DEFAULT_CURVATURE_GAIN: f64 = 0.1 / 4.4;
pub const DEFAULT_SLACK_SCALE: f64 = 2.0;
pub const DEFAULT_SLACK_THRESHOLD_MM: f64 = 0.5;

impl Default for BendProfile {
    /// Two cycles of hold, pull, hold, release: 200 s, one bend every 100 s.
    fn default() -> Self {
        Self::cycles(
            DEFAULT_CABLE_SPEED_MM_S,
            DEFAULT_PULL_S,
            DEFAULT_HOLD_S,
            DEFAULT_CYCLES,
            DEFAULT_CURVATURE_GAIN,
        )
    }
}

impl BendProfile {
    /// `cycles` repetitions of hold, pull, hold, release.
    pub fn cycles(
        cable_speed_mm_s: f64,
        pull_s: f64,
        hold_s: f64,
        cycles: usize,
        curvature_gain: f64,
    ) -> Self {
        let mut segments = Vec::with_capacity(4 * cycles);
        for _ in 0..cycles {
            if hold_s > 0.0 {
                segments.push(BendSegment::hold(hold_s));
            }
            segments.push(BendSegment::pull(pull_s));
            if hold_s > 0.0 {
                segments.push(BendSegment::hold(hold_s));
            }
            segments.push(BendSegment::release(pull_s));
        }
        Self {
            cable_speed_mm_s,
            segments,
            curvature_gain,
            slack_amplitude_scale: DEFAULT_SLACK_SCALE,
            slack_threshold_mm: DEFAULT_SLACK_THRESHOLD_MM,
        }
    }

    pub fn total_duration_s(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Largest cable displacement reached (mm).
    pub fn max_displacement_mm(&self) -> f64 {
        let mut d: f64 = 0.0;
        let mut best: f64 = 0.0;
        for s in &self.segments {
            d += self.rate(s.phase) * s.duration_s;
            best = best.max(d);
        }
        best
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cable_speed_mm_s.is_finite() && self.cable_speed_mm_s > 0.0) {
            return Err(Error::Config("cable speed must be positive".into()));
        }
        if !self.curvature_gain.is_finite() {
            return Err(Error::Config("curvature gain must be finite".into()));
        }
        if !(self.slack_amplitude_scale.is_finite() && self.slack_amplitude_scale >= 1.0) {
            return Err(Error::Config("slack amplitude scale must be at least 1".into()));
        }
        if !(self.slack_threshold_mm.is_finite() && self.slack_threshold_mm > 0.0) {
            return Err(Error::Config("slack threshold must be positive".into()));
        }
        if self.segments.is_empty() {
            return Err(Error::Config("bend profile has no segments".into()));
        }
        let mut d = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration_s.is_finite() && s.duration_s > 0.0) {
                return Err(Error::Config(format!("segment {i} needs a positive duration")));
            }
            d += self.rate(s.phase) * s.duration_s;
            if d < -1e-9 * self.cable_speed_mm_s * s.duration_s {
                return Err(Error::Config(format!(
                    "segment {i} releases more cable than was pulled"
                )));
            }
        }
        Ok(())
    }

    fn rate(&self, phase: BendPhase) -> f64 {
        match phase {
            BendPhase::Hold => 0.0,
            BendPhase::Pull => self.cable_speed_mm_s,
            BendPhase::Release => -self.cable_speed_mm_s,
        }
    }

    /// Vibration multiplier at a given displacement: `slack_amplitude_scale`
    /// at zero, blending smoothly to 1 at the slack threshold.
    pub fn slack_factor(&self, displacement_mm: f64) -> f64 {
        let u = displacement_mm / self.slack_threshold_mm;
        if u >= 1.0 {
            return 1.0;
        }
        let u = u.max(0.0);
        let smooth = u * u * (3.0 - 2.0 * u);
        1.0 + (self.slack_amplitude_scale - 1.0) * (1.0 - smooth)
    }
}

/// Cable displacement and resulting curvature at time `t` into the profile.
pub fn bend_curvature(profile: &BendProfile, t: f64) -> Result<BendState> {
    let total = profile.total_duration_s();
    if !(t.is_finite() && t >= 0.0 && t <= total) {
        return Err(Error::Domain(format!(
            "t = {t} s lies outside the profile [0, {total}] s"
        )));
    }
    let mut start = 0.0;
    let mut d = 0.0;
    for s in &profile.segments {
        let end = start + s.duration_s;
        let rate = profile.rate(s.phase);
        if t <= end {
            d += rate * (t - start);
            break;
        }
        d += rate * s.duration_s;
        start = end;
    }
    // round-off after release must not push the cable below zero
    let displacement_mm = if d.abs() < 1e-12 { 0.0 } else { d.max(0.0) };
    Ok(BendState {
        curvature_per_m: profile.curvature_gain * displacement_mm,
        displacement_mm,
    })
}
