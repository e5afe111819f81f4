use crate::error::{Error, Result};

/// Identifies one grating: which fiber and which active area along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelLabel {
    pub fiber: u8,
    pub aa: u8,
}

/// Uniformly sampled Bragg wavelengths, one channel per active area.
///
/// Sample `n` of every channel was taken at `t0 + n / sample_rate_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthTrace {
    pub sample_rate_hz: f64,
    pub t0: f64,
    pub labels: Vec<ChannelLabel>,
    pub channels: Vec<Vec<f64>>,
}

impl WavelengthTrace {
    pub fn new(
        sample_rate_hz: f64,
        t0: f64,
        labels: Vec<ChannelLabel>,
        channels: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Input(format!("sample rate must be positive, got {sample_rate_hz}")));
        }
        if !t0.is_finite() {
            return Err(Error::Input("start time must be finite".into()));
        }
        if labels.len() != channels.len() || channels.is_empty() {
            return Err(Error::Input(format!(
                "{} labels for {} channels",
                labels.len(),
                channels.len()
            )));
        }
        let len = channels[0].len();
        if len == 0 {
            return Err(Error::Input("trace must hold at least one sample".into()));
        }
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Input("all channels must have the same length".into()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::Input("duplicate channel label".into()));
        }
        Ok(Self {
            sample_rate_hz,
            t0,
            labels,
            channels,
        })
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_s(&self, n: usize) -> f64 {
        self.t0 + n as f64 / self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    pub fn channel(&self, fiber: u8, aa: u8) -> Option<&[f64]> {
        self.labels
            .iter()
            .position(|l| l.fiber == fiber && l.aa == aa)
            .map(|i| self.channels[i].as_slice())
    }

    /// Wavelengths of all channels of one fiber at sample `n`, ordered by aa.
    pub fn fiber_sample(&self, fiber: u8, n: usize) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..self.labels.len())
            .filter(|&i| self.labels[i].fiber == fiber)
            .collect();
        idx.sort_by_key(|&i| self.labels[i].aa);
        idx.into_iter().map(|i| self.channels[i][n]).collect()
    }

    pub fn fibers(&self) -> Vec<u8> {
        let mut f: Vec<u8> = self.labels.iter().map(|l| l.fiber).collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// Same timing, channels transformed one by one.
    pub fn map_channels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let channels = self
            .channels
            .iter()
            .map(|c| f(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.sample_rate_hz, self.t0, self.labels.clone(), channels)
    }

    /// Splits into one trace per fiber.
    pub fn split_fibers(&self) -> Vec<Self> {
        self.fibers()
            .into_iter()
            .map(|fiber| {
                let (labels, channels) = self
                    .labels
                    .iter()
                    .zip(&self.channels)
                    .filter(|(l, _)| l.fiber == fiber)
                    .map(|(l, c)| (*l, c.clone()))
                    .unzip();
                Self {
                    sample_rate_hz: self.sample_rate_hz,
                    t0: self.t0,
                    labels,
                    channels,
                }
            })
            .collect()
    }
}
