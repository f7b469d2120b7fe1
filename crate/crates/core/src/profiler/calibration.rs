use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::round;

/// Average per-token decoding latency `l(b)` in milliseconds for every
/// batch size `b` in `1..=max_batch`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationProfile {
    latency_ms: Vec<f64>,
}

impl CalibrationProfile {
    pub fn new(latency_ms: Vec<f64>) -> Result<Self> {
        if latency_ms.is_empty() {
            return Err(Error::Config("calibration table is empty".into()));
        }
        if latency_ms.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("decoding latencies must be positive".into()));
        }
        if latency_ms.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("decoding latency must not decrease with batch size".into()));
        }
        Ok(CalibrationProfile { latency_ms })
    }

    /// `l(b) = base + slope * (b - 1)`.
    pub fn linear(base_ms: f64, slope_ms: f64, max_batch: usize) -> Result<Self> {
        Self::new((0..max_batch).map(|i| base_ms + slope_ms * i as f64).collect())
    }

    pub fn constant(ms: f64, max_batch: usize) -> Result<Self> {
        Self::linear(ms, 0.0, max_batch)
    }

    pub fn max_batch(&self) -> usize {
        self.latency_ms.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.latency_ms
    }

    pub fn latency(&self, batch: usize) -> Result<f64> {
        if batch == 0 || batch > self.latency_ms.len() {
            return Err(Error::Range { batch, max: self.latency_ms.len() });
        }
        Ok(self.latency_ms[batch - 1])
    }

    /// Rescales a duration observed at batch `from` to batch `to`:
    /// `d * l(to) / l(from)`.
    pub fn calibrate(&self, duration: f64, from: usize, to: usize) -> Result<f64> {
        Ok(duration * self.latency(to)? / self.latency(from)?)
    }

    /// `l(b) / l(1)` for a possibly fractional average batch size, rounded
    /// to the nearest admissible batch.
    pub fn slowdown(&self, avg_batch: f64) -> f64 {
        let b = (round(avg_batch) as usize).clamp(1, self.latency_ms.len());
        self.latency_ms[b - 1] / self.latency_ms[0]
    }
}
