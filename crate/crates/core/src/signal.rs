use crate::error::{Error, Result};

/// Piecewise-constant control on a uniform grid.
///
/// `values[s]` is applied on `[s·dt, (s+1)·dt)`; the horizon is
/// `steps · dt`. Every sample lies inside its channel's `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSignal {
    dt: f64,
    values: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ControlSignal {
    pub fn new(dt: f64, values: Vec<Vec<f64>>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::GridMismatch(format!(
                "step must be positive, got {dt}"
            )));
        }
        if values.is_empty() {
            return Err(Error::GridMismatch("control has no samples".into()));
        }
        let k = lo.len();
        if hi.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: hi.len(),
                context: "upper bounds per channel",
            });
        }
        for (step, sample) in values.iter().enumerate() {
            if sample.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: sample.len(),
                    context: "control sample width",
                });
            }
            for (channel, &value) in sample.iter().enumerate() {
                if !(lo[channel] <= value && value <= hi[channel]) {
                    return Err(Error::OutOfBounds {
                        channel,
                        step,
                        value,
                        lo: lo[channel],
                        hi: hi[channel],
                    });
                }
            }
        }
        Ok(ControlSignal { dt, values, lo, hi })
    }

    pub fn constant(
        dt: f64,
        steps: usize,
        value: &[f64],
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self> {
        Self::new(dt, vec![value.to_vec(); steps.max(1)], lo, hi)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn channels(&self) -> usize {
        self.lo.len()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.values.len() as f64
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn sample(&self, step: usize) -> &[f64] {
        &self.values[step]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Value in force at time `t` (the last sample from `T` on).
    pub fn at(&self, t: f64) -> &[f64] {
        let s = ((t / self.dt).floor().max(0.0) as usize).min(self.values.len() - 1);
        &self.values[s]
    }

    /// Largest channel-wise difference between two signals on one grid.
    pub fn max_abs_diff(&self, other: &ControlSignal) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}
