use crate::error::{Error, Result};
use crate::matrix::NodeId;

/// Driver nodes and their control bounds.
///
/// Control channel `l` drives node `drivers[l]` with a value in
/// `[lo[l], hi[l]]`; the input matrix `B` is the set of unit columns
/// `e_{drivers[l]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputStructure {
    drivers: Vec<NodeId>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl InputStructure {
    pub fn new(drivers: Vec<NodeId>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let k = drivers.len();
        if lo.len() != k || hi.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: lo.len().min(hi.len()),
                context: "bounds per driver",
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(k);
        for &d in &drivers {
            if !seen.insert(d) {
                return Err(Error::InvalidInput(format!("driver node {d} listed twice")));
            }
        }
        for l in 0..k {
            if !(lo[l].is_finite() && hi[l].is_finite()) || lo[l] > hi[l] {
                return Err(Error::InvalidInput(format!(
                    "control {l} has invalid bounds [{}, {}]",
                    lo[l], hi[l]
                )));
            }
        }
        Ok(InputStructure { drivers, lo, hi })
    }

    /// Every driver gets the same interval.
    pub fn uniform(drivers: Vec<NodeId>, lo: f64, hi: f64) -> Result<Self> {
        let k = drivers.len();
        Self::new(drivers, vec![lo; k], vec![hi; k])
    }

    pub fn drivers(&self) -> &[NodeId] {
        &self.drivers
    }

    pub fn k(&self) -> usize {
        self.drivers.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn driver_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &d in &self.drivers {
            mask[d] = true;
        }
        mask
    }

    pub fn check_nodes(&self, n: usize) -> Result<()> {
        match self.drivers.iter().find(|&&d| d >= n) {
            Some(d) => Err(Error::InvalidInput(format!(
                "driver node {d} out of range for {n} nodes"
            ))),
            None => Ok(()),
        }
    }
}
