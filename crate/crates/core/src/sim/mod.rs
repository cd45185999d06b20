//! Numerical checks of the lumping: fixed-step RK4 integration, trajectory
//! comparison, cost evaluation and bang-bang optimal values.

mod cost;
mod optimal;

pub use cost::{evaluate_cost, CostSpec, Observer, Tracking, TrackingReference};
pub use optimal::{optimal_bangbang_value, Direction, OptimalValueResult};

use crate::error::{Error, Result};
use crate::input::InputStructure;
use crate::lump::{project_control, project_state, ReducedSystem};
use crate::matrix::{NodeId, SparseMatrix};
use crate::signal::ControlSignal;

/// `x' = A x + B u` where `B` has unit columns at `input_nodes`.
#[derive(Clone, Debug)]
pub struct ControlledSystem {
    a: SparseMatrix<f64>,
    input_nodes: Vec<NodeId>,
}

impl ControlledSystem {
    pub fn new(a: SparseMatrix<f64>, input_nodes: Vec<NodeId>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.n_rows(),
                found: a.n_cols(),
                context: "system matrix must be square",
            });
        }
        if let Some(&bad) = input_nodes.iter().find(|&&v| v >= a.n_rows()) {
            return Err(Error::InvalidInput(format!(
                "input node {bad} out of range"
            )));
        }
        Ok(ControlledSystem { a, input_nodes })
    }

    pub fn original(a: &SparseMatrix<f64>, input: &InputStructure) -> Result<Self> {
        Self::new(a.clone(), input.drivers().to_vec())
    }

    pub fn reduced(reduced: &ReducedSystem) -> Self {
        ControlledSystem {
            a: reduced.a_hat.to_sparse(),
            input_nodes: (0..reduced.k()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.n_rows()
    }

    pub fn channels(&self) -> usize {
        self.input_nodes.len()
    }

    pub fn matrix(&self) -> &SparseMatrix<f64> {
        &self.a
    }

    pub fn input_nodes(&self) -> &[NodeId] {
        &self.input_nodes
    }
}

/// States on a uniform grid, `states[s]` at time `s · dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }
}

/// Number of steps of size `dt` in `[0, t_end]`, insisting on an exact fit.
pub(crate) fn grid_steps(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::GridMismatch(format!(
            "need dt > 0 and T >= 0, got dt={dt}, T={t_end}"
        )));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::GridMismatch(format!(
            "T={t_end} is not a multiple of dt={dt}"
        )));
    }
    Ok(steps as usize)
}

/// Maps integration steps onto control samples; the control step must be a
/// whole multiple of `dt` and the control must cover the horizon.
pub(crate) struct ControlClock {
    ratio: usize,
}

impl ControlClock {
    pub(crate) fn new(u: &ControlSignal, dt: f64, steps: usize) -> Result<Self> {
        let ratio = (u.dt() / dt).round();
        if ratio < 1.0 || (ratio * dt - u.dt()).abs() > 1e-9 * u.dt() {
            return Err(Error::GridMismatch(format!(
                "control step {} is not a multiple of integration step {dt}",
                u.dt()
            )));
        }
        let ratio = ratio as usize;
        if u.steps() * ratio < steps {
            return Err(Error::GridMismatch(format!(
                "control covers {} of {steps} integration steps",
                u.steps() * ratio
            )));
        }
        Ok(ControlClock { ratio })
    }

    pub(crate) fn sample(&self, step: usize) -> usize {
        step / self.ratio
    }
}

/// Scratch space for one classical RK4 step.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(n: usize) -> Self {
        Rk4 {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn rhs(sys: &ControlledSystem, x: &[f64], u: &[f64], out: &mut [f64]) {
        sys.a.mul_vec_into(x, out);
        for (&node, &value) in sys.input_nodes.iter().zip(u) {
            out[node] += value;
        }
    }

    /// Advances `x` by `h` with `u` held constant.
    pub(crate) fn step(&mut self, sys: &ControlledSystem, x: &mut [f64], u: &[f64], h: f64) {
        Self::rhs(sys, x, u, &mut self.k1);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        Self::rhs(sys, &self.tmp, u, &mut self.k2);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        Self::rhs(sys, &self.tmp, u, &mut self.k3);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        Self::rhs(sys, &self.tmp, u, &mut self.k4);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn check_dims(sys: &ControlledSystem, u: &ControlSignal, x0: &[f64]) -> Result<()> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
            context: "initial state",
        });
    }
    if u.channels() != sys.channels() {
        return Err(Error::DimensionMismatch {
            expected: sys.channels(),
            found: u.channels(),
            context: "control channels",
        });
    }
    Ok(())
}

/// Classical RK4 with fixed step `dt` on `[0, t_end]`.
pub fn integrate(
    sys: &ControlledSystem,
    u: &ControlSignal,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_dims(sys, u, x0)?;
    let steps = grid_steps(t_end, dt)?;
    let clock = ControlClock::new(u, dt, steps)?;
    let mut rk = Rk4::new(sys.dim());
    let mut x = x0.to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    for s in 0..steps {
        rk.step(sys, &mut x, u.sample(clock.sample(s)), dt);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: s + 1 });
        }
        states.push(x.clone());
    }
    Ok(Trajectory { dt, states })
}

/// Integrates the original system under `u` and the reduced system under
/// the lumped control from the lumped initial state, returning
/// `max_t ‖L x(t) − x̂(t)‖∞` over the grid.
///
/// `L` is taken from `reduced.blocks`, so `reduced` fixes the block order.
pub fn verify_trajectory_equivalence(
    original: &ControlledSystem,
    reduced: &ReducedSystem,
    u: &ControlSignal,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    check_dims(original, u, x0)?;
    if reduced.n_original() != original.dim() {
        return Err(Error::DimensionMismatch {
            expected: original.dim(),
            found: reduced.n_original(),
            context: "reduced system size",
        });
    }
    let lumped = ControlledSystem::reduced(reduced);
    let u_hat = project_control(u, reduced)?;
    let steps = grid_steps(t_end, dt)?;
    let clock = ControlClock::new(u, dt, steps)?;

    let mut x = x0.to_vec();
    let mut x_hat = project_state(x0, &reduced.blocks);
    let mut rk = Rk4::new(original.dim());
    let mut rk_hat = Rk4::new(lumped.dim());
    let mut worst: f64 = 0.0;
    for s in 0..steps {
        let c = clock.sample(s);
        rk.step(original, &mut x, u.sample(c), dt);
        rk_hat.step(&lumped, &mut x_hat, u_hat.sample(c), dt);
        let lx = project_state(&x, &reduced.blocks);
        for (a, b) in lx.iter().zip(&x_hat) {
            let d = (a - b).abs();
            if !d.is_finite() {
                return Err(Error::Divergence { step: s + 1 });
            }
            worst = worst.max(d);
        }
    }
    Ok(worst)
}
