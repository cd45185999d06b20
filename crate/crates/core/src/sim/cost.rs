use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lump::{project_state, ReducedSystem};
use crate::signal::ControlSignal;

use super::Trajectory;

/// A cost that depends on states only through block sums and on controls
/// only through lumped inputs, so it takes the same value on the original
/// and the reduced system.
///
/// * final cost `F = Σ_h final_coeffs[h] · x̂_h(T)`
/// * running cost `R = tracking.weight · ‖x̂(t) − r(t)‖² + control_weight · ‖B̂ û(t)‖²`
///
/// Block indices follow the reduced system's ordering (driver blocks first).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub final_coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracking: Option<Tracking>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    pub weight: f64,
    pub reference: TrackingReference,
}

/// Target for the block sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingReference {
    Constant(Vec<f64>),
    /// Values at `t = s · dt`, linearly interpolated and held past the end.
    Samples {
        dt: f64,
        values: Vec<Vec<f64>>,
    },
}

impl TrackingReference {
    fn at(&self, t: f64, out: &mut [f64]) {
        match self {
            TrackingReference::Constant(v) => out.copy_from_slice(v),
            TrackingReference::Samples { dt, values } => {
                let pos = (t / dt).max(0.0);
                let i = pos.floor() as usize;
                if i + 1 >= values.len() {
                    out.copy_from_slice(values.last().expect("non-empty reference"));
                } else {
                    let f = pos - i as f64;
                    for (o, (a, b)) in out.iter_mut().zip(values[i].iter().zip(&values[i + 1])) {
                        *o = a + f * (b - a);
                    }
                }
            }
        }
    }

    fn width_ok(&self, n: usize) -> bool {
        match self {
            TrackingReference::Constant(v) => v.len() == n,
            TrackingReference::Samples { dt, values } => {
                *dt > 0.0 && !values.is_empty() && values.iter().all(|v| v.len() == n)
            }
        }
    }
}

/// How a trajectory is seen by a [`CostSpec`].
#[derive(Clone, Copy, Debug)]
pub enum Observer<'a> {
    /// Trajectory and control of the reduced system.
    Reduced,
    /// Trajectory and control of the original system, lumped through the
    /// blocks and control groups of this reduced system.
    Original(&'a ReducedSystem),
}

impl CostSpec {
    /// Final cost only.
    pub fn linear(final_coeffs: Vec<f64>) -> Self {
        CostSpec {
            final_coeffs,
            ..Default::default()
        }
    }

    /// Expands the block coefficients to one coefficient per original node.
    pub fn node_coeffs(&self, reduced: &ReducedSystem) -> Vec<f64> {
        let mut c = vec![0.0; reduced.n_original()];
        for (h, block) in reduced.blocks.blocks().iter().enumerate() {
            for &j in block {
                c[j] = self.final_coeffs[h];
            }
        }
        c
    }
}

/// `J = F(x̂(T)) + ∫ R dt` with trapezoidal quadrature on the trajectory grid.
///
/// Both observers go through the same block-sum code path.
pub fn evaluate_cost(
    traj: &Trajectory,
    u: &ControlSignal,
    spec: &CostSpec,
    observer: Observer<'_>,
) -> Result<f64> {
    let (n, k) = match observer {
        Observer::Reduced => (traj.states[0].len(), u.channels()),
        Observer::Original(r) => (r.n(), r.k()),
    };
    if spec.final_coeffs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: spec.final_coeffs.len(),
            context: "final cost coefficients",
        });
    }
    if let Some(tr) = &spec.tracking {
        if !tr.reference.width_ok(n) {
            return Err(Error::InvalidInput(
                "tracking reference has the wrong width".into(),
            ));
        }
    }
    let horizon = traj.horizon();
    if u.horizon() + 1e-9 * horizon.max(u.dt()) < horizon {
        return Err(Error::GridMismatch(
            "control does not cover the trajectory".into(),
        ));
    }

    let observe = |s: usize| -> (Vec<f64>, Vec<f64>) {
        let t = s as f64 * traj.dt;
        let sample = (((t / u.dt()) + 1e-9).floor() as usize).min(u.steps() - 1);
        let raw = u.sample(sample);
        match observer {
            Observer::Reduced => (traj.states[s].clone(), raw.to_vec()),
            Observer::Original(r) => {
                let y = project_state(&traj.states[s], &r.blocks);
                let v = r
                    .control_groups
                    .iter()
                    .map(|g| g.iter().fold(0.0, |acc, &l| acc + raw[l]))
                    .collect();
                (y, v)
            }
        }
    };
    if u.channels() != k && matches!(observer, Observer::Reduced) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: u.channels(),
            context: "control channels",
        });
    }

    let steps = traj.steps();
    let mut running = 0.0;
    let needs_running = spec.tracking.is_some() || spec.control_weight.is_some();
    let mut target = vec![0.0; n];
    if needs_running {
        for s in 0..=steps {
            let (y, v) = observe(s);
            let mut r = 0.0;
            if let Some(tr) = &spec.tracking {
                tr.reference.at(s as f64 * traj.dt, &mut target);
                r += tr.weight
                    * y.iter()
                        .zip(&target)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>();
            }
            if let Some(q) = spec.control_weight {
                r += q * v.iter().map(|x| x * x).sum::<f64>();
            }
            let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
            running += w * r;
        }
        running *= traj.dt;
    }
    let (y_end, _) = observe(steps);
    let terminal: f64 = spec
        .final_coeffs
        .iter()
        .zip(&y_end)
        .map(|(c, y)| c * y)
        .sum();
    Ok(terminal + running)
}
