use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ControlSignal;

use super::{grid_steps, ControlledSystem, Rk4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sup,
    Inf,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Sup => "sup",
            Direction::Inf => "inf",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sup" | "max" => Ok(Direction::Sup),
            "inf" | "min" => Ok(Direction::Inf),
            _ => Err(format!("expected sup or inf, got {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimalValueResult {
    /// `cᵀ x(T)` from a forward run under the optimal control.
    pub value: f64,
    /// The same value assembled from the adjoint: `λ₀ᵀ x₀ + Σ_s φ_sᵀ u_s`.
    pub dual_value: f64,
    pub direction: Direction,
    pub control: ControlSignal,
    /// Adjoint at every grid point, `adjoint[s]` at `t = s · dt`.
    pub adjoint: Vec<Vec<f64>>,
}

/// Extremal value of the linear final cost `cᵀ x(T)` over box-constrained
/// piecewise-constant controls on the `dt` grid.
///
/// The cost is linear in the control, so the optimum is bang-bang. The
/// adjoint is the exact transpose of the RK4 step: for `x⁺ = P x + Q u`,
/// `λ_s = Pᵀ λ_{s+1}` and the switching function is `φ_s = Qᵀ λ_{s+1}`.
/// Because RK4 is polynomial in `hA`, both are Taylor sums in `hAᵀ`.
/// A channel takes its upper bound when that increases the cost in the
/// requested direction and its lower bound otherwise (including at `φ = 0`).
#[allow(clippy::too_many_arguments)]
pub fn optimal_bangbang_value(
    sys: &ControlledSystem,
    lo: &[f64],
    hi: &[f64],
    c: &[f64],
    x0: &[f64],
    t_end: f64,
    dt: f64,
    direction: Direction,
) -> Result<OptimalValueResult> {
    let n = sys.dim();
    let k = sys.channels();
    for (found, expected, context) in [
        (c.len(), n, "cost coefficients"),
        (x0.len(), n, "initial state"),
        (lo.len(), k, "lower bounds"),
        (hi.len(), k, "upper bounds"),
    ] {
        if found != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found,
                context,
            });
        }
    }
    let steps = grid_steps(t_end, dt)?;
    if steps == 0 {
        return Err(Error::GridMismatch(
            "horizon must contain at least one step".into(),
        ));
    }

    let at = sys.matrix().transpose();
    let h = dt;
    let mut adjoint = vec![Vec::new(); steps + 1];
    adjoint[steps] = c.to_vec();
    let mut phi = vec![vec![0.0; k]; steps];
    let mut w = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for s in (0..steps).rev() {
        let lam = &adjoint[s + 1];
        at.mul_vec_into(lam, &mut w[0]);
        for p in 1..4 {
            let (prev, next) = w.split_at_mut(p);
            at.mul_vec_into(&prev[p - 1], &mut next[0]);
        }
        let mut lam_prev = vec![0.0; n];
        let mut g = vec![0.0; n];
        for i in 0..n {
            lam_prev[i] = lam[i]
                + h * w[0][i]
                + h * h / 2.0 * w[1][i]
                + h * h * h / 6.0 * w[2][i]
                + h * h * h * h / 24.0 * w[3][i];
            g[i] = h
                * (lam[i] + h / 2.0 * w[0][i] + h * h / 6.0 * w[1][i] + h * h * h / 24.0 * w[2][i]);
        }
        if !lam_prev.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: s });
        }
        for (l, &node) in sys.input_nodes().iter().enumerate() {
            phi[s][l] = g[node];
        }
        adjoint[s] = lam_prev;
    }

    let values: Vec<Vec<f64>> = phi
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(l, &f)| {
                    let up = match direction {
                        Direction::Sup => f > 0.0,
                        Direction::Inf => f < 0.0,
                    };
                    if up {
                        hi[l]
                    } else {
                        lo[l]
                    }
                })
                .collect()
        })
        .collect();
    let control = ControlSignal::new(dt, values, lo.to_vec(), hi.to_vec())?;

    let mut dual_value: f64 = adjoint[0].iter().zip(x0).map(|(a, b)| a * b).sum();
    for (p, u) in phi.iter().zip(control.samples()) {
        dual_value += p.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
    }

    let mut rk = Rk4::new(n);
    let mut x = x0.to_vec();
    for s in 0..steps {
        rk.step(sys, &mut x, control.sample(s), dt);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: s + 1 });
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();

    Ok(OptimalValueResult {
        value,
        dual_value,
        direction,
        control,
        adjoint,
    })
}
