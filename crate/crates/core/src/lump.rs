//! Reduced systems and the maps between original and reduced quantities.

use log::warn;

use crate::equivalence::{default_tolerance, is_control_equivalence};
use crate::error::{Error, Result};
use crate::input::InputStructure;
use crate::matrix::{DenseMatrix, SparseMatrix};
use crate::partition::Partition;
use crate::signal::ControlSignal;
use crate::weight::Weight;

/// Reduced matrices above this order are kept sparse.
pub const DENSE_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum ReducedMatrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix<f64>),
}

impl ReducedMatrix {
    pub fn order(&self) -> usize {
        match self {
            ReducedMatrix::Dense(d) => d.rows(),
            ReducedMatrix::Sparse(s) => s.n_rows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            ReducedMatrix::Dense(d) => d.get(i, j),
            ReducedMatrix::Sparse(s) => s.get(i, j).copied().unwrap_or(0.0),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        match self {
            ReducedMatrix::Dense(d) => d.to_rows(),
            ReducedMatrix::Sparse(s) => s.to_dense(),
        }
    }

    /// Nonzero entries only, for fast products.
    pub fn to_sparse(&self) -> SparseMatrix<f64> {
        match self {
            ReducedMatrix::Dense(d) => d.to_sparse(),
            ReducedMatrix::Sparse(s) => s.clone(),
        }
    }
}

/// The lumped system `x̂' = Â x̂ + B̂ û` of a partition.
///
/// Blocks `0..k` contain driver nodes; column `l` of `B̂` is the unit vector
/// `e_l`, so it is not stored. `control_groups[l]` lists the original
/// control indices whose drivers lie in block `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSystem {
    pub a_hat: ReducedMatrix,
    pub blocks: Partition,
    pub control_groups: Vec<Vec<usize>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// The original driver nodes and bounds the groups index into.
    pub input: InputStructure,
}

impl ReducedSystem {
    pub fn n(&self) -> usize {
        self.blocks.n_blocks()
    }

    pub fn k(&self) -> usize {
        self.control_groups.len()
    }

    pub fn n_original(&self) -> usize {
        self.blocks.n_nodes()
    }
}

#[derive(Clone, Debug, Default)]
pub struct LumpOptions {
    /// Tolerance for the equivalence check; `None` uses the default.
    pub tol: Option<f64>,
    /// Build the system even if the partition is not a control equivalence.
    pub allow_non_equivalence: bool,
}

/// `Â = L A L̄` in the weight type of `a`: entry `(h, g)` is the total weight
/// from `H_g` into `H_h` divided by `|H_g|`.
pub fn reduced_matrix<W: Weight>(a: &SparseMatrix<W>, partition: &Partition) -> SparseMatrix<W> {
    let n = partition.n_blocks();
    let sizes: Vec<W> = partition
        .blocks()
        .iter()
        .map(|b| W::from_count(b.len()))
        .collect();
    let summed = SparseMatrix::from_triplets(
        n,
        n,
        a.entries()
            .map(|(i, j, w)| (partition.block_of(i), partition.block_of(j), w.clone())),
    )
    .expect("block indices are in range");
    SparseMatrix::from_triplets(
        n,
        n,
        summed
            .entries()
            .map(|(h, g, w)| (h, g, w.clone() / sizes[g].clone())),
    )
    .expect("block indices are in range")
}

pub fn build_reduced_system<W: Weight>(
    a: &SparseMatrix<W>,
    input: &InputStructure,
    partition: &Partition,
    options: &LumpOptions,
) -> Result<ReducedSystem> {
    let n = a.n_rows();
    if partition.n_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: partition.n_nodes(),
            context: "partition size",
        });
    }
    input.check_nodes(n)?;
    let tol = options.tol.unwrap_or_else(|| default_tolerance(a));
    let check = is_control_equivalence(a, partition, tol)?;
    if !check.holds {
        if options.allow_non_equivalence {
            warn!(
                "building reduced system of a partition that is not a control equivalence (deviation {:e})",
                check.max_deviation
            );
        } else {
            return Err(Error::NotControlEquivalence {
                deviation: check.max_deviation,
            });
        }
    }

    let is_driver = input.driver_mask(n);
    let blocks = partition.drivers_first(&is_driver);
    let k = blocks
        .blocks()
        .iter()
        .take_while(|b| b.iter().any(|&v| is_driver[v]))
        .count();
    let mixed = blocks.blocks()[..k]
        .iter()
        .filter(|b| b.iter().any(|&v| !is_driver[v]))
        .count();
    if mixed > 0 {
        warn!("{mixed} driver block(s) also contain non-driver nodes");
    }

    let mut control_groups = vec![Vec::new(); k];
    for (l, &d) in input.drivers().iter().enumerate() {
        control_groups[blocks.block_of(d)].push(l);
    }
    let (lo, hi) = group_bounds(&control_groups, input.lo(), input.hi());

    let a_hat = reduced_matrix(a, &blocks).to_f64();
    let a_hat = if blocks.n_blocks() <= DENSE_LIMIT {
        let mut dense = DenseMatrix::zeros(blocks.n_blocks(), blocks.n_blocks());
        for (h, g, &w) in a_hat.entries() {
            dense.set(h, g, w);
        }
        ReducedMatrix::Dense(dense)
    } else {
        ReducedMatrix::Sparse(a_hat)
    };

    Ok(ReducedSystem {
        a_hat,
        blocks,
        control_groups,
        lo,
        hi,
        input: input.clone(),
    })
}

fn group_sums(groups: &[Vec<usize>], values: &[f64]) -> Vec<f64> {
    groups
        .iter()
        .map(|g| g.iter().fold(0.0, |acc, &l| acc + values[l]))
        .collect()
}

fn group_bounds(groups: &[Vec<usize>], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (group_sums(groups, lo), group_sums(groups, hi))
}

/// Block sums `x̂_h = Σ_{j ∈ H_h} x_j`.
pub fn project_state(x: &[f64], partition: &Partition) -> Vec<f64> {
    partition
        .blocks()
        .iter()
        .map(|b| b.iter().fold(0.0, |acc, &j| acc + x[j]))
        .collect()
}

/// Lumped control `û_l = Σ_{l' ∈ 𝒦(H_l)} u_{l'}`, sample by sample.
///
/// Sums run in the same order as the bound sums, so `û` stays inside
/// `[m̂, M̂]` without rounding slack.
pub fn project_control(u: &ControlSignal, reduced: &ReducedSystem) -> Result<ControlSignal> {
    let input = &reduced.input;
    if u.channels() != input.k() {
        return Err(Error::DimensionMismatch {
            expected: input.k(),
            found: u.channels(),
            context: "control channels",
        });
    }
    for (step, sample) in u.samples().iter().enumerate() {
        for (channel, &value) in sample.iter().enumerate() {
            let (lo, hi) = (input.lo()[channel], input.hi()[channel]);
            if !(lo <= value && value <= hi) {
                return Err(Error::OutOfBounds {
                    channel,
                    step,
                    value,
                    lo,
                    hi,
                });
            }
        }
    }
    let values = u
        .samples()
        .iter()
        .map(|sample| group_sums(&reduced.control_groups, sample))
        .collect();
    ControlSignal::new(u.dt(), values, reduced.lo.clone(), reduced.hi.clone())
}

/// Canonical affine lifting of a reduced control to the original inputs:
/// each original channel sits at the same relative position inside its own
/// interval as `û_l` inside `[m̂_l, M̂_l]`; degenerate groups pin to `m`.
pub fn lift_control(u_hat: &ControlSignal, reduced: &ReducedSystem) -> Result<ControlSignal> {
    let k = reduced.k();
    if u_hat.channels() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: u_hat.channels(),
            context: "reduced control channels",
        });
    }
    let input = &reduced.input;
    let (m, big_m) = (input.lo(), input.hi());
    let mut values = Vec::with_capacity(u_hat.steps());
    for (step, sample) in u_hat.samples().iter().enumerate() {
        let mut u = vec![0.0; input.k()];
        for (l, group) in reduced.control_groups.iter().enumerate() {
            let (lo, hi, v) = (reduced.lo[l], reduced.hi[l], sample[l]);
            if !(lo <= v && v <= hi) {
                return Err(Error::OutOfBounds {
                    channel: l,
                    step,
                    value: v,
                    lo,
                    hi,
                });
            }
            for &lp in group {
                u[lp] = if lo < hi {
                    let x = m[lp] + (big_m[lp] - m[lp]) / (hi - lo) * (v - lo);
                    x.clamp(m[lp], big_m[lp])
                } else {
                    m[lp]
                };
            }
        }
        values.push(u);
    }
    ControlSignal::new(u_hat.dt(), values, m.to_vec(), big_m.to_vec())
}
