//! Independent reference implementations used by the integration tests.
//! Everything here works on small dense matrices with naive loops.

#![allow(dead_code)]

use ctrleq::drivers::minimum_driver_nodes;
use ctrleq::gen::{planted_network, stabilize, PlantedSpec};
use ctrleq::{InputStructure, Partition, SparseMatrix};
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;

/// Exact arithmetic for the oracles; test weights are small dyadic numbers.
pub type Q = Ratio<i64>;

pub const FIG1_TSV: &str = "2\t1\t0.5\n3\t1\t0.5\n1\t2\t0.25\n1\t3\t0.5\n";

pub fn fig1() -> SparseMatrix<f64> {
    SparseMatrix::from_triplets(3, 3, [(0, 1, 0.5), (0, 2, 0.5), (1, 0, 0.25), (2, 0, 0.5)])
        .unwrap()
}

pub fn to_q(a: &SparseMatrix<f64>) -> Vec<Vec<Q>> {
    a.to_dense()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|w| {
                    let q = Q::approximate_float(w).unwrap();
                    assert_eq!(*q.numer() as f64 / *q.denom() as f64, w);
                    q
                })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = Q::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += row[k] * b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `L` (blocks × nodes) and `L̄` (nodes × blocks) as dense rationals.
pub fn aggregation(blocks: &[Vec<usize>], n: usize) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let mut l = vec![vec![Q::zero(); n]; blocks.len()];
    let mut lbar = vec![vec![Q::zero(); blocks.len()]; n];
    for (h, block) in blocks.iter().enumerate() {
        for &j in block {
            l[h][j] = Q::one();
            lbar[j][h] = Q::new(1, block.len() as i64);
        }
    }
    (l, lbar)
}

/// `LA == L A L̄ L`, formed explicitly.
pub fn is_ce_dense(a: &[Vec<Q>], blocks: &[Vec<usize>]) -> bool {
    let (l, lbar) = aggregation(blocks, a.len());
    let la = matmul(&l, a);
    let lalbarl = matmul(&matmul(&la, &lbar), &l);
    la == lalbarl
}

/// `max |LA − L A L̄ L|` in floating point.
pub fn ce_defect_f64(a: &SparseMatrix<f64>, blocks: &[Vec<usize>]) -> f64 {
    let dense = a.to_dense();
    let n = dense.len();
    let mut la = vec![vec![0.0; n]; blocks.len()];
    for (h, block) in blocks.iter().enumerate() {
        for &i in block {
            for j in 0..n {
                la[h][j] += dense[i][j];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for row in &la {
        for block in blocks {
            let avg = block.iter().map(|&j| row[j]).sum::<f64>() / block.len() as f64;
            for &j in block {
                worst = worst.max((row[j] - avg).abs());
            }
        }
    }
    worst
}

/// Every set partition of `items`, in no particular order.
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::new();
    fn rec(items: &[usize], current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let Some((&first, rest)) = items.split_first() else {
            out.push(current.clone());
            return;
        };
        for b in 0..current.len() {
            current[b].push(first);
            rec(rest, current, out);
            current[b].pop();
        }
        current.push(vec![first]);
        rec(rest, current, out);
        current.pop();
    }
    rec(items, &mut current, &mut out);
    out
}

/// Every partition refining `initial`, as lists of blocks.
pub fn refinements(initial: &Partition) -> Vec<Vec<Vec<usize>>> {
    let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for block in initial.blocks() {
        let parts = set_partitions(block);
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for prefix in &acc {
            for p in &parts {
                let mut combined = prefix.clone();
                combined.extend(p.iter().cloned());
                next.push(combined);
            }
        }
        acc = next;
    }
    acc
}

/// The coarsest control equivalence refining `initial`, by enumeration.
/// Also asserts that it is unique and that every other control equivalence
/// refining `initial` refines it.
pub fn coarsest_by_enumeration(a: &[Vec<Q>], initial: &Partition) -> Partition {
    let n = a.len();
    let stable: Vec<Partition> = refinements(initial)
        .into_iter()
        .filter(|blocks| is_ce_dense(a, blocks))
        .map(|blocks| Partition::new(blocks, n).unwrap())
        .collect();
    let fewest = stable
        .iter()
        .map(Partition::n_blocks)
        .min()
        .expect("singletons are stable");
    let best: Vec<&Partition> = stable.iter().filter(|p| p.n_blocks() == fewest).collect();
    assert_eq!(best.len(), 1, "coarsest control equivalence must be unique");
    for p in &stable {
        assert!(
            p.refines(best[0]),
            "every stable refinement lies below the coarsest"
        );
    }
    best[0].canonical()
}

/// Maximum matching size on the bipartite graph (source → target) by
/// dynamic programming over sets of used targets.
pub fn brute_force_matching(a: &SparseMatrix<f64>) -> usize {
    let n = a.n_rows();
    assert!(n <= 16);
    let adj: Vec<Vec<usize>> = (0..n).map(|j| a.col_indices(j).to_vec()).collect();
    let mut memo = vec![vec![usize::MAX; 1 << n]; n + 1];
    fn best(j: usize, used: usize, adj: &[Vec<usize>], memo: &mut [Vec<usize>]) -> usize {
        if j == adj.len() {
            return 0;
        }
        if memo[j][used] != usize::MAX {
            return memo[j][used];
        }
        let mut value = best(j + 1, used, adj, memo);
        for &i in &adj[j] {
            if used & (1 << i) == 0 {
                value = value.max(1 + best(j + 1, used | (1 << i), adj, memo));
            }
        }
        memo[j][used] = value;
        value
    }
    best(0, 0, &adj, &mut memo)
}

/// Self-convergence reference: the same RK4 scheme at a finer step.
pub fn dense_rk4(
    a: &[Vec<f64>],
    b_nodes: &[usize],
    u: &[f64],
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Vec<f64> {
    let n = x0.len();
    let f = |x: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * x[j]).sum())
            .collect();
        for (&node, &v) in b_nodes.iter().zip(u) {
            out[node] += v;
        }
        out
    };
    let steps = (t_end / dt).round() as usize;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let k1 = f(&x);
        let k2 = f(&x
            .iter()
            .zip(&k1)
            .map(|(a, k)| a + 0.5 * dt * k)
            .collect::<Vec<_>>());
        let k3 = f(&x
            .iter()
            .zip(&k2)
            .map(|(a, k)| a + 0.5 * dt * k)
            .collect::<Vec<_>>());
        let k4 = f(&x
            .iter()
            .zip(&k3)
            .map(|(a, k)| a + dt * k)
            .collect::<Vec<_>>());
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

/// A stable network with a planted control equivalence, drivers taken from
/// a maximum matching and widened to whole planted blocks, and random
/// bounds.
pub struct Instance {
    pub a: SparseMatrix<f64>,
    pub input: InputStructure,
    pub planted: Partition,
}

pub fn planted_instance<R: Rng>(rng: &mut R, spec: PlantedSpec) -> Instance {
    let (w, planted) = planted_network(rng, spec);
    let a = stabilize(&w);
    let mut chosen = vec![false; planted.n_blocks()];
    for d in minimum_driver_nodes(&a) {
        chosen[planted.block_of(d)] = true;
    }
    let drivers: Vec<usize> = (0..a.n_rows())
        .filter(|&v| chosen[planted.block_of(v)])
        .collect();
    let lo: Vec<f64> = drivers.iter().map(|_| rng.gen_range(-1.0..0.5)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..2.0)).collect();
    Instance {
        a,
        input: InputStructure::new(drivers, lo, hi).unwrap(),
        planted,
    }
}
