//! Aggregation matrices and the control-equivalence predicate `LA = LAL̄L`.
//!
//! Row `h` of `LA` holds, for every node `j`, the total weight of edges from
//! `j` into block `h`. The predicate holds exactly when each such row is
//! constant on every block, which is what the sparse check below tests
//! without forming any dense product.

use crate::error::{Error, Result};
use crate::matrix::{NodeId, SparseMatrix};
use crate::partition::Partition;
use crate::weight::Weight;

/// The aggregation matrix `L` (n x N) and its right inverse `L̄` (N x n).
#[derive(Clone, Debug, PartialEq)]
pub struct AggregationPair<W = f64> {
    pub l: SparseMatrix<W>,
    pub lbar: SparseMatrix<W>,
}

impl<W: Weight> AggregationPair<W> {
    /// `L·L̄`, which equals the identity for every valid partition.
    pub fn l_times_lbar(&self) -> SparseMatrix<W> {
        self.l.mul(&self.lbar)
    }
}

pub fn build_aggregation<W: Weight>(partition: &Partition, n: usize) -> Result<AggregationPair<W>> {
    if partition.n_nodes() != n {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} nodes, expected {n}",
            partition.n_nodes()
        )));
    }
    let blocks = partition.blocks();
    let l = SparseMatrix::from_triplets(
        blocks.len(),
        n,
        blocks
            .iter()
            .enumerate()
            .flat_map(|(h, b)| b.iter().map(move |&j| (h, j, W::one()))),
    )?;
    let lbar = SparseMatrix::from_triplets(
        n,
        blocks.len(),
        blocks.iter().enumerate().flat_map(|(h, b)| {
            let share = W::one() / W::from_count(b.len());
            b.iter().map(move |&j| (j, h, share.clone()))
        }),
    )?;
    Ok(AggregationPair { l, lbar })
}

/// `Σ_{i ∈ block} A[i][j]`: the weight of edges from `j` into `block`.
pub fn column_block_sum<W: Weight>(a: &SparseMatrix<W>, block: &[NodeId], j: NodeId) -> W {
    let mut acc = W::zero();
    for &i in block {
        if let Some(w) = a.get(i, j) {
            acc = acc + w.clone();
        }
    }
    acc
}

/// Scale-aware default: `0` for exact weights, `1e-9 (1 + max |a_ij|)` otherwise.
pub fn default_tolerance<W: Weight>(a: &SparseMatrix<W>) -> f64 {
    if W::EXACT {
        0.0
    } else {
        1e-9 * (1.0 + a.max_abs())
    }
}

/// Two nodes of `block` whose edge weight into `splitter` differs.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub splitter: usize,
    pub block: usize,
    pub nodes: (NodeId, NodeId),
    pub sums: (f64, f64),
}

impl Witness {
    /// Recomputes only the two column block sums named by the witness.
    pub fn recheck<W: Weight>(&self, a: &SparseMatrix<W>, partition: &Partition, tol: f64) -> bool {
        let s = partition.block(self.splitter);
        let x = column_block_sum(a, s, self.nodes.0);
        let y = column_block_sum(a, s, self.nodes.1);
        partition.block_of(self.nodes.0) == self.block
            && partition.block_of(self.nodes.1) == self.block
            && !x.within(&y, tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCheck {
    pub holds: bool,
    /// `max |LA - LAL̄L|`, converted to `f64`.
    pub max_deviation: f64,
    /// Present whenever `holds` is false.
    pub witness: Option<Witness>,
}

struct BlockStats<W> {
    sum: W,
    touched: usize,
    min: (W, Option<NodeId>),
    max: (W, Option<NodeId>),
}

pub fn is_control_equivalence<W: Weight>(
    a: &SparseMatrix<W>,
    partition: &Partition,
    tol: f64,
) -> Result<EquivalenceCheck> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            found: a.n_cols(),
            context: "matrix must be square",
        });
    }
    if partition.n_nodes() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            found: partition.n_nodes(),
            context: "partition size",
        });
    }
    let n = a.n_rows();
    let mut acc: Vec<W> = vec![W::zero(); n];
    let mut stamp = vec![usize::MAX; n];
    let mut touched: Vec<NodeId> = Vec::new();
    let mut stats: Vec<Option<BlockStats<W>>> = (0..partition.n_blocks()).map(|_| None).collect();
    let mut touched_blocks: Vec<usize> = Vec::new();

    let mut worst: Option<(W, Witness)> = None;

    for (h, splitter) in partition.blocks().iter().enumerate() {
        touched.clear();
        for &i in splitter {
            for (j, w) in a.row(i) {
                if stamp[j] != h {
                    stamp[j] = h;
                    acc[j] = W::zero();
                    touched.push(j);
                }
                acc[j] = acc[j].clone() + w.clone();
            }
        }

        touched_blocks.clear();
        for &j in &touched {
            let g = partition.block_of(j);
            let v = &acc[j];
            match &mut stats[g] {
                None => {
                    stats[g] = Some(BlockStats {
                        sum: v.clone(),
                        touched: 1,
                        min: (v.clone(), Some(j)),
                        max: (v.clone(), Some(j)),
                    });
                    touched_blocks.push(g);
                }
                Some(s) => {
                    s.sum = s.sum.clone() + v.clone();
                    s.touched += 1;
                    if v.total_cmp(&s.min.0).is_lt() {
                        s.min = (v.clone(), Some(j));
                    }
                    if v.total_cmp(&s.max.0).is_gt() {
                        s.max = (v.clone(), Some(j));
                    }
                }
            }
        }

        for &g in &touched_blocks {
            let mut s = stats[g].take().expect("touched block has stats");
            let size = partition.block(g).len();
            if s.touched < size {
                // untouched members contribute zeros
                if W::zero().total_cmp(&s.min.0).is_lt() {
                    s.min = (W::zero(), None);
                }
                if W::zero().total_cmp(&s.max.0).is_gt() {
                    s.max = (W::zero(), None);
                }
            }
            let mut avg = s.sum / W::from_count(size);
            if avg.total_cmp(&s.min.0).is_lt() {
                avg = s.min.0.clone();
            }
            if avg.total_cmp(&s.max.0).is_gt() {
                avg = s.max.0.clone();
            }
            let up = s.max.0.clone() - avg.clone();
            let down = avg - s.min.0.clone();
            let dev = if up.total_cmp(&down).is_ge() {
                up
            } else {
                down
            };
            let better = match &worst {
                None => !dev.is_zero(),
                Some((w, _)) => dev.total_cmp(w).is_gt(),
            };
            if better {
                let untouched = || {
                    partition
                        .block(g)
                        .iter()
                        .copied()
                        .find(|&v| stamp[v] != h)
                        .expect("block has an untouched member")
                };
                let lo = s.min.1.unwrap_or_else(untouched);
                let hi = s.max.1.unwrap_or_else(untouched);
                let witness = Witness {
                    splitter: h,
                    block: g,
                    nodes: (lo, hi),
                    sums: (s.min.0.to_f64(), s.max.0.to_f64()),
                };
                worst = Some((dev, witness));
            }
        }
    }

    let (max_deviation, holds, witness) = match worst {
        None => (0.0, true, None),
        Some((dev, witness)) => {
            let holds = if W::EXACT && tol == 0.0 {
                dev.is_zero()
            } else {
                dev.to_f64() <= tol
            };
            (dev.to_f64(), holds, (!holds).then_some(witness))
        }
    };
    Ok(EquivalenceCheck {
        holds,
        max_deviation,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Rational;

    fn fig1() -> SparseMatrix<f64> {
        SparseMatrix::from_triplets(3, 3, [(0, 1, 0.5), (0, 2, 0.5), (1, 0, 0.25), (2, 0, 0.5)])
            .unwrap()
    }

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn aggregation_of_running_example() {
        let p = Partition::new(vec![vec![1, 2], vec![0]], 3).unwrap();
        let pair = build_aggregation::<Rational>(&p, 3).unwrap();
        let z = q(0, 1);
        let one = q(1, 1);
        assert_eq!(
            pair.l.to_dense(),
            vec![
                vec![z.clone(), one.clone(), one.clone()],
                vec![one.clone(), z.clone(), z.clone()]
            ]
        );
        assert_eq!(
            pair.lbar.to_dense(),
            vec![
                vec![z.clone(), one.clone()],
                vec![q(1, 2), z.clone()],
                vec![q(1, 2), z.clone()]
            ]
        );
        assert_eq!(
            pair.l_times_lbar().to_dense(),
            vec![vec![one.clone(), z.clone()], vec![z, one]]
        );
    }

    #[test]
    fn aggregation_trivial_cases() {
        let id = build_aggregation::<f64>(&Partition::singletons(3), 3).unwrap();
        assert_eq!(id.l, id.lbar);
        assert_eq!(id.l.nnz(), 3);
        let one = build_aggregation::<Rational>(&Partition::whole(3), 3).unwrap();
        assert_eq!(one.l.to_dense(), vec![vec![q(1, 1); 3]]);
        assert_eq!(one.lbar.to_dense(), vec![vec![q(1, 3)]; 3]);
        assert!(build_aggregation::<f64>(&Partition::whole(3), 4).is_err());
    }

    #[test]
    fn predicate_on_running_example() {
        let a = fig1();
        let ce = Partition::new(vec![vec![1, 2], vec![0]], 3).unwrap();
        assert!(is_control_equivalence(&a, &ce, 0.0).unwrap().holds);

        let whole = is_control_equivalence(&a, &Partition::whole(3), 0.0).unwrap();
        assert!(!whole.holds);
        let w = whole.witness.unwrap();
        assert!(w.recheck(&a, &Partition::whole(3), 0.0));

        let bad = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let check = is_control_equivalence(&a, &bad, 0.0).unwrap();
        assert!(!check.holds);
        assert!(check.witness.unwrap().recheck(&a, &bad, 0.0));

        assert!(
            is_control_equivalence(&a, &Partition::singletons(3), 0.0)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn predicate_dimension_errors() {
        let rect = SparseMatrix::<f64>::zeros(2, 3);
        assert!(is_control_equivalence(&rect, &Partition::whole(2), 0.0).is_err());
        assert!(is_control_equivalence(&fig1(), &Partition::whole(2), 0.0).is_err());
    }

    #[test]
    fn block_sums() {
        let a = fig1();
        assert_eq!(column_block_sum(&a, &[1, 2], 0), 0.75);
        assert_eq!(column_block_sum(&a, &[1, 2], 1), 0.0);
    }

    #[test]
    fn tolerance_defaults() {
        assert_eq!(default_tolerance(&fig1()), 1e-9 * 1.5);
        assert_eq!(
            default_tolerance(&fig1().map_weights(|w| Rational::from_float(*w).unwrap())),
            0.0
        );
    }
}
