//! Coarsest control equivalence by partition refinement.
//!
//! Blocks live as contiguous ranges of one permutation array, so splitting a
//! block only touches the nodes that were reached from the current splitter.
//! A splitter `S` assigns every node `j` the signature
//! `σ_S(j) = Σ_{i ∈ S} A[i][j]`; nodes of one block with different
//! signatures are separated. When a block that is not waiting in the worklist
//! splits, every piece except a largest one is enqueued: the signature with
//! respect to the skipped piece is the parent's signature minus the others,
//! so stability against it follows once the enqueued pieces are processed.
//! Each node therefore enters the worklist `O(log N)` times.

use std::collections::VecDeque;

use crate::equivalence::default_tolerance;
use crate::error::{Error, Result};
use crate::input::InputStructure;
use crate::lump::{build_reduced_system, LumpOptions, ReducedSystem};
use crate::matrix::{NodeId, SparseMatrix};
use crate::partition::{InitialPartition, Partition};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RefinementStats {
    pub splitters_processed: usize,
    pub edges_scanned: usize,
    pub splits: usize,
}

#[derive(Clone, Debug)]
pub struct Refinement {
    /// Blocks ordered by lowest member.
    pub partition: Partition,
    pub stats: RefinementStats,
}

#[derive(Clone, Copy, Debug)]
struct Range {
    start: usize,
    end: usize,
}

impl Range {
    fn len(&self) -> usize {
        self.end - self.start
    }
}

struct State<'a, W> {
    a: &'a SparseMatrix<W>,
    tol: f64,
    elems: Vec<NodeId>,
    pos: Vec<usize>,
    block_of: Vec<usize>,
    blocks: Vec<Range>,
    queued: Vec<bool>,
    worklist: VecDeque<usize>,
    sigma: Vec<W>,
    stamp: Vec<usize>,
    stats: RefinementStats,
}

impl<'a, W: Weight> State<'a, W> {
    fn new(a: &'a SparseMatrix<W>, initial: &Partition, tol: f64) -> Self {
        let n = a.n_rows();
        let mut elems = Vec::with_capacity(n);
        let mut blocks = Vec::with_capacity(initial.n_blocks());
        for block in initial.blocks() {
            let start = elems.len();
            elems.extend_from_slice(block);
            blocks.push(Range {
                start,
                end: elems.len(),
            });
        }
        let mut pos = vec![0; n];
        for (p, &v) in elems.iter().enumerate() {
            pos[v] = p;
        }
        let nb = blocks.len();
        State {
            a,
            tol,
            elems,
            pos,
            block_of: initial.assignment().to_vec(),
            blocks,
            queued: vec![true; nb],
            worklist: (0..nb).collect(),
            sigma: vec![W::zero(); n],
            stamp: vec![usize::MAX; n],
            stats: RefinementStats::default(),
        }
    }

    fn run(&mut self) {
        let mut members: Vec<NodeId> = Vec::new();
        let mut touched: Vec<NodeId> = Vec::new();
        while let Some(s) = self.worklist.pop_front() {
            self.queued[s] = false;
            let pass = self.stats.splitters_processed;
            self.stats.splitters_processed += 1;

            let r = self.blocks[s];
            members.clear();
            members.extend_from_slice(&self.elems[r.start..r.end]);
            touched.clear();
            for &i in &members {
                for (j, w) in self.a.row(i) {
                    self.stats.edges_scanned += 1;
                    if self.stamp[j] != pass {
                        self.stamp[j] = pass;
                        self.sigma[j] = W::zero();
                        touched.push(j);
                    }
                    self.sigma[j] = self.sigma[j].clone() + w.clone();
                }
            }
            if touched.is_empty() {
                continue;
            }

            let sigma = &self.sigma;
            let block_of = &self.block_of;
            touched.sort_unstable_by(|&x, &y| {
                block_of[x]
                    .cmp(&block_of[y])
                    .then_with(|| sigma[x].total_cmp(&sigma[y]))
                    .then_with(|| x.cmp(&y))
            });

            let mut start = 0;
            while start < touched.len() {
                let b = self.block_of[touched[start]];
                let mut end = start + 1;
                while end < touched.len() && self.block_of[touched[end]] == b {
                    end += 1;
                }
                self.split_block(b, &touched[start..end]);
                start = end;
            }
        }
    }

    /// Splits block `b` by signature; `run` holds its touched members sorted
    /// by signature.
    fn split_block(&mut self, b: usize, run: &[NodeId]) {
        let size = self.blocks[b].len();
        let untouched = size - run.len();
        let zero = W::zero();

        // Walk the sorted signatures with the implicit zero of untouched
        // members spliced in, cutting wherever consecutive values differ.
        let mut groups: Vec<(Vec<NodeId>, bool)> = Vec::new();
        let mut prev: Option<&W> = None;
        let mut zero_pending = untouched > 0;
        let mut idx = 0;
        loop {
            let take_zero =
                zero_pending && (idx == run.len() || zero.total_cmp(&self.sigma[run[idx]]).is_le());
            let value = if take_zero {
                &zero
            } else if idx < run.len() {
                &self.sigma[run[idx]]
            } else {
                break;
            };
            let new_group = match prev {
                None => true,
                Some(p) => !p.within(value, self.tol),
            };
            if new_group {
                groups.push((Vec::new(), false));
            }
            let group = groups.last_mut().expect("group exists");
            if take_zero {
                group.1 = true;
                zero_pending = false;
            } else {
                group.0.push(run[idx]);
                idx += 1;
            }
            prev = Some(value);
        }
        if groups.len() < 2 {
            return;
        }
        self.stats.splits += 1;

        let sizes: Vec<usize> = groups
            .iter()
            .map(|(nodes, has_untouched)| nodes.len() + if *has_untouched { untouched } else { 0 })
            .collect();
        let stay = match groups.iter().position(|g| g.1) {
            Some(g) => g,
            None => {
                let max = *sizes.iter().max().expect("non-empty");
                sizes.iter().position(|&s| s == max).expect("max exists")
            }
        };

        let parent_queued = self.queued[b];
        let mut pieces: Vec<(usize, usize)> = vec![(b, sizes[stay])];
        let mut end = self.blocks[b].end;
        for (g, (nodes, _)) in groups.iter().enumerate() {
            if g == stay {
                continue;
            }
            let new_id = self.blocks.len();
            let piece_end = end;
            for &x in nodes {
                end -= 1;
                let px = self.pos[x];
                let y = self.elems[end];
                self.elems.swap(px, end);
                self.pos[y] = px;
                self.pos[x] = end;
                self.block_of[x] = new_id;
            }
            self.blocks.push(Range {
                start: end,
                end: piece_end,
            });
            self.queued.push(false);
            pieces.push((new_id, nodes.len()));
        }
        self.blocks[b].end = end;

        if parent_queued {
            for &(id, _) in &pieces[1..] {
                self.enqueue(id);
            }
        } else {
            // skip one largest piece; ties keep the parent out of the queue
            let max = pieces.iter().map(|p| p.1).max().expect("non-empty");
            let skip = pieces.iter().position(|p| p.1 == max).expect("max exists");
            for (k, &(id, _)) in pieces.iter().enumerate() {
                if k != skip {
                    self.enqueue(id);
                }
            }
        }
    }

    fn enqueue(&mut self, b: usize) {
        if !self.queued[b] {
            self.queued[b] = true;
            self.worklist.push_back(b);
        }
    }

    fn into_partition(self) -> Partition {
        let blocks = self
            .blocks
            .iter()
            .map(|r| self.elems[r.start..r.end].to_vec())
            .collect();
        Partition::new(blocks, self.elems.len())
            .expect("refinement keeps a valid partition")
            .canonical()
    }
}

/// The coarsest control equivalence refining `initial`, using the default
/// tolerance for the weight type.
pub fn coarsest_control_equivalence<W: Weight>(
    a: &SparseMatrix<W>,
    initial: &Partition,
) -> Result<Partition> {
    let tol = default_tolerance(a);
    Ok(coarsest_control_equivalence_with(a, initial, tol)?.partition)
}

/// As [`coarsest_control_equivalence`] with an explicit signature tolerance.
///
/// Exact weights compare by equality when `tol == 0`; floating-point
/// signatures are sorted and cut at gaps larger than `tol`.
pub fn coarsest_control_equivalence_with<W: Weight>(
    a: &SparseMatrix<W>,
    initial: &Partition,
    tol: f64,
) -> Result<Refinement> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            found: a.n_cols(),
            context: "matrix must be square",
        });
    }
    if initial.n_nodes() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            found: initial.n_nodes(),
            context: "initial partition size",
        });
    }
    let mut state = State::new(a, initial, tol);
    state.run();
    let stats = state.stats;
    Ok(Refinement {
        partition: state.into_partition(),
        stats,
    })
}

#[derive(Clone, Debug, Default)]
pub struct ReduceOptions {
    /// Signature tolerance; `None` picks [`default_tolerance`].
    pub tol: Option<f64>,
    pub lump: LumpOptions,
}

/// Initial partition, refinement and reduced system in one call.
///
/// The returned partition is ordered by lowest member; the reduced system
/// orders the same blocks with driver blocks first.
pub fn reduce_pipeline<W: Weight>(
    a: &SparseMatrix<W>,
    input: &InputStructure,
    initial: &InitialPartition,
    options: &ReduceOptions,
) -> Result<(Partition, ReducedSystem)> {
    input.check_nodes(a.n_rows())?;
    let start = initial.resolve(a.n_rows(), input.drivers())?;
    let tol = options.tol.unwrap_or_else(|| default_tolerance(a));
    let refined = coarsest_control_equivalence_with(a, &start, tol)?.partition;
    let lump = LumpOptions {
        tol: Some(options.lump.tol.unwrap_or(tol)),
        ..options.lump.clone()
    };
    let reduced = build_reduced_system(a, input, &refined, &lump)?;
    Ok((refined, reduced))
}
