//! Node partitions.

use crate::error::{Error, Result};
use crate::matrix::NodeId;

/// An ordered partition of `{0, .., n-1}` into non-empty blocks.
///
/// Members of each block are kept ascending. Block order is significant
/// (row `h` of the aggregation matrix is block `h`); [`Partition::canonical`]
/// and [`Partition::drivers_first`] produce the conventional orderings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<NodeId>>,
    assignment: Vec<usize>,
}

impl Partition {
    /// Validates cover and disjointness of `blocks` over `{0, .., n-1}`.
    pub fn new(blocks: Vec<Vec<NodeId>>, n: usize) -> Result<Self> {
        const UNSET: usize = usize::MAX;
        let mut assignment = vec![UNSET; n];
        let mut sorted = Vec::with_capacity(blocks.len());
        for (b, mut block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            block.sort_unstable();
            for &v in &block {
                if v >= n {
                    return Err(Error::InvalidPartition(format!(
                        "node {v} out of range for {n} nodes"
                    )));
                }
                if assignment[v] != UNSET {
                    return Err(Error::InvalidPartition(format!(
                        "node {v} appears in blocks {} and {b}",
                        assignment[v]
                    )));
                }
                assignment[v] = b;
            }
            sorted.push(block);
        }
        if let Some(missing) = assignment.iter().position(|&b| b == UNSET) {
            return Err(Error::InvalidPartition(format!(
                "node {missing} is not covered"
            )));
        }
        Ok(Partition {
            blocks: sorted,
            assignment,
        })
    }

    /// Groups nodes by label; blocks are ordered by their lowest member.
    pub fn from_labels<T: Eq + std::hash::Hash + Clone>(labels: &[T]) -> Self {
        let mut index = std::collections::HashMap::new();
        let mut blocks: Vec<Vec<NodeId>> = Vec::new();
        for (v, label) in labels.iter().enumerate() {
            let b = *index.entry(label.clone()).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(v);
        }
        Partition::new(blocks, labels.len()).expect("labels cover every node")
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            blocks: (0..n).map(|v| vec![v]).collect(),
            assignment: (0..n).collect(),
        }
    }

    pub fn whole(n: usize) -> Self {
        if n == 0 {
            return Partition {
                blocks: Vec::new(),
                assignment: Vec::new(),
            };
        }
        Partition {
            blocks: vec![(0..n).collect()],
            assignment: vec![0; n],
        }
    }

    /// The two-block split `{drivers, rest}` (one block if every node drives).
    pub fn driver_split(n: usize, drivers: &[NodeId]) -> Result<Self> {
        let mut is_driver = vec![false; n];
        for &d in drivers {
            if d >= n {
                return Err(Error::InvalidPartition(format!(
                    "driver {d} out of range for {n} nodes"
                )));
            }
            is_driver[d] = true;
        }
        let (d, rest): (Vec<_>, Vec<_>) = (0..n).partition(|&v| is_driver[v]);
        let blocks = [d, rest].into_iter().filter(|b| !b.is_empty()).collect();
        Partition::new(blocks, n)
    }

    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &[NodeId] {
        &self.blocks[b]
    }

    pub fn block_of(&self, v: NodeId) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// True if every block of `self` lies inside one block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.n_nodes() != coarser.n_nodes() {
            return false;
        }
        self.blocks.iter().all(|block| {
            let target = coarser.block_of(block[0]);
            block.iter().all(|&v| coarser.block_of(v) == target)
        })
    }

    /// Blocks ordered by lowest member.
    pub fn canonical(&self) -> Partition {
        let mut blocks = self.blocks.clone();
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition::new(blocks, self.n_nodes()).expect("reordering keeps validity")
    }

    /// Stable reorder putting blocks that contain a driver first.
    pub fn drivers_first(&self, is_driver: &[bool]) -> Partition {
        let (mut first, rest): (Vec<_>, Vec<_>) = self
            .blocks
            .iter()
            .cloned()
            .partition(|b| b.iter().any(|&v| is_driver[v]));
        first.extend(rest);
        Partition::new(first, self.n_nodes()).expect("reordering keeps validity")
    }

    /// Same blocks, irrespective of block order.
    pub fn same_blocks(&self, other: &Partition) -> bool {
        self.canonical() == other.canonical()
    }

    /// Merges blocks `a` and `b`; the merged block takes the place of `a`.
    pub fn merge(&self, a: usize, b: usize) -> Partition {
        assert_ne!(a, b);
        let mut blocks = self.blocks.clone();
        let moved = std::mem::take(&mut blocks[b]);
        blocks[a].extend(moved);
        blocks.remove(b);
        Partition::new(blocks, self.n_nodes()).expect("merge keeps validity")
    }
}

/// Starting point for refinement: an explicit partition, or the split of
/// driver nodes from the rest once the drivers are known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialPartition {
    Explicit(Partition),
    DriversSplit,
}

impl InitialPartition {
    pub fn resolve(&self, n: usize, drivers: &[NodeId]) -> Result<Partition> {
        match self {
            InitialPartition::Explicit(p) if p.n_nodes() == n => Ok(p.clone()),
            InitialPartition::Explicit(p) => Err(Error::InvalidPartition(format!(
                "partition covers {} nodes, network has {n}",
                p.n_nodes()
            ))),
            InitialPartition::DriversSplit => Partition::driver_split(n, drivers),
        }
    }
}
