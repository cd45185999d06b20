//! Minimum driver sets via maximum matching (structural controllability).
//!
//! Each directed edge `j -> i` becomes a bipartite edge from the left copy of
//! `j` to the right copy of `i`. Nodes whose right copy is left unmatched by
//! a maximum matching need their own input; if the matching is perfect a
//! single driver still has to be chosen.

use std::collections::VecDeque;

use crate::error::Result;
use crate::input::InputStructure;
use crate::matrix::{NodeId, SparseMatrix};
use crate::weight::Weight;

/// A bipartite matching between out-endpoints (left) and in-endpoints (right).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    left_to_right: Vec<Option<NodeId>>,
    right_to_left: Vec<Option<NodeId>>,
    size: usize,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.size
    }

    /// `(left, right)` pairs ordered by left endpoint.
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.left_to_right
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| (u, v)))
            .collect()
    }

    pub fn partner_of_right(&self, v: NodeId) -> Option<NodeId> {
        self.right_to_left[v]
    }

    pub fn unmatched_right(&self) -> Vec<NodeId> {
        (0..self.right_to_left.len())
            .filter(|&v| self.right_to_left[v].is_none())
            .collect()
    }

    /// Checks that every pair is an edge and no endpoint is used twice.
    pub fn is_valid<W: Weight>(&self, a: &SparseMatrix<W>) -> bool {
        let mut used_right = vec![false; a.n_rows()];
        let mut count = 0;
        for (u, v) in self.pairs() {
            if a.get(v, u).is_none() || used_right[v] || self.right_to_left[v] != Some(u) {
                return false;
            }
            used_right[v] = true;
            count += 1;
        }
        count == self.size
    }

    /// Berge's criterion: searches for an augmenting path from any free left
    /// vertex. Returns true when none exists.
    pub fn is_maximum<W: Weight>(&self, a: &SparseMatrix<W>) -> bool {
        let n = a.n_cols();
        let mut seen_left = vec![false; n];
        let mut queue: VecDeque<NodeId> = (0..n)
            .filter(|&u| self.left_to_right[u].is_none())
            .collect();
        for &u in &queue {
            seen_left[u] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &v in a.col_indices(u) {
                match self.right_to_left[v] {
                    None => return false,
                    Some(w) if !seen_left[w] => {
                        seen_left[w] = true;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        true
    }
}

/// Hopcroft–Karp on the bipartite split of a square matrix.
///
/// Left vertices and their adjacency are scanned in ascending order, so the
/// result is deterministic.
pub fn maximum_matching<W: Weight>(a: &SparseMatrix<W>) -> Matching {
    assert!(a.is_square(), "matching needs a square adjacency matrix");
    let n = a.n_rows();
    let mut left_to_right: Vec<Option<NodeId>> = vec![None; n];
    let mut right_to_left: Vec<Option<NodeId>> = vec![None; n];
    let mut size = 0usize;

    const INF: usize = usize::MAX;
    let mut dist = vec![INF; n];
    let mut next = vec![0usize; n];
    let mut queue = VecDeque::new();
    let mut stack: Vec<NodeId> = Vec::new();

    loop {
        // layer the graph from all free left vertices
        queue.clear();
        for u in 0..n {
            if left_to_right[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut reachable_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in a.col_indices(u) {
                match right_to_left[v] {
                    None => reachable_free = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !reachable_free {
            break;
        }

        next.iter_mut().for_each(|x| *x = 0);
        for root in 0..n {
            if left_to_right[root].is_some() {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&u) = stack.last() {
                let adj = a.col_indices(u);
                if next[u] == adj.len() {
                    dist[u] = INF;
                    stack.pop();
                    if let Some(&p) = stack.last() {
                        next[p] += 1;
                    }
                    continue;
                }
                let v = adj[next[u]];
                match right_to_left[v] {
                    None => {
                        for &x in &stack {
                            let vx = a.col_indices(x)[next[x]];
                            left_to_right[x] = Some(vx);
                            right_to_left[vx] = Some(x);
                        }
                        size += 1;
                        break;
                    }
                    Some(w) if dist[w] != INF && dist[w] == dist[u] + 1 => stack.push(w),
                    Some(_) => next[u] += 1,
                }
            }
        }
    }

    Matching {
        left_to_right,
        right_to_left,
        size,
    }
}

/// Right-unmatched nodes of [`maximum_matching`], or the lowest-index node
/// when the matching is perfect. Always `max(N - |matching|, 1)` nodes for
/// `N >= 1`.
pub fn minimum_driver_nodes<W: Weight>(a: &SparseMatrix<W>) -> Vec<NodeId> {
    if a.n_rows() == 0 {
        return Vec::new();
    }
    let matching = maximum_matching(a);
    let unmatched = matching.unmatched_right();
    if unmatched.is_empty() {
        vec![0]
    } else {
        unmatched
    }
}

/// [`minimum_driver_nodes`] with uniform bounds `[lo, hi]` on every control.
pub fn minimum_driver_set<W: Weight>(
    a: &SparseMatrix<W>,
    lo: f64,
    hi: f64,
) -> Result<InputStructure> {
    InputStructure::uniform(minimum_driver_nodes(a), lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SparseMatrix<f64> {
        // edge (src, dst) sets A[dst][src]
        SparseMatrix::from_triplets(n, n, edges.iter().map(|&(s, d)| (d, s, 1.0))).unwrap()
    }

    #[test]
    fn chain() {
        let a = graph(3, &[(0, 1), (1, 2)]);
        let m = maximum_matching(&a);
        assert_eq!(m.size(), 2);
        assert_eq!(m.pairs(), vec![(0, 1), (1, 2)]);
        assert!(m.is_valid(&a) && m.is_maximum(&a));
        assert_eq!(minimum_driver_nodes(&a), vec![0]);
    }

    #[test]
    fn edgeless() {
        let a = graph(4, &[]);
        assert_eq!(maximum_matching(&a).size(), 0);
        assert_eq!(minimum_driver_nodes(&a), vec![0, 1, 2, 3]);
    }

    #[test]
    fn cycle_is_perfect() {
        let a = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(maximum_matching(&a).size(), 3);
        assert_eq!(minimum_driver_nodes(&a), vec![0]);
    }

    #[test]
    fn running_example() {
        let a = graph(3, &[(0, 1), (0, 2), (1, 0), (2, 0)]);
        let m = maximum_matching(&a);
        assert_eq!(m.size(), 2);
        assert!(m.is_maximum(&a));
        assert_eq!(minimum_driver_nodes(&a).len(), 1);
    }

    #[test]
    fn star_needs_augmentation() {
        // greedy would match 0->1 then fail 2->1; augmenting path fixes it
        let a = graph(4, &[(0, 1), (0, 3), (2, 1)]);
        let m = maximum_matching(&a);
        assert_eq!(m.size(), 2);
        assert!(m.is_valid(&a) && m.is_maximum(&a));
    }

    #[test]
    fn default_bounds() {
        let a = graph(3, &[(0, 1), (1, 2)]);
        let input = minimum_driver_set(&a, 0.0, 1.0).unwrap();
        assert_eq!(input.drivers(), &[0]);
        assert_eq!((input.lo(), input.hi()), (&[0.0][..], &[1.0][..]));
    }
}
