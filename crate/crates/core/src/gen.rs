//! Seeded random test instances.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::SparseMatrix;
use crate::partition::Partition;
use crate::signal::ControlSignal;

pub type TestRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Digraph with up to `edges` distinct edges (self-loops allowed) and
/// integer weights in `1..=max_weight`.
pub fn random_digraph<R: Rng>(
    rng: &mut R,
    n: usize,
    edges: usize,
    max_weight: u32,
) -> SparseMatrix<f64> {
    let total = n * n;
    let picks = sample(rng, total, edges.min(total)).into_vec();
    SparseMatrix::from_triplets(
        n,
        n,
        picks
            .into_iter()
            .map(|e| (e / n, e % n, f64::from(rng.gen_range(1..=max_weight))))
            .collect::<Vec<_>>(),
    )
    .expect("indices in range")
}

/// Shape of a network with a planted control equivalence.
#[derive(Clone, Copy, Debug)]
pub struct PlantedSpec {
    pub blocks: usize,
    pub max_block: usize,
    /// Target blocks per source block in the quotient.
    pub quotient_degree: usize,
    pub max_weight: u32,
}

/// Network for which the returned partition is a control equivalence.
///
/// A random quotient assigns an integer weight `w(h, g)` to each block edge
/// `H_g → H_h`; every node of `H_g` then splits `w(h, g)` into positive
/// integer parts sent to random distinct nodes of `H_h`. Column sums into
/// each block are therefore constant on blocks while the individual edges
/// stay irregular.
pub fn planted_network<R: Rng>(rng: &mut R, spec: PlantedSpec) -> (SparseMatrix<f64>, Partition) {
    let sizes: Vec<usize> = (0..spec.blocks)
        .map(|_| rng.gen_range(1..=spec.max_block))
        .collect();
    let mut next = 0;
    let blocks: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&s| {
            next += s;
            (next - s..next).collect()
        })
        .collect();
    let n = next;
    let mut triplets = Vec::new();
    for g in 0..spec.blocks {
        let degree = spec.quotient_degree.min(spec.blocks);
        for h in sample(rng, spec.blocks, degree).into_vec() {
            let w = rng.gen_range(1..=spec.max_weight);
            for &j in &blocks[g] {
                let parts = rng.gen_range(1..=blocks[h].len().min(w as usize));
                let targets = sample(rng, blocks[h].len(), parts).into_vec();
                for (t, amount) in targets.into_iter().zip(composition(rng, w, parts)) {
                    triplets.push((blocks[h][t], j, f64::from(amount)));
                }
            }
        }
    }
    let a = SparseMatrix::from_triplets(n, n, triplets).expect("indices in range");
    let partition = Partition::new(blocks, n).expect("blocks cover 0..n");
    (a, partition)
}

/// `total` split into `parts` positive integers.
fn composition<R: Rng>(rng: &mut R, total: u32, parts: usize) -> Vec<u32> {
    let mut cuts: Vec<u32> = sample(rng, total as usize - 1, parts - 1)
        .into_iter()
        .map(|c| c as u32 + 1)
        .collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(parts);
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// `A − cI` with `c` the largest absolute column sum, so `A` is a Metzler
/// matrix with non-positive column sums and its flow is a contraction in
/// the 1-norm. A uniform diagonal shift leaves control equivalences intact.
pub fn stabilize(a: &SparseMatrix<f64>) -> SparseMatrix<f64> {
    let c = (0..a.n_cols())
        .map(|j| a.col(j).map(|(_, w)| w.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    a.shift_diagonal(-c)
}

/// Piecewise-constant control with samples uniform in each channel's box.
pub fn random_control<R: Rng>(
    rng: &mut R,
    dt: f64,
    steps: usize,
    lo: &[f64],
    hi: &[f64],
) -> ControlSignal {
    let values = (0..steps)
        .map(|_| {
            lo.iter()
                .zip(hi)
                .map(|(&l, &h)| if l < h { rng.gen_range(l..=h) } else { l })
                .collect()
        })
        .collect();
    ControlSignal::new(dt, values, lo.to_vec(), hi.to_vec()).expect("samples drawn inside bounds")
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}
