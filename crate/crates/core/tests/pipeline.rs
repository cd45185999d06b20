mod common;

use ctrleq::gen::{planted_network, seeded, PlantedSpec};
use ctrleq::{
    build_reduced_system, coarsest_control_equivalence, reduce_pipeline, Error, InitialPartition,
    InputStructure, LumpOptions, Partition, ReduceOptions, SparseMatrix,
};

use common::{fig1, is_ce_dense, to_q};

#[test]
fn running_example_pipeline() {
    let input = InputStructure::new(vec![1, 2], vec![1.0, 3.0], vec![2.0, 4.0]).unwrap();
    let (p, r) = reduce_pipeline(
        &fig1(),
        &input,
        &InitialPartition::DriversSplit,
        &ReduceOptions::default(),
    )
    .unwrap();
    assert_eq!(p.blocks(), &[vec![0], vec![1, 2]]);
    assert_eq!(r.blocks.blocks(), &[vec![1, 2], vec![0]]);
    assert_eq!(r.a_hat.to_rows(), vec![vec![0.0, 0.75], vec![0.5, 0.0]]);
    assert_eq!((r.lo.clone(), r.hi.clone()), (vec![4.0], vec![6.0]));
}

#[test]
fn complete_uniform_digraph_keeps_one_block() {
    let n = 6;
    let a = SparseMatrix::from_triplets(
        n,
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j, 1.0))),
    )
    .unwrap();
    let input = InputStructure::uniform((0..n).collect(), 0.0, 1.0).unwrap();
    let (p, r) = reduce_pipeline(
        &a,
        &input,
        &InitialPartition::DriversSplit,
        &ReduceOptions::default(),
    )
    .unwrap();
    assert_eq!(p, Partition::whole(n));
    assert!(is_ce_dense(&to_q(&a), p.blocks()));
    assert_eq!(r.a_hat.to_rows(), vec![vec![5.0]]);
    assert_eq!(r.hi, vec![6.0]);
}

#[test]
fn singleton_initial_gives_identity() {
    let (a, _) = planted_network(
        &mut seeded(3),
        PlantedSpec {
            blocks: 5,
            max_block: 3,
            quotient_degree: 2,
            max_weight: 3,
        },
    );
    let n = a.n_rows();
    let input = InputStructure::uniform(vec![0], 0.0, 1.0).unwrap();
    let initial = InitialPartition::Explicit(Partition::singletons(n));
    let (p, r) = reduce_pipeline(&a, &input, &initial, &ReduceOptions::default()).unwrap();
    assert_eq!(p, Partition::singletons(n));
    assert_eq!(r.n(), n);
    let dense = a.to_dense();
    for (h, block) in r.blocks.blocks().iter().enumerate() {
        for (g, other) in r.blocks.blocks().iter().enumerate() {
            assert_eq!(r.a_hat.get(h, g), dense[block[0]][other[0]]);
        }
    }
}

#[test]
fn twenty_node_exchange_identity() {
    let mut rng = seeded(20);
    let (a, planted) = loop {
        let (a, p) = planted_network(
            &mut rng,
            PlantedSpec {
                blocks: 7,
                max_block: 4,
                quotient_degree: 3,
                max_weight: 5,
            },
        );
        if a.n_rows() == 20 {
            break (a, p);
        }
    };
    assert!(is_ce_dense(&to_q(&a), planted.blocks()));
    let input = InputStructure::uniform(planted.block(0).to_vec(), 0.0, 1.0).unwrap();
    let r = build_reduced_system(&a, &input, &planted, &LumpOptions::default()).unwrap();
    let dense = a.to_dense();
    for (h, block) in r.blocks.blocks().iter().enumerate() {
        for j in 0..20 {
            let la: f64 = block.iter().map(|&i| dense[i][j]).sum();
            assert!((la - r.a_hat.get(h, r.blocks.block_of(j))).abs() <= 1e-12);
        }
    }
}

#[test]
fn zero_matrix_keeps_any_partition() {
    let a = SparseMatrix::<f64>::zeros(5, 5);
    let initial = Partition::new(vec![vec![0, 3], vec![1, 2, 4]], 5).unwrap();
    assert_eq!(coarsest_control_equivalence(&a, &initial).unwrap(), initial);
}

#[test]
fn non_equivalence_is_rejected_unless_allowed() {
    let input = InputStructure::new(vec![1, 2], vec![1.0, 3.0], vec![2.0, 4.0]).unwrap();
    let bad = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
    let err = build_reduced_system(&fig1(), &input, &bad, &LumpOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NotControlEquivalence { .. }));
    let forced = LumpOptions {
        tol: None,
        allow_non_equivalence: true,
    };
    let r = build_reduced_system(&fig1(), &input, &bad, &forced).unwrap();
    assert_eq!(r.k(), 2);
}

#[test]
fn mixed_driver_block_is_supported() {
    let input = InputStructure::uniform(vec![1], 0.0, 2.0).unwrap();
    let p = Partition::new(vec![vec![0], vec![1, 2]], 3).unwrap();
    let r = build_reduced_system(&fig1(), &input, &p, &LumpOptions::default()).unwrap();
    assert_eq!(r.blocks.blocks(), &[vec![1, 2], vec![0]]);
    assert_eq!(r.control_groups, vec![vec![0]]);
    assert_eq!((r.lo.clone(), r.hi.clone()), (vec![0.0], vec![2.0]));
}
