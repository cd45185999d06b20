//! Control-equivalence lumping of linear networks with box-constrained inputs.
//!
//! A partition of the nodes is a control equivalence when summing the
//! states inside each block gives an autonomous linear system again. The
//! crate finds the coarsest such partition that refines a given one,
//! builds the reduced system and checks the reduction numerically.

pub mod drivers;
pub mod equivalence;
pub mod error;
pub mod gen;
pub mod input;
pub mod io;
pub mod lump;
pub mod matrix;
pub mod partition;
pub mod refine;
pub mod report;
pub mod signal;
pub mod sim;
pub mod weight;

pub use drivers::{maximum_matching, minimum_driver_nodes, minimum_driver_set, Matching};
pub use equivalence::{
    build_aggregation, is_control_equivalence, AggregationPair, EquivalenceCheck, Witness,
};
pub use error::{Error, ErrorKind, Result};
pub use input::InputStructure;
pub use lump::{
    build_reduced_system, lift_control, project_control, project_state, LumpOptions, ReducedMatrix,
    ReducedSystem,
};
pub use matrix::{DenseMatrix, NodeId, SparseMatrix};
pub use partition::{InitialPartition, Partition};
pub use refine::{
    coarsest_control_equivalence, coarsest_control_equivalence_with, reduce_pipeline,
    ReduceOptions, Refinement,
};
pub use signal::ControlSignal;
pub use sim::{
    evaluate_cost, integrate, optimal_bangbang_value, verify_trajectory_equivalence,
    ControlledSystem, CostSpec, Direction, Observer, OptimalValueResult, Trajectory,
};
pub use weight::{Rational, Weight};
