mod common;

use ctrleq::gen::{random_control, random_vector, seeded};
use ctrleq::sim::{evaluate_cost, integrate, Observer};
use ctrleq::{
    build_reduced_system, optimal_bangbang_value, verify_trajectory_equivalence, ControlSignal,
    ControlledSystem, CostSpec, Direction, InputStructure, LumpOptions, Partition, SparseMatrix,
};

use common::{dense_rk4, fig1};

fn fig1_input() -> InputStructure {
    InputStructure::new(vec![1, 2], vec![1.0, 3.0], vec![2.0, 4.0]).unwrap()
}

fn fig1_reduced() -> ctrleq::ReducedSystem {
    let p = Partition::new(vec![vec![1, 2], vec![0]], 3).unwrap();
    build_reduced_system(&fig1(), &fig1_input(), &p, &LumpOptions::default()).unwrap()
}

#[test]
fn constant_forcing_without_dynamics() {
    let sys = ControlledSystem::new(SparseMatrix::zeros(3, 3), vec![0, 1, 2]).unwrap();
    let u =
        ControlSignal::constant(0.5, 6, &[1.0, -2.0, 0.25], vec![-2.0; 3], vec![2.0; 3]).unwrap();
    let traj = integrate(&sys, &u, &[1.0, 1.0, 1.0], 3.0, 0.01).unwrap();
    let want = [4.0, -5.0, 1.75];
    for (x, w) in traj.final_state().iter().zip(want) {
        assert!((x - w).abs() <= 1e-12);
    }
    assert_eq!(traj.states.len(), 301);
}

#[test]
fn running_example_self_convergence() {
    let u =
        ControlSignal::constant(1e-3, 1000, &[1.5, 3.5], vec![1.0, 3.0], vec![2.0, 4.0]).unwrap();
    let sys = ControlledSystem::original(&fig1(), &fig1_input()).unwrap();
    let coarse = integrate(&sys, &u, &[1.0, 1.0, 1.0], 1.0, 1e-3).unwrap();
    let fine = dense_rk4(
        &fig1().to_dense(),
        &[1, 2],
        &[1.5, 3.5],
        &[1.0, 1.0, 1.0],
        1.0,
        1e-4,
    );
    for (x, y) in coarse.final_state().iter().zip(&fine) {
        assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
    }
}

#[test]
fn running_example_trajectories_agree() {
    let r = fig1_reduced();
    let sys = ControlledSystem::original(&fig1(), &fig1_input()).unwrap();
    let mut rng = seeded(12);
    for _ in 0..5 {
        let u = random_control(&mut rng, 0.5, 20, &[1.0, 3.0], &[2.0, 4.0]);
        let x0 = random_vector(&mut rng, 3, -1.0, 1.0);
        let dev = verify_trajectory_equivalence(&sys, &r, &u, &x0, 10.0, 1e-3).unwrap();
        // relative to the state size, which grows like e^{0.6 t}
        assert!(dev <= 1e-7 * 1e3, "{dev}");
    }
}

#[test]
fn running_example_final_cost() {
    let r = fig1_reduced();
    let sys = ControlledSystem::original(&fig1(), &fig1_input()).unwrap();
    let u = ControlSignal::constant(0.1, 10, &[1.5, 3.5], vec![1.0, 3.0], vec![2.0, 4.0]).unwrap();
    let traj = integrate(&sys, &u, &[0.3, 0.1, 0.2], 1.0, 0.01).unwrap();
    let spec = CostSpec::linear(vec![1.0, 0.0]);
    let j = evaluate_cost(&traj, &u, &spec, Observer::Original(&r)).unwrap();
    let x = traj.final_state();
    assert_eq!(j, x[1] + x[2]);

    let sys_hat = ControlledSystem::reduced(&r);
    let u_hat = ctrleq::project_control(&u, &r).unwrap();
    let traj_hat = integrate(&sys_hat, &u_hat, &[0.3, 0.3], 1.0, 0.01).unwrap();
    let j_hat = evaluate_cost(&traj_hat, &u_hat, &spec, Observer::Reduced).unwrap();
    assert!((j - j_hat).abs() <= 1e-12);
}

#[test]
fn scalar_integrator_values() {
    let sys = ControlledSystem::new(SparseMatrix::zeros(1, 1), vec![0]).unwrap();
    let sup = optimal_bangbang_value(
        &sys,
        &[0.0],
        &[1.0],
        &[1.0],
        &[0.0],
        1.0,
        1e-3,
        Direction::Sup,
    )
    .unwrap();
    let inf = optimal_bangbang_value(
        &sys,
        &[0.0],
        &[1.0],
        &[1.0],
        &[0.0],
        1.0,
        1e-3,
        Direction::Inf,
    )
    .unwrap();
    assert!((sup.value - 1.0).abs() <= 1e-12);
    assert!(inf.value.abs() <= 1e-12);
    assert!(sup.control.samples().iter().all(|s| s == &[1.0]));
    assert!(inf.control.samples().iter().all(|s| s == &[0.0]));
    assert_eq!(sup.adjoint.len(), 1001);
}

#[test]
fn running_example_optimal_values() {
    let r = fig1_reduced();
    let sys = ControlledSystem::original(&fig1(), &fig1_input()).unwrap();
    let sys_hat = ControlledSystem::reduced(&r);
    let x0 = [0.2, 0.5, -0.4];
    let x0_hat = ctrleq::project_state(&x0, &r.blocks);
    for dir in [Direction::Sup, Direction::Inf] {
        let v = optimal_bangbang_value(
            &sys,
            &[1.0, 3.0],
            &[2.0, 4.0],
            &[0.0, 1.0, 1.0],
            &x0,
            2.0,
            1e-3,
            dir,
        )
        .unwrap();
        let v_hat = optimal_bangbang_value(
            &sys_hat,
            &[4.0],
            &[6.0],
            &[1.0, 0.0],
            &x0_hat,
            2.0,
            1e-3,
            dir,
        )
        .unwrap();
        assert!(
            (v.value - v_hat.value).abs() <= 1e-6,
            "{dir}: {} vs {}",
            v.value,
            v_hat.value
        );
    }
}

#[test]
fn fixed_controls_leave_no_freedom() {
    let sys = ControlledSystem::original(&fig1(), &fig1_input()).unwrap();
    let c = [0.5, -1.0, 2.0];
    let x0 = [1.0, 0.0, 0.5];
    let v = optimal_bangbang_value(
        &sys,
        &[1.5, 3.5],
        &[1.5, 3.5],
        &c,
        &x0,
        1.0,
        1e-2,
        Direction::Sup,
    )
    .unwrap();
    let u =
        ControlSignal::constant(1e-2, 100, &[1.5, 3.5], vec![1.5, 3.5], vec![1.5, 3.5]).unwrap();
    let x = integrate(&sys, &u, &x0, 1.0, 1e-2).unwrap();
    let direct: f64 = c.iter().zip(x.final_state()).map(|(a, b)| a * b).sum();
    assert_eq!(v.value, direct);
    let w = optimal_bangbang_value(
        &sys,
        &[1.5, 3.5],
        &[1.5, 3.5],
        &c,
        &x0,
        1.0,
        1e-2,
        Direction::Inf,
    )
    .unwrap();
    assert_eq!(w.value, direct);
}

#[test]
fn optimum_dominates_random_controls() {
    let a = ctrleq::gen::stabilize(&ctrleq::gen::random_digraph(&mut seeded(4), 12, 40, 3));
    let input = InputStructure::uniform(vec![0, 3, 7], -1.0, 1.0).unwrap();
    let sys = ControlledSystem::original(&a, &input).unwrap();
    let mut rng = seeded(5);
    let c = random_vector(&mut rng, 12, -1.0, 1.0);
    let x0 = random_vector(&mut rng, 12, -1.0, 1.0);
    let (t_end, dt) = (3.0, 1e-2);
    let sup = optimal_bangbang_value(
        &sys,
        input.lo(),
        input.hi(),
        &c,
        &x0,
        t_end,
        dt,
        Direction::Sup,
    )
    .unwrap();
    let inf = optimal_bangbang_value(
        &sys,
        input.lo(),
        input.hi(),
        &c,
        &x0,
        t_end,
        dt,
        Direction::Inf,
    )
    .unwrap();
    for _ in 0..30 {
        let u = random_control(&mut rng, dt, 300, input.lo(), input.hi());
        let x = integrate(&sys, &u, &x0, t_end, dt).unwrap();
        let j: f64 = c.iter().zip(x.final_state()).map(|(a, b)| a * b).sum();
        assert!(inf.value - 1e-12 <= j && j <= sup.value + 1e-12);
    }
}
