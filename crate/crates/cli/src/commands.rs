use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ctrleq::equivalence::default_tolerance;
use ctrleq::gen::{
    planted_network, random_control, random_digraph, random_vector, seeded, stabilize, PlantedSpec,
    TestRng,
};
use ctrleq::io::{
    parse_drivers, parse_network, parse_partition, read_control_csv, read_reduced_system,
    read_vector, reduced_system_to_json, write_control_csv, write_reduced_system, write_report,
    write_trajectory_csv, NodeLabels, ParseOptions, ParsedNetwork,
};
use ctrleq::report::{manifest_from_dir, read_manifest, run_report, thread_limit};
use ctrleq::sim::{evaluate_cost, integrate, Observer};
use ctrleq::{
    build_reduced_system, is_control_equivalence, lift_control, minimum_driver_set,
    optimal_bangbang_value, project_state, reduce_pipeline, verify_trajectory_equivalence,
    ControlSignal, ControlledSystem, CostSpec, Direction, Error, InitialPartition, InputStructure,
    LumpOptions, Partition, Rational, ReduceOptions, ReducedSystem, Result, SparseMatrix, Weight,
};
use log::info;

use crate::{
    DriversCmd, InputArgs, NetworkArgs, OptimalCmd, ReduceCmd, ReportCmd, SimArgs, SimulateCmd,
    SystemKind, VerifyCmd,
};

fn stdout_error(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn emit(text: &str) -> Result<()> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(stdout_error)
}

fn load_network<W: Weight>(net: &NetworkArgs) -> Result<ParsedNetwork<W>> {
    let t = Instant::now();
    let parsed = parse_network(
        &net.network,
        ParseOptions {
            format: net.format,
            symmetrize: net.symmetrize,
        },
    )?;
    info!(
        "parsed {}: {} nodes, {} edges in {:.1} ms",
        net.network.display(),
        parsed.labels.len(),
        parsed.matrix.nnz(),
        t.elapsed().as_secs_f64() * 1e3
    );
    Ok(parsed)
}

fn load_input<W: Weight>(args: &InputArgs, net: &ParsedNetwork<W>) -> Result<InputStructure> {
    let (lo, hi) = args.bounds;
    match &args.drivers {
        Some(path) => parse_drivers(path, &net.labels, lo, hi),
        None => minimum_driver_set(&net.matrix, lo, hi),
    }
}

fn labelled(ids: &[usize], labels: &NodeLabels) -> String {
    ids.iter()
        .map(|&v| labels.name(v))
        .collect::<Vec<_>>()
        .join(" ")
}

fn partition_text(p: &Partition, labels: &NodeLabels) -> String {
    p.blocks()
        .iter()
        .map(|b| labelled(b, labels) + "\n")
        .collect()
}

pub fn drivers(cmd: DriversCmd) -> Result<()> {
    let net = load_network::<f64>(&cmd.net)?;
    let (lo, hi) = cmd.bounds;
    let input = minimum_driver_set(&net.matrix, lo, hi)?;
    let mut out = format!("# K={}\n", input.k());
    for &d in input.drivers() {
        out.push_str(&format!("{} {lo} {hi}\n", net.labels.name(d)));
    }
    emit(&out)
}

pub fn reduce(cmd: ReduceCmd) -> Result<()> {
    if cmd.exact {
        reduce_with(load_network::<Rational>(&cmd.net)?, &cmd)
    } else {
        reduce_with(load_network::<f64>(&cmd.net)?, &cmd)
    }
}

fn reduce_with<W: Weight>(net: ParsedNetwork<W>, cmd: &ReduceCmd) -> Result<()> {
    let input = load_input(&cmd.input, &net)?;
    let initial = match &cmd.initial {
        Some(path) => parse_partition(path, &net.labels)?,
        None => InitialPartition::DriversSplit,
    };
    let options = ReduceOptions {
        tol: cmd.tol,
        ..Default::default()
    };
    let t = Instant::now();
    let (partition, reduced) = reduce_pipeline(&net.matrix, &input, &initial, &options)?;
    let summary = format!(
        "N={} n={} K={} k={}",
        reduced.n_original(),
        reduced.n(),
        input.k(),
        reduced.k()
    );
    info!("{summary} in {:.1} ms", t.elapsed().as_secs_f64() * 1e3);

    if let Some(path) = &cmd.partition_out {
        std::fs::write(path, partition_text(&partition, &net.labels)).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    match &cmd.out {
        Some(path) => {
            write_reduced_system(&reduced, &net.labels, path)?;
            emit(&format!("{summary}\n"))
        }
        None => {
            let mut text =
                serde_json::to_string_pretty(&reduced_system_to_json(&reduced, &net.labels)?)?;
            text.push('\n');
            emit(&text)
        }
    }
}

struct Case {
    name: String,
    a: SparseMatrix<f64>,
    input: InputStructure,
    partition: Partition,
}

fn random_cases(cmd: &VerifyCmd, rng: &mut TestRng) -> Result<Vec<Case>> {
    let (lo, hi) = cmd.input.bounds;
    (0..cmd.instances)
        .map(|i| {
            let a = if cmd.planted {
                let spec = PlantedSpec {
                    blocks: (cmd.nodes / 3).max(1),
                    max_block: 4,
                    quotient_degree: 3,
                    max_weight: 3,
                };
                planted_network(rng, spec).0
            } else {
                random_digraph(rng, cmd.nodes, cmd.edges, 3)
            };
            let a = stabilize(&a);
            let input = minimum_driver_set(&a, lo, hi)?;
            let (partition, _) = reduce_pipeline(
                &a,
                &input,
                &InitialPartition::DriversSplit,
                &ReduceOptions::default(),
            )?;
            Ok(Case {
                name: format!("instance {i}"),
                a,
                input,
                partition,
            })
        })
        .collect()
}

fn file_case(cmd: &VerifyCmd, path: &Path) -> Result<Case> {
    let net = load_network::<f64>(&NetworkArgs {
        network: path.to_path_buf(),
        format: cmd.format,
        symmetrize: cmd.symmetrize,
    })?;
    let input = load_input(&cmd.input, &net)?;
    let partition = match (&cmd.partition, &cmd.initial) {
        (Some(p), _) => {
            parse_partition(p, &net.labels)?.resolve(net.labels.len(), input.drivers())?
        }
        (None, initial) => {
            let initial = match initial {
                Some(p) => parse_partition(p, &net.labels)?,
                None => InitialPartition::DriversSplit,
            };
            reduce_pipeline(&net.matrix, &input, &initial, &ReduceOptions::default())?.0
        }
    };
    Ok(Case {
        name: path.display().to_string(),
        a: net.matrix,
        input,
        partition,
    })
}

fn control_steps(t_end: f64, control_dt: f64) -> Result<usize> {
    let steps = (t_end / control_dt).round();
    if !control_dt.is_finite()
        || control_dt <= 0.0
        || steps < 1.0
        || (steps * control_dt - t_end).abs() > 1e-9 * t_end.max(1.0)
    {
        return Err(Error::GridMismatch(format!(
            "T = {t_end} is not a multiple of the control step {control_dt}"
        )));
    }
    Ok(steps as usize)
}

pub fn verify(cmd: VerifyCmd) -> Result<()> {
    let mut rng = seeded(cmd.seed);
    let cases = match &cmd.network {
        Some(path) => vec![file_case(&cmd, path)?],
        None => random_cases(&cmd, &mut rng)?,
    };
    let steps = control_steps(cmd.t_end, cmd.control_dt)?;
    let mut failed = 0;
    for case in &cases {
        let check = is_control_equivalence(&case.a, &case.partition, default_tolerance(&case.a))?;
        let lump = LumpOptions {
            tol: None,
            allow_non_equivalence: true,
        };
        let r = build_reduced_system(&case.a, &case.input, &case.partition, &lump)?;
        let sys = ControlledSystem::original(&case.a, &case.input)?;
        let mut deviation: f64 = 0.0;
        for _ in 0..cmd.controls {
            let u = random_control(
                &mut rng,
                cmd.control_dt,
                steps,
                case.input.lo(),
                case.input.hi(),
            );
            let x0 = random_vector(&mut rng, case.a.n_rows(), -1.0, 1.0);
            deviation = deviation.max(verify_trajectory_equivalence(
                &sys, &r, &u, &x0, cmd.t_end, cmd.dt,
            )?);
        }
        let mut line = format!(
            "{}: N={} n={} K={} k={} equivalence={} trajectory_deviation={deviation:.3e}",
            case.name,
            r.n_original(),
            r.n(),
            case.input.k(),
            r.k(),
            if check.holds { "yes" } else { "no" },
        );
        let mut worst = deviation;
        if cmd.optimal {
            let c_hat = random_vector(&mut rng, r.n(), -1.0, 1.0);
            let c = CostSpec::linear(c_hat.clone()).node_coeffs(&r);
            let x0 = random_vector(&mut rng, case.a.n_rows(), -1.0, 1.0);
            let x0_hat = project_state(&x0, &r.blocks);
            let reduced = ControlledSystem::reduced(&r);
            for dir in [Direction::Sup, Direction::Inf] {
                let (lo, hi) = (case.input.lo(), case.input.hi());
                let v =
                    optimal_bangbang_value(&sys, lo, hi, &c, &x0, cmd.t_end, cmd.dt, dir)?.value;
                let v_hat = optimal_bangbang_value(
                    &reduced, &r.lo, &r.hi, &c_hat, &x0_hat, cmd.t_end, cmd.dt, dir,
                )?
                .value;
                let diff = (v - v_hat).abs();
                worst = worst.max(diff);
                line.push_str(&format!(" {dir}_gap={diff:.3e}"));
            }
        }
        let ok = check.holds && worst <= cmd.threshold;
        failed += usize::from(!ok);
        emit(&format!("{} {line}\n", if ok { "PASS" } else { "FAIL" }))?;
    }
    if failed > 0 {
        return Err(Error::Verification(format!(
            "{failed} of {} cases failed",
            cases.len()
        )));
    }
    Ok(())
}

/// Network, the input it is driven through, and the reduced system when
/// one is needed.
struct Setup {
    net: ParsedNetwork<f64>,
    input: InputStructure,
    reduced: Option<ReducedSystem>,
}

fn setup(args: &SimArgs, need_reduced: bool) -> Result<Setup> {
    let net = load_network::<f64>(&args.net)?;
    if let Some(path) = &args.reduced {
        let reduced = read_reduced_system(path, &net.labels)?;
        return Ok(Setup {
            net,
            input: reduced.input.clone(),
            reduced: Some(reduced),
        });
    }
    let input = load_input(&args.input, &net)?;
    let reduced = if need_reduced {
        let options = ReduceOptions::default();
        Some(
            reduce_pipeline(
                &net.matrix,
                &input,
                &InitialPartition::DriversSplit,
                &options,
            )?
            .1,
        )
    } else {
        None
    };
    Ok(Setup {
        net,
        input,
        reduced,
    })
}

fn read_cost(path: &Path) -> Result<CostSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Initial state of dimension `dim`; a vector of the original dimension is
/// projected when `reduced` is given.
fn initial_state(
    path: Option<&Path>,
    dim: usize,
    reduced: Option<&ReducedSystem>,
) -> Result<Vec<f64>> {
    let Some(path) = path else {
        return Ok(vec![0.0; dim]);
    };
    let x0 = read_vector(path)?;
    match reduced {
        _ if x0.len() == dim => Ok(x0),
        Some(r) if x0.len() == r.n_original() => Ok(project_state(&x0, &r.blocks)),
        _ => Err(Error::DimensionMismatch {
            expected: dim,
            found: x0.len(),
            context: "initial state",
        }),
    }
}

fn format_vec(x: &[f64]) -> String {
    x.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn simulate(cmd: SimulateCmd) -> Result<()> {
    let args = &cmd.sim;
    let reduced_run = cmd.system == SystemKind::Reduced;
    let s = setup(args, reduced_run || args.cost.is_some())?;
    let (sys, lo, hi) = match (&s.reduced, reduced_run) {
        (Some(r), true) => (ControlledSystem::reduced(r), r.lo.clone(), r.hi.clone()),
        _ => (
            ControlledSystem::original(&s.net.matrix, &s.input)?,
            s.input.lo().to_vec(),
            s.input.hi().to_vec(),
        ),
    };
    let x0 = initial_state(
        args.x0.as_deref(),
        sys.dim(),
        s.reduced.as_ref().filter(|_| reduced_run),
    )?;
    let u = match &cmd.control {
        Some(path) => read_control_csv(path, &lo, &hi, cmd.control_dt)?,
        None => {
            let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
            ControlSignal::constant(args.t_end, 1, &mid, lo, hi)?
        }
    };
    let traj = integrate(&sys, &u, &x0, args.t_end, args.dt)?;
    let mut out = format!(
        "system={} dim={} steps={}\nx_T={}\n",
        if reduced_run { "reduced" } else { "original" },
        sys.dim(),
        traj.steps(),
        format_vec(traj.final_state())
    );
    if let (Some(path), Some(r)) = (&args.cost, &s.reduced) {
        let spec = read_cost(path)?;
        let observer = if reduced_run {
            Observer::Reduced
        } else {
            Observer::Original(r)
        };
        out.push_str(&format!(
            "J={}\n",
            evaluate_cost(&traj, &u, &spec, observer)?
        ));
    }
    if let Some(path) = &args.out {
        write_trajectory_csv(&traj, path)?;
    }
    emit(&out)
}

pub fn optimal(cmd: OptimalCmd) -> Result<()> {
    let args = &cmd.sim;
    let cost_path = args
        .cost
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("optimal needs --cost".into()))?;
    let spec = read_cost(cost_path)?;
    if spec.tracking.is_some() || spec.control_weight.is_some_and(|w| w != 0.0) {
        return Err(Error::InvalidInput(
            "optimal supports linear final costs only".into(),
        ));
    }
    let s = setup(args, true)?;
    let r = s.reduced.as_ref().expect("reduced system requested");
    if spec.final_coeffs.len() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            found: spec.final_coeffs.len(),
            context: "final cost coefficients",
        });
    }
    let n = r.n_original();
    let x0 = initial_state(args.x0.as_deref(), n, None)?;
    let x0_hat = project_state(&x0, &r.blocks);
    let c = spec.node_coeffs(r);
    let (t_end, dt) = (args.t_end, args.dt);

    let sys = ControlledSystem::original(&s.net.matrix, &s.input)?;
    let full = optimal_bangbang_value(
        &sys,
        s.input.lo(),
        s.input.hi(),
        &c,
        &x0,
        t_end,
        dt,
        cmd.direction,
    )?;
    let reduced = ControlledSystem::reduced(r);
    let lumped = optimal_bangbang_value(
        &reduced,
        &r.lo,
        &r.hi,
        &spec.final_coeffs,
        &x0_hat,
        t_end,
        dt,
        cmd.direction,
    )?;

    let lifted = lift_control(&lumped.control, r)?;
    let lifted_traj = integrate(&sys, &lifted, &x0, t_end, dt)?;
    let lifted_value: f64 = c
        .iter()
        .zip(lifted_traj.final_state())
        .map(|(a, b)| a * b)
        .sum();

    let gap = (full.value - lumped.value).abs();
    emit(&format!(
        "direction={}\nV={}\nV_hat={}\nV_lifted={}\ngap={gap:e}\n",
        cmd.direction, full.value, lumped.value, lifted_value
    ))?;
    if let Some(path) = &cmd.control_out {
        write_control_csv(&full.control, path)?;
    }
    if let Some(path) = &args.out {
        write_trajectory_csv(&integrate(&sys, &full.control, &x0, t_end, dt)?, path)?;
    }
    match cmd.check {
        Some(tol) if gap > tol => Err(Error::Verification(format!(
            "|V - V_hat| = {gap:e} exceeds {tol:e}"
        ))),
        _ => Ok(()),
    }
}

pub fn report(cmd: ReportCmd) -> Result<()> {
    let entries = if cmd.source.is_dir() {
        manifest_from_dir(&cmd.source)?
    } else {
        read_manifest(&cmd.source)?
    };
    let rows = run_report(&entries, cmd.threads.or_else(thread_limit));
    for row in &rows {
        let t = row.times;
        info!(
            "{}: parse {:.1} ms, drivers {:.1} ms, refine {:.1} ms, lump {:.1} ms",
            row.name, t.parse_ms, t.drivers_ms, t.refine_ms, t.lump_ms
        );
    }
    match &cmd.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            write_report(&rows, file)
        }
        None => write_report(&rows, std::io::stdout().lock()),
    }
}
