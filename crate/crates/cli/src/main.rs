//! `ctrleq`: driver sets, control-equivalence reduction, simulation and
//! reduction reports from the command line.
//!
//! Exit codes: 0 success, 1 validation error, 2 verification failure,
//! 3 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctrleq::io::Format;
use ctrleq::{Direction, ErrorKind};

#[derive(Parser, Debug)]
#[command(
    name = "ctrleq",
    version,
    about = "Control-equivalence reduction of linear network dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a minimum driver set in drivers-file format.
    Drivers(DriversCmd),
    /// Coarsest control equivalence and the reduced system as JSON.
    Reduce(ReduceCmd),
    /// Check trajectory (and optionally optimal value) agreement between a
    /// network and its reduction.
    Verify(VerifyCmd),
    /// Integrate the original or reduced system under a given control.
    Simulate(SimulateCmd),
    /// Bang-bang optimal value of a linear final cost on both systems.
    Optimal(OptimalCmd),
    /// Reduction table for a directory of networks or a manifest.
    Report(ReportCmd),
}

#[derive(Args, Debug, Clone)]
struct NetworkArgs {
    /// Edge list or Matrix Market file.
    network: PathBuf,
    /// Input format; detected from the extension or banner when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Add the reverse of every edge.
    #[arg(long)]
    symmetrize: bool,
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Driver file (`label` or `label lo hi` per line); a maximum matching
    /// picks the drivers when omitted.
    #[arg(long)]
    drivers: Option<PathBuf>,
    /// Control bounds for drivers without their own.
    #[arg(long, value_parser = parse_bounds, default_value = "0,1")]
    bounds: (f64, f64),
}

#[derive(Args, Debug)]
struct DriversCmd {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long, value_parser = parse_bounds, default_value = "0,1")]
    bounds: (f64, f64),
}

#[derive(Args, Debug)]
struct ReduceCmd {
    #[command(flatten)]
    net: NetworkArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Initial partition file; `@drivers-split` or one block per line.
    #[arg(long, conflicts_with = "drivers_split")]
    initial: Option<PathBuf>,
    /// Start from the split {drivers, rest} (the default).
    #[arg(long)]
    drivers_split: bool,
    /// Tolerance when grouping column block sums.
    #[arg(long)]
    tol: Option<f64>,
    /// Refine and lump in exact rational arithmetic.
    #[arg(long, conflicts_with = "tol")]
    exact: bool,
    /// Reduced system JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the partition, one block of labels per line.
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyCmd {
    /// Network to check; random instances are generated when omitted.
    network: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[arg(long)]
    symmetrize: bool,
    #[command(flatten)]
    input: InputArgs,
    /// Initial partition for refinement.
    #[arg(long, conflicts_with = "partition")]
    initial: Option<PathBuf>,
    /// Use this partition as is instead of refining.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random networks to generate without a network file.
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    #[arg(long, default_value_t = 400)]
    edges: usize,
    /// Generate networks with planted block structure.
    #[arg(long)]
    planted: bool,
    /// Random controls per network.
    #[arg(long, default_value_t = 10)]
    controls: usize,
    #[arg(long = "T", default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Hold time of each random control value.
    #[arg(long, default_value_t = 0.1)]
    control_dt: f64,
    /// Largest accepted deviation.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    /// Also compare sup and inf of a random block-constant final cost.
    #[arg(long)]
    optimal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    Original,
    Reduced,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Reduced system JSON from `reduce`; recomputed from the drivers split
    /// when omitted. Its drivers and bounds replace `--drivers`.
    #[arg(long)]
    reduced: Option<PathBuf>,
    /// Initial state (original or reduced dimension); zero when omitted.
    #[arg(long)]
    x0: Option<PathBuf>,
    #[arg(long = "T")]
    t_end: f64,
    #[arg(long)]
    dt: f64,
    /// Cost functional as JSON over the blocks of the reduced system.
    #[arg(long)]
    cost: Option<PathBuf>,
    /// Trajectory CSV (`t,x1..xN`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateCmd {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, value_enum, default_value_t = SystemKind::Original)]
    system: SystemKind,
    /// Control CSV (`t,u1..uK`); the midpoint of the bounds when omitted.
    #[arg(long)]
    control: Option<PathBuf>,
    /// Sample step of a one-row control file.
    #[arg(long)]
    control_dt: Option<f64>,
}

#[derive(Args, Debug)]
struct OptimalCmd {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, value_parser = parse_direction, default_value = "sup")]
    direction: Direction,
    /// Fail with exit code 2 when the two values differ by more than this.
    #[arg(long)]
    check: Option<f64>,
    /// Optimal control of the original system as CSV.
    #[arg(long)]
    control_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportCmd {
    /// Directory of networks or a manifest CSV.
    source: PathBuf,
    /// Report CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to CTRLEQ_THREADS or all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse()
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("invalid bound {lo:?}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("invalid bound {hi:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("need finite lo <= hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 1,
        ErrorKind::Verification => 2,
        ErrorKind::Io => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Drivers(cmd) => commands::drivers(cmd),
        Command::Reduce(cmd) => commands::reduce(cmd),
        Command::Verify(cmd) => commands::verify(cmd),
        Command::Simulate(cmd) => commands::simulate(cmd),
        Command::Optimal(cmd) => commands::optimal(cmd),
        Command::Report(cmd) => commands::report(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
