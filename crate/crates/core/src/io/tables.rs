use std::path::Path;

use crate::error::{Error, Result};
use crate::report::ReportRow;
use crate::signal::ControlSignal;
use crate::sim::Trajectory;

use super::read_text;

pub const REPORT_HEADER: [&str; 9] = [
    "name", "N", "n", "n_over_N", "K", "k", "k_over_K", "K_over_N", "status",
];

fn percent(num: usize, den: usize) -> String {
    if den == 0 {
        String::new()
    } else {
        format!("{:.2}", 100.0 * num as f64 / den as f64)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Report rows in the given order; ratios are percentages with two decimals.
/// Failed rows keep their name and carry the error in `status`.
pub fn write_report<W: std::io::Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for row in rows {
        match &row.outcome {
            Ok(c) => w.write_record([
                row.name.clone(),
                c.n_nodes.to_string(),
                c.n_blocks.to_string(),
                percent(c.n_blocks, c.n_nodes),
                c.n_drivers.to_string(),
                c.n_driver_blocks.to_string(),
                percent(c.n_driver_blocks, c.n_drivers),
                percent(c.n_drivers, c.n_nodes),
                "ok".to_string(),
            ])?,
            Err(msg) => {
                let mut rec = vec![row.name.clone()];
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push(format!("failed: {msg}"));
                w.write_record(rec)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<report>", e))
}

/// Header `t,u1..uK`, one row per control sample.
pub fn write_control_csv(u: &ControlSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=u.channels()).map(|l| format!("u{l}")));
    w.write_record(&header)?;
    for (s, sample) in u.samples().iter().enumerate() {
        let mut rec = vec![(s as f64 * u.dt()).to_string()];
        rec.extend(sample.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a `t,u1..uK` table on a uniform grid starting at 0. A single-row
/// table needs `dt`; with more rows the step comes from the `t` column.
pub fn read_control_csv(
    path: impl AsRef<Path>,
    lo: &[f64],
    hi: &[f64],
    dt: Option<f64>,
) -> Result<ControlSignal> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let width = reader.headers()?.len();
    if width != lo.len() + 1 {
        return Err(Error::parse(
            path,
            1,
            format!(
                "expected t and {} control columns, found {width} columns",
                lo.len()
            ),
        ));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = r + 2;
        let nums = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(path, line, format!("not a number: {f:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        times.push(nums[0]);
        values.push(nums[1..].to_vec());
    }
    if times.is_empty() {
        return Err(Error::parse(path, 2, "control table has no rows"));
    }
    let dt = match (dt, times.len()) {
        (Some(dt), _) => dt,
        (None, 1) => {
            return Err(Error::GridMismatch(
                "a one-row control needs an explicit step".into(),
            ))
        }
        (None, _) => times[1] - times[0],
    };
    for (s, &t) in times.iter().enumerate() {
        if (t - s as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(Error::parse(
                path,
                s + 2,
                format!("t = {t} is off the grid of step {dt}"),
            ));
        }
    }
    ControlSignal::new(dt, values, lo.to_vec(), hi.to_vec())
}

/// Header `t,x1..xN`, one row per grid point.
pub fn write_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let n = traj.states.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (s, x) in traj.states.iter().enumerate() {
        let mut rec = vec![(s as f64 * traj.dt).to_string()];
        rec.extend(x.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// All numbers in a file separated by commas or whitespace. A first line
/// that is not numeric is taken as a header and skipped.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line
            .split([',', ' ', '\t'])
            .filter(|t| !t.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            tokens.iter().map(|t| t.parse::<f64>()).collect();
        match parsed {
            Ok(v) => out.extend(v),
            Err(_) if lineno == 0 => continue,
            Err(_) => return Err(Error::parse(path, lineno + 1, "expected numbers")),
        }
    }
    Ok(out)
}
