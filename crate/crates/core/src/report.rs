//! Reduction reports over many networks.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::drivers::minimum_driver_set;
use crate::equivalence::default_tolerance;
use crate::error::{Error, Result};
use crate::io::{parse_drivers, parse_network, Format, ParseOptions};
use crate::lump::reduced_matrix;
use crate::partition::Partition;
use crate::refine::coarsest_control_equivalence_with;

/// Sizes of a network and of its reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReportCounts {
    /// `N`
    pub n_nodes: usize,
    /// `n`, blocks of the coarsest control equivalence.
    pub n_blocks: usize,
    /// `K`, driver nodes.
    pub n_drivers: usize,
    /// `k`, blocks containing a driver.
    pub n_driver_blocks: usize,
}

impl ReportCounts {
    pub fn rho(&self) -> f64 {
        self.n_blocks as f64 / self.n_nodes as f64
    }

    pub fn rho_drivers(&self) -> f64 {
        self.n_driver_blocks as f64 / self.n_drivers as f64
    }

    pub fn driver_density(&self) -> f64 {
        self.n_drivers as f64 / self.n_nodes as f64
    }
}

/// Wall time per stage in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimes {
    pub parse_ms: f64,
    pub drivers_ms: f64,
    pub refine_ms: f64,
    pub lump_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub outcome: std::result::Result<ReportCounts, String>,
    pub times: StageTimes,
}

impl ReportRow {
    pub fn new(
        name: impl Into<String>,
        outcome: std::result::Result<ReportCounts, String>,
    ) -> Self {
        ReportRow {
            name: name.into(),
            outcome,
            times: StageTimes::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: Option<Format>,
    /// Driver list; without one the drivers come from a maximum matching.
    pub drivers_path: Option<PathBuf>,
    pub bounds: (f64, f64),
}

pub const DEFAULT_BOUNDS: (f64, f64) = (0.0, 1.0);

fn parse_bounds(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(':')?;
    let (lo, hi) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (lo <= hi).then_some((lo, hi))
}

/// CSV lines `name,path,format[,drivers_path][,bounds]` with bounds written
/// `lo:hi`. An optional header starting with `name` is skipped. Relative
/// paths are resolved against the manifest's directory; an empty or `auto`
/// format is detected from the file.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(r + 1, |p| p.line() as usize);
        let fields: Vec<&str> = record.iter().collect();
        if fields.iter().all(|f| f.is_empty()) || (entries.is_empty() && fields[0] == "name") {
            continue;
        }
        if fields.len() < 2 || fields.len() > 5 {
            return Err(Error::parse(
                path,
                line,
                "expected name,path,format[,drivers_path][,bounds]",
            ));
        }
        let format = match fields.get(2).copied() {
            None | Some("") | Some("auto") => None,
            Some(f) => Some(
                f.parse::<Format>()
                    .map_err(|e| Error::parse(path, line, e))?,
            ),
        };
        let mut drivers_path = None;
        let mut bounds = DEFAULT_BOUNDS;
        for extra in fields.iter().skip(3).filter(|f| !f.is_empty()) {
            match parse_bounds(extra) {
                Some(b) if extra.contains(':') => bounds = b,
                _ if extra.contains(':') => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("invalid bounds {extra:?}"),
                    ));
                }
                _ => drivers_path = Some(base.join(extra)),
            }
        }
        entries.push(ManifestEntry {
            name: fields[0].to_string(),
            path: base.join(fields[1]),
            format,
            drivers_path,
            bounds,
        });
    }
    Ok(entries)
}

const NETWORK_EXTENSIONS: [&str; 5] = ["mtx", "tsv", "txt", "edges", "el"];

/// Every network file in `dir`, sorted by file name. A sibling
/// `<stem>.drivers` file supplies the driver list.
pub fn manifest_from_dir(dir: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| NETWORK_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    Ok(files
        .into_iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let drivers = p.with_extension("drivers");
            ManifestEntry {
                name: stem,
                drivers_path: drivers.is_file().then_some(drivers),
                path: p,
                format: None,
                bounds: DEFAULT_BOUNDS,
            }
        })
        .collect())
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Drivers, `{drivers, rest}` split, refinement and lumping for one network.
///
/// Only the sparse `Â` is formed here; the counts do not need a dense copy.
pub fn report_row(entry: &ManifestEntry) -> ReportRow {
    let mut times = StageTimes::default();
    let outcome = (|| -> Result<ReportCounts> {
        let t = Instant::now();
        let net = parse_network::<f64>(
            &entry.path,
            ParseOptions {
                format: entry.format,
                symmetrize: false,
            },
        )?;
        times.parse_ms = ms(t);

        let t = Instant::now();
        let (lo, hi) = entry.bounds;
        let input = match &entry.drivers_path {
            Some(p) => parse_drivers(p, &net.labels, lo, hi)?,
            None => minimum_driver_set(&net.matrix, lo, hi)?,
        };
        times.drivers_ms = ms(t);

        let t = Instant::now();
        let n = net.matrix.n_rows();
        let initial = Partition::driver_split(n, input.drivers())?;
        let refined = coarsest_control_equivalence_with(
            &net.matrix,
            &initial,
            default_tolerance(&net.matrix),
        )?;
        times.refine_ms = ms(t);

        let t = Instant::now();
        let is_driver = input.driver_mask(n);
        let blocks = refined.partition.drivers_first(&is_driver);
        let k = blocks
            .blocks()
            .iter()
            .take_while(|b| b.iter().any(|&v| is_driver[v]))
            .count();
        let a_hat = reduced_matrix(&net.matrix, &blocks);
        times.lump_ms = ms(t);
        info!(
            "{}: N={} n={} K={} k={} nnz(A_hat)={} ({:.1} ms refine)",
            entry.name,
            n,
            blocks.n_blocks(),
            input.k(),
            k,
            a_hat.nnz(),
            times.refine_ms
        );
        Ok(ReportCounts {
            n_nodes: n,
            n_blocks: blocks.n_blocks(),
            n_drivers: input.k(),
            n_driver_blocks: k,
        })
    })();
    if let Err(e) = &outcome {
        warn!("{}: {e}", entry.name);
    }
    ReportRow {
        name: entry.name.clone(),
        outcome: outcome.map_err(|e| e.to_string()),
        times,
    }
}

/// Worker count from `CTRLEQ_THREADS`, if set to a positive integer.
pub fn thread_limit() -> Option<usize> {
    std::env::var("CTRLEQ_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// One row per entry in manifest order; failures stay in their own row.
pub fn run_report(entries: &[ManifestEntry], threads: Option<usize>) -> Vec<ReportRow> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| entries.par_iter().map(report_row).collect()),
        Err(e) => {
            warn!("falling back to sequential report: {e}");
            entries.iter().map(report_row).collect()
        }
    }
}
