use std::path::Path;

use crate::error::{Error, Result};
use crate::input::InputStructure;
use crate::matrix::NodeId;
use crate::partition::{InitialPartition, Partition};

use super::{is_comment, read_text, NodeLabels};

const DRIVERS_SPLIT: &str = "@drivers-split";

/// One block per line of whitespace-separated node labels, or the single
/// directive `@drivers-split`.
pub fn parse_partition(path: impl AsRef<Path>, labels: &NodeLabels) -> Result<InitialPartition> {
    let path = path.as_ref();
    read_partition_str(&read_text(path)?, path, labels)
}

pub fn read_partition_str(
    text: &str,
    path: &Path,
    labels: &NodeLabels,
) -> Result<InitialPartition> {
    let mut blocks: Vec<Vec<NodeId>> = Vec::new();
    let mut directive = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        if line == DRIVERS_SPLIT {
            directive = true;
            continue;
        }
        let block = line
            .split_whitespace()
            .map(|tok| {
                labels
                    .id(tok)
                    .ok_or_else(|| Error::parse(path, lineno + 1, format!("unknown node {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        blocks.push(block);
    }
    match (directive, blocks.is_empty()) {
        (true, true) => Ok(InitialPartition::DriversSplit),
        (true, false) => Err(Error::parse(
            path,
            0,
            "@drivers-split cannot be combined with explicit blocks",
        )),
        (false, _) => Ok(InitialPartition::Explicit(Partition::new(
            blocks,
            labels.len(),
        )?)),
    }
}

/// One driver label per line, optionally followed by its bounds `lo hi`;
/// drivers without bounds get `[default_lo, default_hi]`.
pub fn parse_drivers(
    path: impl AsRef<Path>,
    labels: &NodeLabels,
    default_lo: f64,
    default_hi: f64,
) -> Result<InputStructure> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let (mut drivers, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        let err = |msg: String| Error::parse(path, lineno + 1, msg);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let id = labels
            .id(tokens[0])
            .ok_or_else(|| err(format!("unknown node {:?}", tokens[0])))?;
        let (l, h) = match tokens[1..] {
            [] => (default_lo, default_hi),
            [a, b] => {
                let parse = |t: &str| {
                    t.parse::<f64>()
                        .map_err(|_| err(format!("invalid bound {t:?}")))
                };
                (parse(a)?, parse(b)?)
            }
            _ => return Err(err("expected 'label' or 'label lo hi'".into())),
        };
        drivers.push(id);
        lo.push(l);
        hi.push(h);
    }
    InputStructure::new(drivers, lo, hi)
}
