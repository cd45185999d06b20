use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::InputStructure;
use crate::lump::{ReducedMatrix, ReducedSystem, DENSE_LIMIT};
use crate::matrix::{DenseMatrix, SparseMatrix};
use crate::partition::Partition;

use super::{read_text, NodeLabels};

/// On-disk form of a [`ReducedSystem`]. Nodes appear by their file labels.
///
/// `A_hat` is dense row-major up to the dense limit; larger systems store
/// `A_hat_triplets` as `[row, col, value]` instead. Column `l` of `B̂` is
/// `e_{B_hat_driver_blocks[l]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSystemFile {
    #[serde(rename = "N")]
    pub n_original: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k_original: usize,
    pub k: usize,
    #[serde(rename = "A_hat", default, skip_serializing_if = "Option::is_none")]
    pub a_hat: Option<Vec<Vec<f64>>>,
    #[serde(
        rename = "A_hat_triplets",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub a_hat_triplets: Option<Vec<(usize, usize, f64)>>,
    #[serde(rename = "B_hat_driver_blocks")]
    pub b_hat_driver_blocks: Vec<usize>,
    pub m_hat: Vec<f64>,
    #[serde(rename = "M_hat")]
    pub big_m_hat: Vec<f64>,
    pub blocks: Vec<Vec<String>>,
    pub control_groups: Vec<Vec<String>>,
    pub drivers: Vec<String>,
    pub m: Vec<f64>,
    #[serde(rename = "M")]
    pub big_m: Vec<f64>,
}

pub fn reduced_system_to_json(r: &ReducedSystem, labels: &NodeLabels) -> Result<ReducedSystemFile> {
    if labels.len() != r.n_original() {
        return Err(Error::DimensionMismatch {
            expected: r.n_original(),
            found: labels.len(),
            context: "node labels",
        });
    }
    let name = |v: usize| labels.name(v).to_string();
    let drivers = r.input.drivers();
    let (a_hat, a_hat_triplets) = match &r.a_hat {
        ReducedMatrix::Dense(d) => (Some(d.to_rows()), None),
        ReducedMatrix::Sparse(s) => (
            None,
            Some(s.entries().map(|(i, j, &w)| (i, j, w)).collect()),
        ),
    };
    Ok(ReducedSystemFile {
        n_original: r.n_original(),
        n: r.n(),
        k_original: r.input.k(),
        k: r.k(),
        a_hat,
        a_hat_triplets,
        b_hat_driver_blocks: (0..r.k()).collect(),
        m_hat: r.lo.clone(),
        big_m_hat: r.hi.clone(),
        blocks: r
            .blocks
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&v| name(v)).collect())
            .collect(),
        control_groups: r
            .control_groups
            .iter()
            .map(|g| g.iter().map(|&l| name(drivers[l])).collect())
            .collect(),
        drivers: drivers.iter().map(|&d| name(d)).collect(),
        m: r.input.lo().to_vec(),
        big_m: r.input.hi().to_vec(),
    })
}

pub fn reduced_system_from_json(
    file: &ReducedSystemFile,
    labels: &NodeLabels,
) -> Result<ReducedSystem> {
    let bad = |msg: String| Error::InvalidInput(format!("reduced system: {msg}"));
    if file.n_original != labels.len() {
        return Err(bad(format!(
            "N = {} but the network has {} nodes",
            file.n_original,
            labels.len()
        )));
    }
    let id = |s: &String| {
        labels
            .id(s)
            .ok_or_else(|| bad(format!("unknown node {s:?}")))
    };
    let blocks = file
        .blocks
        .iter()
        .map(|b| b.iter().map(id).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let blocks = Partition::new(blocks, labels.len())?;
    let n = blocks.n_blocks();
    if file.n != n || file.k != file.control_groups.len() || file.k_original != file.drivers.len() {
        return Err(bad(
            "counts do not match the listed blocks, groups and drivers".into(),
        ));
    }
    if file.b_hat_driver_blocks != (0..file.k).collect::<Vec<_>>() {
        return Err(bad("driver blocks must come first, in channel order".into()));
    }
    if file.m_hat.len() != file.k || file.big_m_hat.len() != file.k {
        return Err(bad("one reduced bound pair per group is required".into()));
    }
    let drivers = file.drivers.iter().map(id).collect::<Result<Vec<_>>>()?;
    let input = InputStructure::new(drivers.clone(), file.m.clone(), file.big_m.clone())?;
    let mut seen = vec![false; drivers.len()];
    let mut control_groups = Vec::with_capacity(file.k);
    for (h, group) in file.control_groups.iter().enumerate() {
        let mut channels = Vec::with_capacity(group.len());
        for label in group {
            let node = id(label)?;
            let l = drivers
                .iter()
                .position(|&d| d == node)
                .ok_or_else(|| bad(format!("{label:?} is not a driver")))?;
            if blocks.block_of(node) != h || std::mem::replace(&mut seen[l], true) {
                return Err(bad(format!(
                    "driver {label:?} is misplaced in the control groups"
                )));
            }
            channels.push(l);
        }
        control_groups.push(channels);
    }
    if seen.iter().any(|s| !s) {
        return Err(bad("every driver must belong to a control group".into()));
    }

    let a_hat = match (&file.a_hat, &file.a_hat_triplets) {
        (Some(rows), None) if n <= DENSE_LIMIT => {
            if rows.len() != n {
                return Err(bad(format!("A_hat has {} rows, expected {n}", rows.len())));
            }
            let d = DenseMatrix::from_rows(rows)?;
            if d.cols() != n {
                return Err(bad(format!("A_hat has {} columns, expected {n}", d.cols())));
            }
            ReducedMatrix::Dense(d)
        }
        (None, Some(t)) if n > DENSE_LIMIT => {
            ReducedMatrix::Sparse(SparseMatrix::from_triplets(n, n, t.iter().copied())?)
        }
        _ => {
            return Err(bad(
                "A_hat must be dense up to the dense limit and triplets above it".into(),
            ))
        }
    };
    Ok(ReducedSystem {
        a_hat,
        blocks,
        control_groups,
        lo: file.m_hat.clone(),
        hi: file.big_m_hat.clone(),
        input,
    })
}

pub fn write_reduced_system(
    r: &ReducedSystem,
    labels: &NodeLabels,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(&reduced_system_to_json(r, labels)?)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_reduced_system(path: impl AsRef<Path>, labels: &NodeLabels) -> Result<ReducedSystem> {
    let path = path.as_ref();
    let file: ReducedSystemFile = serde_json::from_str(&read_text(path)?)?;
    reduced_system_from_json(&file, labels)
}
