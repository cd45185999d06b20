//! Reading networks, partitions and driver lists; writing reduced systems,
//! reports, controls and trajectories.

mod partition;
mod reduced;
mod tables;

pub use partition::{parse_drivers, parse_partition, read_partition_str};
pub use reduced::{
    read_reduced_system, reduced_system_from_json, reduced_system_to_json, write_reduced_system,
    ReducedSystemFile,
};
pub use tables::{
    read_control_csv, read_vector, write_control_csv, write_report, write_trajectory_csv,
    REPORT_HEADER,
};

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::matrix::{NodeId, SparseMatrix};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    MatrixMarket,
    EdgeList,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::MatrixMarket => "matrix-market",
            Format::EdgeList => "tsv-edge-list",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mtx" | "mm" | "matrix-market" | "matrixmarket" => Ok(Format::MatrixMarket),
            "tsv" | "edges" | "edge-list" | "tsv-edge-list" | "edgelist" => Ok(Format::EdgeList),
            _ => Err(format!("unknown network format {s:?}")),
        }
    }
}

/// Bijection between the node labels of a file and `0..n`.
///
/// When every label is an integer the index order is numeric; otherwise it
/// is the order of first appearance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeLabels {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeLabels {
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!(
                    "node label {name:?} listed twice"
                )));
            }
        }
        Ok(NodeLabels { names, index })
    }

    /// Labels `1..=n`.
    pub fn numbered(n: usize) -> Self {
        Self::from_names((1..=n).map(|i| i.to_string()).collect()).expect("distinct labels")
    }

    /// Orders labels seen in a file, numerically if they are all integers.
    fn from_appearance(mut names: Vec<String>) -> Self {
        let numeric: Option<Vec<i128>> = names.iter().map(|s| s.parse().ok()).collect();
        if let Some(values) = numeric {
            let mut order: Vec<usize> = (0..names.len()).collect();
            order.sort_by(|&a, &b| {
                values[a]
                    .cmp(&values[b])
                    .then_with(|| names[a].cmp(&names[b]))
            });
            names = order
                .into_iter()
                .map(|i| std::mem::take(&mut names[i]))
                .collect();
        }
        Self::from_names(names).expect("labels were deduplicated")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// `None` detects the format from the extension or banner.
    pub format: Option<Format>,
    /// Add the reverse of every edge.
    pub symmetrize: bool,
}

#[derive(Clone, Debug)]
pub struct ParsedNetwork<W = f64> {
    /// `matrix[i][j]` is the weight of the edge `j → i`.
    pub matrix: SparseMatrix<W>,
    pub labels: NodeLabels,
    /// Edge records read, before duplicates are summed.
    pub edge_records: usize,
    pub format: Format,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn detect_format(path: &Path, text: &str) -> Format {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("mtx") || text.trim_start().starts_with("%%MatrixMarket") {
        Format::MatrixMarket
    } else {
        Format::EdgeList
    }
}

/// Reads a directed network into `A` with `A[dst][src] = weight` for each
/// edge `src → dst`; duplicate edges are summed and self-loops kept.
pub fn parse_network<W: Weight>(
    path: impl AsRef<Path>,
    options: ParseOptions,
) -> Result<ParsedNetwork<W>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    parse_network_str(&text, path, options)
}

/// As [`parse_network`] on text already in memory; `path` is used in errors.
pub fn parse_network_str<W: Weight>(
    text: &str,
    path: &Path,
    options: ParseOptions,
) -> Result<ParsedNetwork<W>> {
    let format = options.format.unwrap_or_else(|| detect_format(path, text));
    let (n, labels, edges) = match format {
        Format::EdgeList => parse_edge_list::<W>(text, path)?,
        Format::MatrixMarket => parse_matrix_market::<W>(text, path)?,
    };
    if n == 0 {
        return Err(Error::parse(path, 0, "network has no nodes"));
    }
    let edge_records = edges.len();
    let reverse: Vec<_> = if options.symmetrize {
        edges
            .iter()
            .filter(|(s, d, _)| s != d)
            .map(|(s, d, w)| (*s, *d, w.clone()))
            .collect()
    } else {
        Vec::new()
    };
    let triplets = edges.into_iter().map(|(s, d, w)| (d, s, w)).chain(reverse);
    let matrix = SparseMatrix::from_triplets(n, n, triplets)?;
    Ok(ParsedNetwork {
        matrix,
        labels,
        edge_records,
        format,
    })
}

type Edges<W> = Vec<(NodeId, NodeId, W)>;

fn is_comment(line: &str) -> bool {
    line.is_empty() || line.starts_with('%') || line.starts_with('#')
}

fn parse_edge_list<W: Weight>(text: &str, path: &Path) -> Result<(usize, NodeLabels, Edges<W>)> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    let mut raw: Vec<(usize, usize, W)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if lineno == 0 && line.starts_with('%') {
            let header = line.trim_start_matches('%').to_ascii_lowercase();
            if header
                .split_whitespace()
                .next()
                .is_some_and(|w| w == "sym" || w == "undirected")
            {
                warn!(
                    "{}: header marks the network undirected; edges are read as directed",
                    path.display()
                );
            }
        }
        if is_comment(line) {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut id_of = |label| {
            *seen.entry(label).or_insert_with(|| {
                order.push(label);
                order.len() - 1
            })
        };
        let src = id_of(tokens.next().expect("non-empty line has a token"));
        let Some(dst_label) = tokens.next() else {
            continue;
        };
        let dst = id_of(dst_label);
        let weight = match tokens.next() {
            None => W::one(),
            Some(tok) => W::parse_weight(tok)
                .filter(W::is_finite)
                .ok_or_else(|| Error::parse(path, lineno + 1, format!("invalid weight {tok:?}")))?,
        };
        raw.push((src, dst, weight));
    }
    let labels = NodeLabels::from_appearance(order.iter().map(|s| s.to_string()).collect());
    let remap: Vec<NodeId> = order
        .iter()
        .map(|s| labels.id(s).expect("label was recorded"))
        .collect();
    let edges = raw
        .into_iter()
        .map(|(s, d, w)| (remap[s], remap[d], w))
        .collect();
    Ok((labels.len(), labels, edges))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

/// Coordinate Matrix Market; entry `(i, j)` is the edge `i → j`.
fn parse_matrix_market<W: Weight>(
    text: &str,
    path: &Path,
) -> Result<(usize, NodeLabels, Edges<W>)> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let words: Vec<String> = banner
        .split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect();
    if words.len() < 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(Error::parse(
            path,
            1,
            "missing %%MatrixMarket matrix banner",
        ));
    }
    if words[2] != "coordinate" {
        return Err(Error::parse(
            path,
            1,
            format!("unsupported layout {:?}", words[2]),
        ));
    }
    let pattern = match words[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => {
            return Err(Error::parse(
                path,
                1,
                format!("unsupported field {other:?}"),
            ))
        }
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => {
            return Err(Error::parse(
                path,
                1,
                format!("unsupported symmetry {other:?}"),
            ))
        }
    };

    let mut size: Option<(usize, usize)> = None;
    let mut edges: Edges<W> = Vec::new();
    let mut n = 0;
    let mut entries = 0;
    for (lineno, line) in lines {
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        let lineno = lineno + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let Some((_, nnz)) = size else {
            let dims: Option<Vec<usize>> = tokens.iter().map(|t| t.parse().ok()).collect();
            match dims.as_deref() {
                Some(&[rows, cols, nnz]) => {
                    if rows != cols {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("matrix is {rows}x{cols}, not square"),
                        ));
                    }
                    n = rows;
                    size = Some((n, nnz));
                    edges.reserve(nnz);
                }
                _ => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        "expected size line 'rows cols nnz'",
                    ))
                }
            }
            continue;
        };
        let want = if pattern { 2 } else { 3 };
        if tokens.len() < want {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {want} fields"),
            ));
        }
        let index = |t: &str| -> Result<NodeId> {
            match t.parse::<usize>() {
                Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
                _ => Err(Error::parse(
                    path,
                    lineno,
                    format!("index {t:?} outside 1..={n}"),
                )),
            }
        };
        let (i, j) = (index(tokens[0])?, index(tokens[1])?);
        let w = if pattern {
            W::one()
        } else {
            W::parse_weight(tokens[2])
                .filter(W::is_finite)
                .ok_or_else(|| {
                    Error::parse(path, lineno, format!("invalid weight {:?}", tokens[2]))
                })?
        };
        entries += 1;
        if entries > nnz {
            return Err(Error::parse(
                path,
                lineno,
                format!("more than the {nnz} declared entries"),
            ));
        }
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric if i != j => edges.push((j, i, w.clone())),
            Symmetry::Skew if i != j => edges.push((j, i, -w.clone())),
            Symmetry::Skew => {
                return Err(Error::parse(
                    path,
                    lineno,
                    "diagonal entry in skew-symmetric matrix",
                ))
            }
            Symmetry::Symmetric => {}
        }
        edges.push((i, j, w));
    }
    match size {
        None => Err(Error::parse(path, 0, "missing size line")),
        Some((_, nnz)) if entries != nnz => Err(Error::parse(
            path,
            0,
            format!("header declares {nnz} entries, found {entries}"),
        )),
        Some(_) => Ok((n, NodeLabels::numbered(n), edges)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Rational;

    fn parse<W: Weight>(text: &str, name: &str) -> Result<ParsedNetwork<W>> {
        parse_network_str(text, Path::new(name), ParseOptions::default())
    }

    #[test]
    fn running_example_edge_list() {
        let net = parse::<f64>("2\t1\t0.5\n3\t1\t0.5\n1\t2\t0.25\n1\t3\t0.5\n", "fig.tsv").unwrap();
        assert_eq!(net.format, Format::EdgeList);
        assert_eq!(
            net.matrix.to_dense(),
            vec![
                vec![0.0, 0.5, 0.5],
                vec![0.25, 0.0, 0.0],
                vec![0.5, 0.0, 0.0]
            ]
        );
        assert_eq!(net.labels.names(), &["1", "2", "3"]);
    }

    #[test]
    fn labels_and_defaults() {
        let net = parse::<f64>("% konect header\n10 2\n2 b 3 1234567\nc\n", "x.tsv").unwrap();
        assert_eq!(net.labels.names(), &["10", "2", "b", "c"]);
        assert_eq!(net.matrix.get(2, 1), Some(&3.0));
        assert_eq!(net.matrix.get(1, 0), Some(&1.0));
        assert_eq!(net.matrix.get(0, 1), None);
        assert_eq!(net.matrix.n_rows(), 4);

        let numeric = parse::<f64>("10 2\n2 1\n", "x.tsv").unwrap();
        assert_eq!(numeric.labels.names(), &["1", "2", "10"]);
    }

    #[test]
    fn duplicates_summed_and_exact_weights() {
        let net = parse::<Rational>("1 2 1/3\n1 2 1/6\n", "x.tsv").unwrap();
        assert_eq!(
            net.matrix.get(1, 0),
            Some(&Rational::new(1.into(), 2.into()))
        );
        assert_eq!(net.edge_records, 2);
    }

    #[test]
    fn edge_list_errors() {
        let err = parse::<f64>("1 2\n1 3 abc\n", "x.tsv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse::<f64>("% nothing\n", "x.tsv").is_err());
        assert!(parse::<f64>("1 2 inf\n", "x.tsv").is_err());
    }

    #[test]
    fn matrix_market_general() {
        let text = "%%MatrixMarket matrix coordinate real general\n% c\n3 3 4\n2 1 0.5\n3 1 0.5\n1 2 0.25\n1 3 0.5\n";
        let net = parse::<f64>(text, "fig.mtx").unwrap();
        assert_eq!(net.format, Format::MatrixMarket);
        assert_eq!(net.edge_records, 4);
        assert_eq!(net.matrix.get(0, 1), Some(&0.5));
        assert_eq!(net.matrix.get(1, 0), Some(&0.25));
    }

    #[test]
    fn matrix_market_variants() {
        let sym = "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 3\n";
        let net = parse::<f64>(sym, "s.txt").unwrap();
        assert_eq!(net.matrix.nnz(), 3);
        let skew = "%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n2 1 3\n";
        let net = parse::<f64>(skew, "s.mtx").unwrap();
        assert_eq!(net.matrix.to_dense(), vec![vec![0.0, 3.0], vec![-3.0, 0.0]]);
    }

    #[test]
    fn matrix_market_errors() {
        let count = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n";
        assert!(parse::<f64>(count, "a.mtx")
            .unwrap_err()
            .to_string()
            .contains("declares 2"));
        let range = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert!(matches!(
            parse::<f64>(range, "a.mtx"),
            Err(Error::Parse { line: 3, .. })
        ));
        let dense = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        assert!(parse::<f64>(dense, "a.mtx").is_err());
    }

    #[test]
    fn symmetrize() {
        let opts = ParseOptions {
            format: Some(Format::EdgeList),
            symmetrize: true,
        };
        let net = parse_network_str::<f64>("1 2 2\n2 2 1\n", Path::new("x"), opts).unwrap();
        assert_eq!(net.matrix.to_dense(), vec![vec![0.0, 2.0], vec![2.0, 1.0]]);
    }

    #[test]
    fn format_names() {
        assert_eq!("mtx".parse::<Format>().unwrap(), Format::MatrixMarket);
        assert_eq!("tsv".parse::<Format>().unwrap(), Format::EdgeList);
        assert!("gexf".parse::<Format>().is_err());
    }
}
