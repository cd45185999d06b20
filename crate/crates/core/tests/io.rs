mod common;

use std::path::Path;

use ctrleq::gen::{seeded, PlantedSpec};
use ctrleq::io::{
    parse_network, parse_partition, read_reduced_system, write_reduced_system, write_report,
    Format, NodeLabels, ParseOptions,
};
use ctrleq::report::{ReportCounts, ReportRow};
use ctrleq::{
    coarsest_control_equivalence, reduce_pipeline, InitialPartition, Partition, ReduceOptions,
};
use rand::Rng;

use common::{planted_instance, FIG1_TSV};

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn running_example_files() {
    let dir = tempfile::tempdir().unwrap();
    let net = parse_network::<f64>(
        write(dir.path(), "fig1.tsv", FIG1_TSV),
        ParseOptions::default(),
    )
    .unwrap();
    assert_eq!(net.matrix, common::fig1());

    let p = parse_partition(write(dir.path(), "p.txt", "2 3\n1\n"), &net.labels).unwrap();
    let want = Partition::new(vec![vec![1, 2], vec![0]], 3).unwrap();
    assert_eq!(p, InitialPartition::Explicit(want.clone()));

    let split =
        parse_partition(write(dir.path(), "s.txt", "@drivers-split\n"), &net.labels).unwrap();
    assert_eq!(split.resolve(3, &[1, 2]).unwrap(), want);

    let singles = parse_partition(write(dir.path(), "one.txt", "3\n1\n2\n"), &net.labels).unwrap();
    match singles {
        InitialPartition::Explicit(p) => assert!(p.same_blocks(&Partition::singletons(3))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unweighted_edges_default_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let net = parse_network::<f64>(
        write(dir.path(), "u.tsv", "1\t2\n2\t3\n3\t1\n"),
        ParseOptions::default(),
    )
    .unwrap();
    assert!(net.matrix.entries().all(|(_, _, &w)| w == 1.0));
    assert_eq!(net.matrix.nnz(), 3);
}

/// Counts entry lines without the parser: every non-comment line after the
/// size line.
fn count_entry_lines(text: &str) -> usize {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'))
        .count()
        - 1
}

#[test]
fn matrix_market_entry_count() {
    let mut rng = seeded(9);
    let dir = tempfile::tempdir().unwrap();
    for case in 0..20 {
        let n = rng.gen_range(2..40);
        let mut lines = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..rng.gen_range(1..4 * n) {
            let (i, j) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
            if seen.insert((i, j)) {
                lines.push(format!("{i} {j} {}", rng.gen_range(1..9)));
            }
            if case % 4 == 0 && rng.gen_bool(0.2) {
                lines.push("% interleaved comment".to_string());
            }
        }
        let nnz = lines.iter().filter(|l| !l.starts_with('%')).count();
        let text = format!(
            "%%MatrixMarket matrix coordinate integer general\n% generated\n{n} {n} {nnz}\n{}\n",
            lines.join("\n")
        );
        let net = parse_network::<f64>(write(dir.path(), "m.mtx", &text), ParseOptions::default())
            .unwrap();
        assert_eq!(net.format, Format::MatrixMarket);
        assert_eq!(net.edge_records, count_entry_lines(&text));
        assert_eq!(net.matrix.nnz(), nnz);
    }
}

#[test]
fn malformed_inputs_report_lines() {
    let dir = tempfile::tempdir().unwrap();
    let err = parse_network::<f64>(
        write(dir.path(), "bad.tsv", "% c\n1 2\n2 3 w\n"),
        ParseOptions::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains(":3:"), "{err}");
    assert!(parse_network::<f64>(
        write(dir.path(), "empty.tsv", "% only\n"),
        ParseOptions::default()
    )
    .is_err());
    let net = parse_network::<f64>(
        write(dir.path(), "ok.tsv", FIG1_TSV),
        ParseOptions::default(),
    )
    .unwrap();
    for (text, needle) in [
        ("1 2\n9\n", "unknown node"),
        ("1 2\n2 3\n", "appears in blocks"),
        ("1 2\n", "not covered"),
    ] {
        let err = parse_partition(write(dir.path(), "p.txt", text), &net.labels).unwrap_err();
        assert!(err.to_string().contains(needle), "{err}");
    }
}

#[test]
fn reduced_system_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let mut rng = seeded(77);
    for case in 0..100 {
        let spec = PlantedSpec {
            blocks: rng.gen_range(1..8),
            max_block: 4,
            quotient_degree: 3,
            max_weight: 9,
        };
        let inst = planted_instance(&mut rng, spec);
        let n = inst.a.n_rows();
        let a = inst.a.map_weights(|w| w / 7.0);
        let (_, r) = reduce_pipeline(
            &a,
            &inst.input,
            &InitialPartition::DriversSplit,
            &ReduceOptions::default(),
        )
        .unwrap();
        let labels = if case % 2 == 0 {
            NodeLabels::numbered(n)
        } else {
            NodeLabels::from_names((0..n).map(|i| format!("node-{i}")).collect()).unwrap()
        };
        write_reduced_system(&r, &labels, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = read_reduced_system(&path, &labels).unwrap();
        assert_eq!(back, r, "case {case}");
        write_reduced_system(&back, &labels, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
    }
}

#[test]
fn running_example_json() {
    let a = common::fig1();
    let input = ctrleq::InputStructure::new(vec![1, 2], vec![1.0, 3.0], vec![2.0, 4.0]).unwrap();
    let (_, r) = reduce_pipeline(
        &a,
        &input,
        &InitialPartition::DriversSplit,
        &ReduceOptions::default(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_reduced_system(&r, &NodeLabels::numbered(3), &path).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["k"], 1);
    assert_eq!(v["A_hat"], serde_json::json!([[0.0, 0.75], [0.5, 0.0]]));
    assert_eq!(v["B_hat_driver_blocks"], serde_json::json!([0]));
    assert_eq!(v["m_hat"], serde_json::json!([4.0]));
    assert_eq!(v["M_hat"], serde_json::json!([6.0]));
}

#[test]
fn report_csv_is_deterministic() {
    let rows = vec![
        ReportRow::new(
            "grassland",
            Ok(ReportCounts {
                n_nodes: 89,
                n_blocks: 31,
                n_drivers: 46,
                n_driver_blocks: 10,
            }),
        ),
        ReportRow::new("missing", Err("no such file".into())),
    ];
    let mut first = Vec::new();
    write_report(&rows, &mut first).unwrap();
    let mut second = Vec::new();
    write_report(&rows, &mut second).unwrap();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "grassland,89,31,34.83,46,10,21.74,51.69,ok"
    );
}

#[test]
fn label_remap_is_a_bijection() {
    let dir = tempfile::tempdir().unwrap();
    let text = "alpha beta\ngamma alpha 2\nbeta delta\n";
    let net =
        parse_network::<f64>(write(dir.path(), "l.tsv", text), ParseOptions::default()).unwrap();
    let names = net.labels.names().to_vec();
    assert_eq!(names, ["alpha", "beta", "gamma", "delta"]);
    for (i, name) in names.iter().enumerate() {
        assert_eq!(net.labels.id(name), Some(i));
    }
    let p = coarsest_control_equivalence(&net.matrix, &Partition::whole(4)).unwrap();
    assert!(p.n_blocks() >= 1);
}
