use std::path::Path;

use randobdd::graph::{parse_graph, Format};
use randobdd_cli::{run_cli, BENCH_HEADER, EXIT_INPUT, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("randobdd").chain(args.iter().copied());
    let code = run_cli(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Drops the trailing wall_time_ms column.
fn without_time(row: &str) -> &str {
    &row[..row.rfind(',').unwrap()]
}

#[test]
fn gen_then_match_appends_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.el");
    let csv = dir.path().join("out.csv");
    let (code, _) = run(&[
        "gen",
        "--n",
        "6",
        "--density",
        "0.3",
        "--width",
        "146",
        "--seed",
        "3",
        "--out",
        path_str(&graph),
    ]);
    assert_eq!(code, EXIT_OK);
    let parsed = parse_graph(&graph, Format::EdgeList).unwrap();
    assert_eq!(parsed.graph.num_nodes(), 64);
    assert!(parsed.graph.num_edges() > 0);

    for _ in 0..2 {
        let (code, _) = run(&[
            "match",
            "--input",
            path_str(&graph),
            "--format",
            "edgelist",
            "--seed",
            "7",
            "--csv",
            path_str(&csv),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert_eq!(lines[0], BENCH_HEADER);
    assert_eq!(without_time(lines[1]), without_time(lines[2]));
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "g");
    assert_eq!(fields[2], "64");
    assert_eq!(fields[4], "0000000000000007");
    let m: usize = fields[3].parse().unwrap();
    let size: usize = fields[9].parse().unwrap();
    assert!(size <= m && size > 0);
}

#[test]
fn match_reads_dimacs_and_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("p4.col");
    std::fs::write(&graph, "c path\np edge 4 3\ne 1 2\ne 2 3\ne 3 4\n").unwrap();
    let (code, out) = run(&[
        "match",
        "--input",
        path_str(&graph),
        "--format",
        "dimacs",
        "--sparsify",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], BENCH_HEADER);
    assert!(
        lines[1].starts_with("p4,2,4,3,0000000000000000,"),
        "{}",
        lines[1]
    );
}

#[test]
fn independence_verdicts() {
    let (code, out) = run(&[
        "verify-independence",
        "--family",
        "alg1",
        "--n",
        "3",
        "--k",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next(), Some("exact"));

    let (code, out) = run(&[
        "verify-independence",
        "--family",
        "alg1",
        "--n",
        "3",
        "--k",
        "4",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next(), Some("violated"));
    assert!(out.contains("witness (0 1 2 3)="), "{out}");

    let (code, out) = run(&[
        "verify-independence",
        "--family",
        "layered",
        "--n",
        "5",
        "--k",
        "2",
        "--eps",
        "0.25",
        "--samples",
        "2000",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next(), Some("within-eps"));
}

#[test]
fn mis_reports_a_verified_set() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star.el");
    std::fs::write(&graph, "0 1\n0 2\n0 3\n").unwrap();
    let (code, out) = run(&["mis", "--input", path_str(&graph), "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("size="), "{out}");
    let (code, _) = run(&["mis", "--input", path_str(&graph), "--rule", "min"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn bench_is_append_safe_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let args = [
        "bench",
        "--min-n",
        "3",
        "--max-n",
        "4",
        "--densities",
        "0.2,0.4",
        "--reps",
        "2",
        "--seed",
        "9",
        "--csv",
        path_str(&csv),
    ];
    assert_eq!(run(&args).0, EXIT_OK);
    assert_eq!(run(&args).0, EXIT_OK);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 8);
    assert_eq!(lines.iter().filter(|l| **l == BENCH_HEADER).count(), 1);
    for i in 1..=8 {
        assert_eq!(without_time(lines[i]), without_time(lines[i + 8]));
    }
}

#[test]
fn exit_codes_for_bad_usage_and_input() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["match", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(
        run(&["match", "--input", "/nonexistent/g.el"]).0,
        EXIT_INPUT
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.col");
    std::fs::write(&bad, "p edge 2 1\ne 1 5\n").unwrap();
    assert_eq!(
        run(&["match", "--input", path_str(&bad), "--format", "dimacs"]).0,
        EXIT_INPUT
    );
    assert_eq!(
        run(&[
            "verify-independence",
            "--family",
            "alg1",
            "--n",
            "3",
            "--k",
            "0"
        ])
        .0,
        EXIT_USAGE
    );
    assert_eq!(run(&["gen", "--n", "4", "--density", "1.5"]).0, EXIT_USAGE);
}
