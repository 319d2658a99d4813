mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{read_csv, read_summary, synthetic, write_matrix};

fn dfdr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfdr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(dir: &Path) -> PathBuf {
    let path = dir.join("matrix.tsv");
    write_matrix(&synthetic(300, 8, 11), &path);
    path
}

fn analyze(matrix: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "analyze",
        "--matrix",
        matrix.to_str().unwrap(),
        "--group-a",
        "A",
        "--group-b",
        "B",
        "--permutations",
        "50",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    dfdr(&args)
}

/// Summary values must be reproducible from the per-test table and curve.
fn check_self_consistency(out: &Path) {
    let summary = read_summary(&out.join("summary.txt"));
    let tests = read_csv(&out.join("tests.csv"));
    let curve = read_csv(&out.join("curve.csv"));
    let discoveries: usize = summary["discoveries"].parse().unwrap();
    let rejected = tests.iter().filter(|r| r[2] == "1").count();
    assert_eq!(rejected, discoveries);
    if summary["tau"] == "none" {
        assert_eq!(discoveries, 0);
        assert_eq!(summary["dfdr"], "0");
        assert_eq!(summary["desirability"], "0");
        return;
    }
    let tau: f64 = summary["tau"].parse().unwrap();
    for row in &tests {
        let t: f64 = row[1].parse().unwrap();
        assert_eq!(row[2] == "1", t >= tau, "row {row:?} vs tau {tau}");
    }
    let point = curve
        .iter()
        .find(|r| r[0].parse::<f64>().unwrap() == tau)
        .expect("chosen tau is on the curve");
    assert_eq!(point[1], summary["desirability"]);
    assert_eq!(point[2], summary["dfdr"]);
    assert_eq!(point[3], summary["discoveries"]);
    let b: f64 = summary["benefit"].parse().unwrap();
    let r: f64 = summary["cost_ratio"].parse().unwrap();
    let d: f64 = summary["dfdr"].parse().unwrap();
    let recomputed = b * ((1.0 - (1.0 + r) * d) * discoveries as f64);
    assert_eq!(recomputed.to_string(), summary["desirability"]);
}

#[test]
fn analyze_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let out = dir.path().join("out");
    let o = analyze(&matrix, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_summary(&out.join("summary.txt"));
    for key in ["tau", "discoveries", "dfdr", "desirability", "pi0", "lambda", "seed", "permutations"] {
        assert!(summary.contains_key(key), "missing {key}");
    }
    assert_eq!(summary["seed"], "7");
    assert_eq!(summary["permutations"], "50");
    assert_eq!(summary["pi0_mode"], "estimated");
    assert!(summary["discoveries"].parse::<usize>().unwrap() > 0);
    check_self_consistency(&out);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    assert!(analyze(&matrix, &o1, &["--mode", "control", "--alpha", "0.1"]).status.success());
    assert!(analyze(&matrix, &o2, &["--mode", "control", "--alpha", "0.1"]).status.success());
    for f in ["tests.csv", "summary.txt", "curve.csv"] {
        assert_eq!(fs::read(o1.join(f)).unwrap(), fs::read(o2.join(f)).unwrap(), "{f}");
    }
    check_self_consistency(&o1);
}

#[test]
fn different_seeds_change_the_null() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    assert!(analyze(&matrix, &o1, &[]).status.success());
    let o = dfdr(&[
        "analyze", "--matrix", matrix.to_str().unwrap(), "--group-a", "A", "--group-b", "B",
        "--permutations", "50", "--seed", "8", "--out", o2.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_ne!(fs::read(o1.join("curve.csv")).unwrap(), fs::read(o2.join("curve.csv")).unwrap());
    assert_eq!(
        read_csv(&o1.join("tests.csv")).iter().map(|r| r[1].clone()).collect::<Vec<_>>(),
        read_csv(&o2.join("tests.csv")).iter().map(|r| r[1].clone()).collect::<Vec<_>>()
    );
}

#[test]
fn pi0_one_and_preprocess_options() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let out = dir.path().join("out");
    let o = analyze(&matrix, &out, &["--pi0", "one", "--preprocess", "--cost-ratio", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_summary(&out.join("summary.txt"));
    assert_eq!(summary["pi0"], "1");
    assert_eq!(summary["lambda"], "none");
    assert_eq!(summary["cost_ratio"], "9");
    check_self_consistency(&out);
}

#[test]
fn labels_file_matches_header_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mat = synthetic(120, 5, 3);
    let with_header = dir.path().join("h.tsv");
    write_matrix(&mat, &with_header);
    let text = fs::read_to_string(&with_header).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let plain_header: Vec<&str> = header.iter().map(|c| c.split(':').next().unwrap()).collect();
    let labels: String = header[1..]
        .iter()
        .map(|c| c.replace(':', "\t") + "\n")
        .collect();
    let plain = dir.path().join("p.tsv");
    fs::write(&plain, format!("{}\n{}\n", plain_header.join("\t"), lines.collect::<Vec<_>>().join("\n"))).unwrap();
    let labels_path = dir.path().join("labels.tsv");
    fs::write(&labels_path, labels).unwrap();

    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    assert!(analyze(&with_header, &o1, &[]).status.success());
    let o = analyze(&plain, &o2, &["--labels", labels_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(o1.join("summary.txt")).unwrap(), fs::read(o2.join("summary.txt")).unwrap());
}

#[test]
fn tiny_fixture_summary() {
    // No permutation design yields these exact nulls, so this one goes
    // through the library.
    let stats = dfdr::StatisticSet::new(vec![3.0, 2.0, 1.0, 0.5], vec![0.5, 0.4, 0.3, 0.2]).unwrap();
    let cb = dfdr::CostBenefit::from_p_threshold(0.05).unwrap();
    let r = dfdr::maximize_desirability(&stats, &dfdr::Pi0Estimate::one(), &cb);
    assert_eq!((r.tau, r.discoveries(), r.dfdr, r.desirability), (Some(1.0), 3, 0.0, 3.0));
}

#[test]
fn pvalue_input() {
    let dir = tempfile::tempdir().unwrap();
    let pv = dir.path().join("p.txt");
    let mut text = String::new();
    for i in 0..20 {
        text.push_str(&format!("{}\n", 0.0001 * (i + 1) as f64));
    }
    for i in 0..80 {
        text.push_str(&format!("{}\n", 0.2 + 0.01 * i as f64));
    }
    fs::write(&pv, text).unwrap();
    let out = dir.path().join("out");
    let o = dfdr(&["analyze", "--pvalues", pv.to_str().unwrap(), "--pi0", "one", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_summary(&out.join("summary.txt"));
    assert_eq!(summary["discoveries"], "20");
    assert_eq!(summary["tau"], "0.002");
}

#[test]
fn subsets_and_common_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let subsets = dir.path().join("subsets.tsv");
    let first: Vec<String> = (0..150).map(|i| format!("f{i}")).collect();
    let second: Vec<String> = (150..300).map(|i| format!("f{i}")).collect();
    fs::write(
        &subsets,
        format!("low\tA\tB\t1\t19\t{}\nhigh\tA\tB\t2\t19\t{}\n", first.join(","), second.join(",")),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = analyze(&matrix, &out, &["--subsets", subsets.to_str().unwrap(), "--common-threshold"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary_low.txt", "summary_high.txt", "curve_low.csv", "curve_high.csv", "summary_common.txt", "tests.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let rows = read_csv(&out.join("tests.csv"));
    assert_eq!(rows.len(), 300);
    for name in ["low", "high"] {
        let s = read_summary(&out.join(format!("summary_{name}.txt")));
        let n = rows.iter().filter(|r| r[0] == name && r[3] == "1").count();
        assert_eq!(s["discoveries"], n.to_string());
    }
}

#[test]
fn weights_file_with_uniform_costs_matches_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let weights = dir.path().join("w.tsv");
    let text: String = (0..300).map(|i| format!("f{i}\t1\t19\n")).collect();
    fs::write(&weights, text).unwrap();
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    assert!(analyze(&matrix, &o1, &["--pi0", "one"]).status.success());
    let o = analyze(&matrix, &o2, &["--pi0", "one", "--weights", weights.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s1 = read_summary(&o1.join("summary.txt"));
    let s2 = read_summary(&o2.join("summary.txt"));
    assert_eq!(s1["tau"], s2["tau"]);
    assert_eq!(s1["discoveries"], s2["discoveries"]);
    let col = |o: &PathBuf| read_csv(&o.join("tests.csv")).into_iter().map(|r| r[2].clone()).collect::<Vec<_>>();
    assert_eq!(col(&o1), col(&o2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = fixture(dir.path());
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let m = matrix.to_str().unwrap();

    assert_eq!(dfdr(&["--help"]).status.code(), Some(0));
    assert_eq!(dfdr(&["--version"]).status.code(), Some(0));
    assert_eq!(dfdr(&["frobnicate"]).status.code(), Some(1));
    let both = analyze(&matrix, &out, &["--cost-ratio", "19", "--p-threshold", "0.05"]);
    assert_eq!(both.status.code(), Some(1));
    let bad_alpha = analyze(&matrix, &out, &["--mode", "control", "--alpha", "1.5"]);
    assert_eq!(bad_alpha.status.code(), Some(1));
    let bad_pi0 = analyze(&matrix, &out, &["--pi0", "2"]);
    assert_eq!(bad_pi0.status.code(), Some(1));
    let zero_b = dfdr(&["analyze", "--matrix", m, "--group-a", "A", "--group-b", "B", "--permutations", "0", "--out", out_s]);
    assert_eq!(zero_b.status.code(), Some(1));
    let no_group = dfdr(&["analyze", "--matrix", m, "--group-a", "A", "--group-b", "Z", "--out", out_s]);
    assert_eq!(no_group.status.code(), Some(2));
    let missing = dfdr(&["analyze", "--matrix", "/nonexistent/x.tsv", "--group-a", "A", "--group-b", "B", "--out", out_s]);
    assert_eq!(missing.status.code(), Some(2));

    let ragged = dir.path().join("ragged.tsv");
    fs::write(&ragged, "id\ts1:A\ts2:A\ts3:B\ts4:B\ng1\t1\t2\t3\ng2\t1\t2\t3\t4\n").unwrap();
    let o = dfdr(&["analyze", "--matrix", ragged.to_str().unwrap(), "--group-a", "A", "--group-b", "B", "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ragged.tsv:2:"));

    let bad_p = dir.path().join("p.txt");
    fs::write(&bad_p, "0.1\n1.2\n").unwrap();
    let o = dfdr(&["analyze", "--pvalues", bad_p.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_report_with_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = dfdr(&[
        "simulate", "--m", "400", "--replicates", "10", "--permutations", "10", "--seed", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.tsv")).unwrap();
    assert!(report.starts_with("rule\tmetric\tvalue\n"));
    assert!(report.contains("maximize\tverdict_conditional_prob\t"));
    assert!(report.contains("maximize\tverdict_boundary_bin\t"));

    let again = dir.path().join("sim2");
    let o = dfdr(&[
        "simulate", "--m", "400", "--replicates", "10", "--permutations", "10", "--seed", "3",
        "--out", again.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(report, fs::read_to_string(again.join("report.tsv")).unwrap());

    let zero = dfdr(&["simulate", "--replicates", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn reproduce_without_data_explains_download() {
    let dir = tempfile::tempdir().unwrap();
    let o = dfdr(&["reproduce", "--matrix", dir.path().join("golub.tsv").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing input file"));
    assert!(err.contains("Download"));
}
