// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `permquery` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use permquery::formats::parse_circuit;
use permquery_core::inversion::{decider_circuit, iteration_circuit_for, iteration_layout};
use permquery_core::oracle_sim::Construction;

fn permquery(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permquery"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = permquery(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Header-keyed records from CSV text.
fn records(csv_text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().map(String::from).zip(r.iter().map(String::from)).collect()
        })
        .collect()
}

fn problem(name: &str) -> String {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.push("../../problems");
    path.push(name);
    path.to_string_lossy().into_owned()
}

#[test]
fn invert_at_four_elements_succeeds_with_certainty() {
    let rows = records(&stdout(&["invert", "--n", "2", "--seed", "1", "--mode", "postselect-exact"]));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["T"], "2");
    assert_eq!(rows[0]["seed"], "1");
    let p: f64 = rows[0]["success_prob"].parse().unwrap();
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn invert_reads_a_permutation_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    std::fs::write(&path, "3\n5 3 0 7 1 2 6 4\n").unwrap();
    let p = path.to_str().unwrap();
    let rows = records(&stdout(&["invert", "--perm", p, "--target", "7", "--mode", "postselect-exact"]));
    assert_eq!(rows[0]["n"], "3");
    assert_eq!(rows[0]["preimage"], "3");
    assert_eq!(rows[0]["queries"], "7");
    assert_eq!(permquery(&["invert", "--perm", p, "--n", "4"]).status.code(), Some(2));
    std::fs::write(&path, "2\n0 0 1 2\n").unwrap();
    assert_eq!(permquery(&["invert", "--perm", p]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_for_equal_seeds() {
    for args in [
        vec!["invert", "--n", "5", "--seed", "9"],
        vec!["sweep", "--n", "2..5", "--trials", "30", "--seed", "4"],
        vec!["garb", "--n", "2", "--instances", "20", "--seed", "4"],
        vec!["adversary", "--kind", "phase", "--budget", "20", "--samples", "20", "--seed", "4"],
    ] {
        let mut args = args;
        let path = problem("n2_eight.txt");
        if args[0] == "adversary" {
            args.extend(["--problem", path.as_str()]);
        }
        let a = permquery(&args);
        let b = permquery(&[args.as_slice(), &["--jobs", "1"]].concat());
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn json_mirrors_csv_columns() {
    let csv_rows = records(&stdout(&["garb", "--n", "2", "--instances", "10", "--seed", "3"]));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["garb", "--n", "2", "--instances", "10", "--seed", "3", "--json"])).unwrap();
    let object = json.as_array().unwrap()[0].as_object().unwrap();
    let mut json_keys: Vec<&String> = object.keys().collect();
    let mut csv_keys: Vec<&String> = csv_rows[0].keys().collect();
    json_keys.sort();
    csv_keys.sort();
    assert_eq!(json_keys, csv_keys);
    assert_eq!(object["accuracy"].as_f64().unwrap(), 1.0);
}

#[test]
fn out_and_dump_circuit_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let circuit = dir.path().join("circuit.txt");
    let printed = stdout(&[
        "invert",
        "--n",
        "3",
        "--target",
        "6",
        "--out",
        out.to_str().unwrap(),
        "--dump-circuit",
        circuit.to_str().unwrap(),
    ]);
    assert!(printed.is_empty());
    assert_eq!(records(&std::fs::read_to_string(&out).unwrap()).len(), 1);
    let parsed = parse_circuit(&std::fs::read_to_string(&circuit).unwrap()).unwrap();
    assert_eq!(parsed, iteration_circuit_for(&iteration_layout(3).unwrap(), 6).unwrap());

    stdout(&["garb", "--n", "3", "--instances", "2", "--dump-circuit", circuit.to_str().unwrap()]);
    let parsed = parse_circuit(&std::fs::read_to_string(&circuit).unwrap()).unwrap();
    assert_eq!(parsed, decider_circuit(3).unwrap());

    stdout(&["simulate-oracle", "--kind", "xor", "--n", "2", "--dump-circuit", circuit.to_str().unwrap()]);
    let parsed = parse_circuit(&std::fs::read_to_string(&circuit).unwrap()).unwrap();
    assert_eq!(parsed, Construction::Xor.build(2).unwrap());
}

#[test]
fn sweep_has_one_row_per_width() {
    let rows = records(&stdout(&["sweep", "--n", "2..8", "--trials", "100"]));
    assert_eq!(rows.len(), 7);
    for (row, n) in rows.iter().zip(2..) {
        assert_eq!(row["n"], n.to_string());
        assert_eq!(row["N"], (1u64 << n).to_string());
        assert_eq!(row["seed"], "0");
    }
}

/// Each row's 3σ test fails with probability near 0.3% when the analytic
/// rate is right. Over 20 seeds (140 rows) the expected count is below one;
/// more than three misses would be strong evidence of a wrong rate.
#[test]
fn sweep_empirical_rates_track_the_analytic_rate() {
    let mut outside = 0;
    let mut rows_seen = 0;
    for seed in 0..20 {
        let seed = seed.to_string();
        for row in records(&stdout(&["sweep", "--n", "2..8", "--trials", "100", "--seed", &seed])) {
            rows_seen += 1;
            outside += (row["within_3sigma"] == "false") as usize;
        }
    }
    assert_eq!(rows_seen, 140);
    assert!(outside <= 3, "{outside} rows outside 3 sigma");
}

#[test]
fn simulate_xor_at_three_qubits_is_inside_the_envelope() {
    let rows = records(&stdout(&["simulate-oracle", "--kind", "xor", "--n", "3", "--seed", "5"]));
    let max: f64 = rows[0]["max_trace_distance"].parse().unwrap();
    let envelope: f64 = rows[0]["envelope"].parse().unwrap();
    assert!((envelope - 2.0 * (3.0f64 / 8.0).sqrt()).abs() < 1e-12);
    assert!(max <= envelope);
    assert_eq!(rows[0]["inputs"], "64");
    let all = records(&stdout(&["simulate-oracle", "--kind", "all", "--n", "2..3"]));
    assert_eq!(all.len(), 10);
    assert!(all.iter().all(|r| r["within_envelope"] == "true"));
}

#[test]
fn erase_reports_an_exact_reduction() {
    let rows = records(&stdout(&["erase", "--n", "2..3", "--seed", "8"]));
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["reduction_queries"], "1");
        assert!(row["reduction_max_error"].parse::<f64>().unwrap() < 1e-12);
        assert_eq!(row["within_envelope"], "true");
    }
}

#[test]
fn garb_at_three_qubits_is_accurate() {
    let rows = records(&stdout(&["garb", "--n", "3", "--instances", "500", "--seed", "1"]));
    assert!(rows[0]["accuracy"].parse::<f64>().unwrap() >= 0.95);
    assert_eq!(rows[0]["grover_iterations"], "2");
}

#[test]
fn adversary_checks_pass_on_bundled_problems() {
    for file in ["swap.txt", "n2_eight.txt", "n3_twelve.txt"] {
        for kind in ["phase", "inplace"] {
            let path = problem(file);
            let rows = records(&stdout(&[
                "adversary", "--problem", &path, "--kind", kind, "--budget", "30", "--samples", "100",
            ]));
            let row = &rows[0];
            assert_eq!(row["kind"], kind);
            for check in ["support_lemma", "three_times_bound", "bipartite_spectrum", "schur_envelope"] {
                assert_eq!(row[check], "true", "{file} {kind} {check}");
            }
            assert!(row["best_value"].parse::<f64>().unwrap() > 0.0);
        }
    }
}

#[test]
fn extended_search_is_never_worse() {
    let path = problem("n2_eight.txt");
    let value = |extra: &[&str]| -> f64 {
        let args = [&["adversary", "--problem", &path, "--kind", "inplace", "--budget", "40", "--samples", "1"][..], extra].concat();
        records(&stdout(&args))[0]["best_value"].parse().unwrap()
    };
    assert!(value(&["--extended"]) >= value(&[]));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| permquery(args).status.code();
    assert_eq!(code(&["invert", "--n", "2"]), Some(0));
    assert_eq!(code(&[]), Some(2));
    assert_eq!(code(&["invert", "--n", "2", "--seed", "-1"]), Some(2));
    assert_eq!(code(&["simulate-oracle", "--kind", "nope", "--n", "2"]), Some(2));
    let path = problem("swap.txt");
    assert_eq!(code(&["adversary", "--problem", &path, "--kind", "phase", "--dump-circuit", "/tmp/x"]), Some(2));
    assert_eq!(code(&["invert", "--n", "40"]), Some(1));
    let err = String::from_utf8(permquery(&["sweep", "--n", "0..3"]).stderr).unwrap();
    assert!(err.contains("Usage") || err.contains("usage") || err.contains("--help"), "{err}");
}
