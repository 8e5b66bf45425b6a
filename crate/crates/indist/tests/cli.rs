//! End-to-end tests of the installed binary: exit codes, file schemas,
//! byte-identical reproducibility, and the documented example invocations.

use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn indist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indist"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn construct_exact_round_trips() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let out = indist(&[
        "construct", "--n", "3", "--eps", "1", "--mode", "exact", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&path).unwrap();
    // metadata line plus one line per atom of the 1024-atom joint
    assert_eq!(text.lines().count(), 1025);
    let reparsed = indist::io::read_dist(text.as_bytes()).unwrap();
    let direct = indist::construction::build_n3_exact(
        &indist::rational::rat_int(1),
        indist::construction::DEFAULT_ENUM_CAP,
    )
    .unwrap();
    assert_eq!(reparsed, direct);
}

#[test]
fn identical_argv_and_seed_are_byte_identical() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = indist(&[
            "construct", "--n", "4", "--eps", "1/2", "--mode", "sample", "--samples", "25",
            "--seed", "7", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read_to_string(&a).unwrap().lines().count(), 25);
}

#[test]
fn tvd_of_identical_files_is_zero() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let out = indist(&[
        "construct", "--n", "2", "--eps", "1/4", "--mode", "exact", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = indist(&["tvd", "--a", path.to_str().unwrap(), "--b", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0/1");
}

#[test]
fn project_writes_a_valid_marginal() {
    let dir = tempdir().unwrap();
    let full = dir.path().join("full.jsonl");
    let marg = dir.path().join("marg.jsonl");
    indist(&[
        "construct", "--n", "2", "--eps", "1/3", "--mode", "exact", "--out",
        full.to_str().unwrap(),
    ]);
    let out = indist(&[
        "project", "--dist", full.to_str().unwrap(), "--indices", "1", "--out",
        marg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let d = indist::io::read_dist(fs::read_to_string(&marg).unwrap().as_bytes()).unwrap();
    assert_eq!(d.support_len(), 3);
    assert_eq!(d.arity(), Some(1)); // single-coordinate marginal
}

#[test]
fn audit_injection_exits_3() {
    let out = indist(&["audit", "--inject", "eps_star=1/10,n=3,max=100"]);
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("report json on stdout");
    assert_eq!(report["verdict"], "violation");
    assert_eq!(report["bound"]["tower_height"], 1);

    // the honest variant is consistent and exits 0
    let out = indist(&["audit", "--inject", "eps_star=1/10,n=3,max=2000"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn audit_of_constructed_distribution_is_consistent() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    indist(&[
        "construct", "--n", "2", "--eps", "1/4", "--mode", "exact", "--out",
        path.to_str().unwrap(),
    ]);
    let out = indist(&["audit", "--dist", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "consistent");
    assert_eq!(report["eps_star"], "1/4");
}

#[test]
fn capacity_errors_exit_2() {
    // n=3 at eps=1/2 predicts 28672 atoms; a lower cap must refuse
    let out = indist(&[
        "construct", "--n", "3", "--eps", "1/2", "--mode", "exact", "--cap", "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // the environment variable sets the default cap the same way
    let out = Command::new(env!("CARGO_BIN_EXE_indist"))
        .args(["construct", "--n", "3", "--eps", "1/2", "--mode", "exact"])
        .env("INDIST_ENUM_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_and_parse_errors_exit_1() {
    // malformed epsilon
    assert_eq!(
        indist(&["construct", "--n", "2", "--eps", "nope", "--mode", "exact"]).status.code(),
        Some(1)
    );
    // epsilon out of range
    assert_eq!(
        indist(&["construct", "--n", "2", "--eps", "3", "--mode", "exact"]).status.code(),
        Some(1)
    );
    // unknown flag
    assert_eq!(indist(&["construct", "--bogus"]).status.code(), Some(1));
    // missing subcommand arguments
    assert_eq!(indist(&["tvd"]).status.code(), Some(1));
    // help and version are successes
    assert_eq!(indist(&["--help"]).status.code(), Some(0));
    assert_eq!(indist(&["--version"]).status.code(), Some(0));
}

#[test]
fn certificate_prints_constants() {
    let out = indist(&["certificate", "--n", "3", "--eps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["bound"], "1010");
    assert_eq!(cert["spacing_threshold"], "7/1");
    assert_eq!(cert["neighbor_bound"], "7/8");

    let out = indist(&["certificate", "--n", "5", "--eps", "1"]);
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bound = cert["bound"].as_str().unwrap();
    assert!(bound.starts_with("2^"), "symbolic bound, got {bound}");
}

#[test]
fn solve_reports_certified_interval() {
    let out = indist(&[
        "solve", "--game", "2", "--n", "2", "--n-horizon", "3", "--tol", "0.005",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = report["value"].as_f64().unwrap();
    assert!((value - 0.5).abs() <= 0.005, "value {value}");
    assert_eq!(report["converged"], true);
    assert!(report["dealer"].as_array().unwrap().len() >= 1);
}

#[test]
fn bet_reports_estimate_and_exact_tvd() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    indist(&["construct", "--n", "2", "--eps", "1/2", "--mode", "exact", "--out", a.to_str().unwrap()]);
    indist(&["construct", "--n", "2", "--eps", "1/4", "--mode", "exact", "--out", b.to_str().unwrap()]);
    let out = indist(&[
        "bet", "--dist-a", a.to_str().unwrap(), "--dist-b", b.to_str().unwrap(),
        "--trials", "20000", "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let est = report["estimate"].as_f64().unwrap();
    let se = report["stderr"].as_f64().unwrap();
    let exact = report["exact_tvd"].as_str().unwrap();
    let (p, q) = exact.split_once('/').unwrap();
    let exact = p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap();
    assert!((est - exact).abs() <= 3.0 * se + 1e-9);
}

#[test]
fn sample_mode_emits_symbolic_records_at_n5() {
    let out = indist(&[
        "construct", "--n", "5", "--eps", "1", "--mode", "sample", "--samples", "2",
        "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["symbolic"]["arity"], 5);
        assert_eq!(rec["symbolic"]["gap_exponents"].as_array().unwrap().len(), 4);
    }
}
