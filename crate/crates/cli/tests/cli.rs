use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lowdeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowdeg"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn file(dir: &TempDir, name: &str, body: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sample_poly_needs_a_seed_and_is_deterministic() {
    assert_eq!(code(&lowdeg(&["sample-poly", "--n", "4", "--d", "2"])), 2);
    let a = lowdeg(&["--seed", "5", "sample-poly", "--n", "4", "--d", "2"]);
    let b = lowdeg(&["--seed", "5", "sample-poly", "--n", "4", "--d", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let f = stdout_json(&a);
    assert_eq!(f["n"], 4);
    assert_eq!(f["d"], 2);
}

#[test]
fn polynomial_files_are_validated() {
    let dir = TempDir::new().unwrap();
    let src = file(
        &dir,
        "s.json",
        r#"{"type":"flat","n":2,"support":["00","11"]}"#,
    );
    let good = file(&dir, "f.json", r#"{"n":2,"d":2,"monomials":[[0,1]]}"#);
    let out = lowdeg(&["bias", "--poly", &good, "--source", &src]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let bad = file(&dir, "g.json", r#"{"n":2,"d":2,"monomials":[[0,0]]}"#);
    let out = lowdeg(&["bias", "--poly", &bad, "--source", &src]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn set_files_accept_json_and_lines() {
    let dir = TempDir::new().unwrap();
    let json = file(&dir, "a.json", r#"["0101","1100","0000"]"#);
    let text = file(&dir, "a.txt", "# points\n0101\n1100\n\n0000\n");
    let a = lowdeg(&["rank", "--set", &json, "--d", "1"]);
    let b = lowdeg(&["rank", "--set", &text, "--d", "1"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["rank"], 3);
    let broken = file(&dir, "b.txt", "0101\n01x1\n");
    assert_eq!(code(&lowdeg(&["rank", "--set", &broken, "--d", "1"])), 2);
}

#[test]
fn full_rank_check_sets_exit_code() {
    let dir = TempDir::new().unwrap();
    let all = file(&dir, "all.json", r#"["00","01","10","11"]"#);
    let zero = file(&dir, "z.json", r#"["00"]"#);
    let pair = file(&dir, "pair.json", r#"["00","01"]"#);
    assert_eq!(
        code(&lowdeg(&[
            "rank", "--set", &all, "--other", &zero, "--d", "2"
        ])),
        0
    );
    assert_eq!(
        code(&lowdeg(&[
            "rank", "--set", &pair, "--other", &pair, "--d", "1"
        ])),
        1
    );
}

#[test]
fn experiments_report_verdicts_through_exit_codes() {
    let ok = lowdeg(&[
        "--seed",
        "1",
        "experiment",
        "moment-identity",
        "--trials",
        "1",
    ]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(stdout_json(&ok)["verdict"], "pass");
    assert_eq!(
        code(&lowdeg(&["--seed", "1", "experiment", "no-such-thing"])),
        2
    );
    assert_eq!(code(&lowdeg(&["experiment", "moment-identity"])), 2);

    let dir = TempDir::new().unwrap();
    let cfg = file(
        &dir,
        "c.json",
        r#"{"experiment":"disperser-attack","seed":3,"trials":2,"params":{"n":4,"t":2,"budget":0}}"#,
    );
    let out = file(&dir, "r.csv", "");
    let failed = lowdeg(&[
        "--format",
        "csv",
        "--out",
        &out,
        "experiment",
        "disperser-attack",
        "--config",
        &cfg,
    ]);
    assert_eq!(code(&failed), 1);
    assert!(fs::read_to_string(&out)
        .unwrap()
        .trim_end()
        .ends_with("# verdict,fail,"));
    assert_eq!(
        code(&lowdeg(&["experiment", "dichotomy", "--config", &cfg])),
        2
    );
}

#[test]
fn constructions_and_oracles_run() {
    let dir = TempDir::new().unwrap();
    let two = lowdeg(&["--seed", "2", "construct", "two-source", "--n", "4"]);
    assert_eq!(code(&two), 0);
    assert_eq!(stdout_json(&two)["r"], 44);
    let seeded = lowdeg(&[
        "--seed",
        "2",
        "construct",
        "seeded",
        "--n",
        "6",
        "--t",
        "4",
        "--d",
        "2",
    ]);
    assert_eq!(
        code(&seeded),
        0,
        "{}",
        String::from_utf8_lossy(&seeded.stderr)
    );

    let x = file(&dir, "x.json", r#"["000","001","010"]"#);
    let e = lowdeg(&["oracle", "energy", "--x", &x, "--y", &x]);
    assert_eq!(code(&e), 0);
    assert_eq!(stdout_json(&e)["energy"], "21");

    let ip = file(
        &dir,
        "ip.json",
        r#"{"n":4,"d":2,"monomials":[[0,2],[1,3]]}"#,
    );
    let attack = lowdeg(&[
        "--seed", "9", "oracle", "attack", "--poly", &ip, "--t", "1", "--budget", "200",
    ]);
    assert_eq!(
        code(&attack),
        0,
        "{}",
        String::from_utf8_lossy(&attack.stderr)
    );
    let w = stdout_json(&attack);
    assert_eq!(w["verified"], true);
    assert_eq!(w["seed"], 9);
}
