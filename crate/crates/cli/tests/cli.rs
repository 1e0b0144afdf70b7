use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Re-runs the command recorded in the first line of `path`.
fn rerun_from_header(path: &Path) -> Vec<u8> {
    let text = fs::read(path).unwrap();
    let first = text
        .split(|&b| b == b'\n')
        .find(|l| l.starts_with(b"# "))
        .unwrap();
    let first = String::from_utf8(first.to_vec()).unwrap();
    let (_, invocation) = first
        .split_once(" | ")
        .expect("header records the invocation");
    let mut words = invocation.split(' ');
    assert_eq!(words.next(), Some("qdep"));
    let args: Vec<&str> = words.collect();
    fs::remove_file(path).unwrap();
    let out = qdep(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    fs::read(path).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(qdep(&["kp-table", "--p", "4"]).status.code(), Some(0));
    assert_eq!(qdep(&["--help"]).status.code(), Some(0));
    // usage errors
    assert_eq!(qdep(&["kp-table", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        qdep(&["classify", "--family", "clayton"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qdep(&["bounds", "--family", "independence", "--beta", "cubic"])
            .status
            .code(),
        Some(2)
    );
    // domain errors
    assert_eq!(
        qdep(&["classify", "--family", "gg", "--alpha", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qdep(&["classify", "--family", "fgm", "--theta", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qdep(&[
            "moment-bound",
            "--a",
            "1",
            "--A",
            "0",
            "--p",
            "2",
            "--unknown-mean"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn csv_surface_reproduces_from_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let p = path.to_str().unwrap();
    let out = qdep(&[
        "surface",
        "--family",
        "mix:frechet",
        "--alpha",
        "0.5",
        "--grid",
        "60",
        "--out",
        p,
    ]);
    json_of(&out);
    let original = fs::read(&path).unwrap();
    assert_eq!(rerun_from_header(&path), original);
}

#[test]
fn curve_and_table_reproduce_from_their_headers() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("c.csv");
    json_of(&qdep(&[
        "qde-curve",
        "--family",
        "fgm",
        "--theta",
        "-0.5",
        "--points",
        "51",
        "--out",
        curve.to_str().unwrap(),
    ]));
    let original = fs::read(&curve).unwrap();
    assert_eq!(rerun_from_header(&curve), original);
    let text = String::from_utf8(original).unwrap();
    assert_eq!(text.lines().nth(1), Some("v,qde"));
    assert_eq!(text.lines().count(), 53);

    let table = dir.path().join("k.csv");
    assert!(
        qdep(&["kp-table", "--p", "1..12", "--out", table.to_str().unwrap()])
            .status
            .success()
    );
    let original = fs::read(&table).unwrap();
    assert_eq!(rerun_from_header(&table), original);
}

#[test]
fn pgm_surface_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.pgm");
    json_of(&qdep(&[
        "surface",
        "--family",
        "gg",
        "--alpha",
        "0.7",
        "--grid",
        "40",
        "--out",
        path.to_str().unwrap(),
    ]));
    let original = fs::read(&path).unwrap();
    let text = String::from_utf8(original.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert!(lines.next().unwrap().starts_with("# qdep "));
    let dims = lines.next().unwrap();
    let n: usize = dims.split(' ').next().unwrap().parse().unwrap();
    assert_eq!(dims, format!("{n} {n}"));
    assert_eq!(lines.next(), Some("255"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), n);
    for row in rows {
        let vals: Vec<u32> = row.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert_eq!(vals.len(), n);
        assert!(vals.iter().all(|v| *v <= 255));
    }
    assert_eq!(rerun_from_header(&path), original);
}

#[test]
fn frechet_mixture_surfaces_take_both_signs() {
    let dir = tempfile::tempdir().unwrap();
    for alpha in ["0.25", "0.5", "0.75"] {
        let path = dir.path().join(format!("m{alpha}.csv"));
        let v = json_of(&qdep(&[
            "surface",
            "--family",
            "mix:frechet",
            "--alpha",
            alpha,
            "--grid",
            "400",
            "--out",
            path.to_str().unwrap(),
        ]));
        assert!(v["positive"].as_u64().unwrap() > 0, "alpha={alpha}");
        assert!(v["negative"].as_u64().unwrap() > 0, "alpha={alpha}");
        assert_eq!(v["header"]["command"], "surface");
    }
}

#[test]
fn thresholds_report() {
    let v = json_of(&qdep(&["thresholds", "--family", "mix:frechet"]));
    for key in ["m", "m_prime", "M_prime", "M"] {
        assert!(v[key].is_number(), "{key}: {v}");
    }
    assert!((v["m_prime"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
    assert!((v["M_prime"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
    assert!((v["kappa"]["kappa"].as_f64().unwrap() - 0.5).abs() <= 1e-8);
    assert_eq!(
        v["header"]["invocation"],
        "qdep thresholds --family mix:frechet --tol 0.000001"
    );
    assert_eq!(
        qdep(&["thresholds", "--family", "fgm"]).status.code(),
        Some(2)
    );
}

#[test]
fn example3_and_mc_check_record_their_seed() {
    let v = json_of(&qdep(&["example3", "--alpha", "0.7", "--seed", "7"]));
    assert_eq!(v["header"]["seed"], 7);
    assert_eq!(v["pair_pqde"], true);
    assert_eq!(v["pair_not_pqd"], true);
    for atom in v["atoms"].as_array().unwrap() {
        assert!(atom["z_score"].as_f64().unwrap().abs() <= 4.0, "{atom}");
    }
    let v = json_of(&qdep(&[
        "mc-check",
        "--family",
        "frechet-upper",
        "--n",
        "100000",
        "--seed",
        "3",
    ]));
    assert_eq!(v["header"]["seed"], 3);
    assert!(v["z_score"].as_f64().unwrap().abs() <= 4.0);
    assert!((v["quadrature"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-10);
}

#[test]
fn moment_bound_json() {
    let v = json_of(&qdep(&[
        "moment-bound",
        "--a",
        "0",
        "--A",
        "1",
        "--p",
        "4",
        "--mu-lo",
        "0.2",
        "--mu-hi",
        "0.3",
    ]));
    assert!((v["bound"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-12);
    let v = json_of(&qdep(&[
        "moment-bound",
        "--a",
        "-1",
        "--A",
        "1",
        "--p",
        "2",
        "--symmetric",
    ]));
    assert!((v["bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
