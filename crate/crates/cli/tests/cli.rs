use std::process::{Command, Output};

fn wallsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wallsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn transition_csv_has_exact_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p1.csv");
    let out = wallsim(&[
        "transition",
        "--level",
        "1",
        "--q",
        "1/2",
        "--cap",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["lambda", "beta", "value_num", "value_den"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 16);
    // R(0,1) = (1-q)/(1+q) * 2q = 1/3 at q = 1/2
    let r01 = rows.iter().find(|r| &r[0] == "0" && &r[1] == "1").unwrap();
    assert_eq!((&r01[2], &r01[3]), ("1", "3"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let out = wallsim(&[
            "simulate",
            "--alpha",
            "1",
            "--levels",
            "3",
            "--steps",
            "5",
            "--trajectories",
            "3",
            "--seed",
            "9",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 3 * 6);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["trajectory"], 0);
}

#[test]
fn kernel_reports_packed_start() {
    let out = wallsim(&["kernel", "--q", "1/3", "--steps", "0", "--points", "2:0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["correlation"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn verify_fast_suites_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = wallsim(&[
        "verify",
        "--suite",
        "identity,vanishing,worked-example",
        "--max-level",
        "3",
        "--max-part",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(report["all_blocking_passed"], true);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        wallsim(&["transition", "--level", "1", "--q", "1/2", "--alpha", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        wallsim(&["verify", "--suite", "unknown"]).status.code(),
        Some(2)
    );
    assert_eq!(wallsim(&["simulate", "--q", "3/2"]).status.code(), Some(2));
    assert_eq!(
        wallsim(&["kernel", "--points", "1:0", "--contour-radius", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn surface_heights_are_monotone() {
    let out = wallsim(&[
        "export-surface",
        "--levels",
        "4",
        "--steps",
        "6",
        "--max-site",
        "8",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in v["height"].as_array().unwrap() {
        let h: Vec<u64> = row
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert!(h.windows(2).all(|w| w[0] >= w[1]));
    }
}
