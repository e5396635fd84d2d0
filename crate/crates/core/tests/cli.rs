use std::process::{Command, Output};

fn hypharm(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hypharm"));
    cmd.args(args).env_remove("HYPHARM_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn constant_example() {
    let out = hypharm(
        &["constant", "--n", "3", "--q", "2", "--radius", "0.5"],
        &[],
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "hypharm/1");
    assert!((v["result"]["C_q_x"].as_f64().unwrap() - 91.0 / 48.0).abs() < 1e-13);
}

#[test]
fn verify_sharpness_example() {
    let out = hypharm(
        &[
            "verify",
            "--n",
            "3",
            "--suite",
            "sharpness",
            "--p",
            "2",
            "--radius",
            "0.5",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(
        hypharm(&["constant", "--q", "2", "--radius", "1.5"], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        hypharm(&["constant", "--p", "2", "--q", "2"], &[])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        hypharm(&["verify", "--n", "5", "--suite", "harmonicity"], &[])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(hypharm(&["--version"], &[]).status.code(), Some(0));
    assert_eq!(
        hypharm(&["table"], &[("HYPHARM_THREADS", "zero")])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn output_is_independent_of_thread_count() {
    let args = [
        "verify",
        "--suite",
        "validity",
        "--method",
        "monte-carlo",
        "--nodes",
        "5000",
        "--seed",
        "7",
    ];
    let one = hypharm(&args, &[("HYPHARM_THREADS", "1")]);
    let many = hypharm(&args, &[("HYPHARM_THREADS", "4")]);
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, many.stdout);
    let t1 = hypharm(
        &["table", "--radii", "0,0.3,0.6,0.9"],
        &[("HYPHARM_THREADS", "1")],
    );
    let t4 = hypharm(
        &["table", "--radii", "0,0.3,0.6,0.9"],
        &[("HYPHARM_THREADS", "4")],
    );
    assert_eq!(t1.stdout, t4.stdout);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = hypharm(
        &[
            "table",
            "--q-values",
            "2",
            "--radii",
            "0.5",
            "--output",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(
        text.starts_with("n,q,p,radius,C_q_x,C_q_sup,bound_pointwise,bound_uniform\n3,2,2,0.5,")
    );
}

#[test]
fn json_table_and_csv_reports() {
    let out = hypharm(
        &[
            "table",
            "--format",
            "json",
            "--q-values",
            "1",
            "--radii",
            "0.5",
        ],
        &[],
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["rows"][0]["p"], "inf");
    let out = hypharm(
        &["bound", "--q", "2", "--radius", "0.5", "--format", "csv"],
        &[],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("result.bound_pointwise,"));
}
