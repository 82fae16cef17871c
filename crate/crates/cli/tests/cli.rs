//! Exit-code and plumbing contracts of the command-line interface.

use std::process::{Command, Output};

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_inframargin"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn unknown_preset_exits_2_naming_valid_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "simulate",
            "--preset",
            "S9",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("S1") && err.contains("S5"), "stderr: {err}");
}

#[test]
fn missing_out_exits_2() {
    let out = run(&["simulate", "--preset", "S1"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--out"));
}

#[test]
fn malformed_csv_exits_2_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(
        &csv,
        "id,group,weight,p_star,y_star,u\n0,0,0.5,0.4,1,1.0\n1,0,0.5,not-a-number,0,2.0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &[
            "optimize",
            "--input",
            csv.to_str().unwrap(),
            "--eta",
            "0.1",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 3"), "stderr: {}", stderr(&out));
}

#[test]
fn audit_without_probabilities_requires_proxy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sampled.csv");
    std::fs::write(
        &csv,
        "id,group,weight,p_star,y_star,u\n0,0,0.5,,1,1.0\n1,1,0.5,,0,2.0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &[
            "audit",
            "--input",
            csv.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--proxy"), "stderr: {}", stderr(&out));
}

#[test]
fn empty_gamma_list_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "tradeoff",
            "--preset",
            "S2",
            "--n",
            "200",
            "--gammas",
            " , ",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn environment_variables_match_flags() {
    let dir = tempfile::tempdir().unwrap();
    let flag_out = dir.path().join("flag");
    let env_out = dir.path().join("env");
    let a = run(
        &[
            "simulate",
            "--preset",
            "S3",
            "--n",
            "300",
            "--seed",
            "17",
            "--out",
            flag_out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(a.status.success());
    let b = run(
        &[
            "simulate",
            "--preset",
            "S3",
            "--out",
            env_out.to_str().unwrap(),
        ],
        &[("INFRAMARGIN_SEED", "17"), ("INFRAMARGIN_N", "300")],
    );
    assert!(b.status.success(), "{}", stderr(&b));
    let left = std::fs::read(flag_out.join("s3.csv")).unwrap();
    let right = std::fs::read(env_out.join("s3.csv")).unwrap();
    assert_eq!(left, right);
}

#[test]
fn rerun_from_recorded_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let first = run(
        &[
            "audit",
            "--preset",
            "S2",
            "--n",
            "500",
            "--seed",
            "3",
            "--classifier",
            "fair",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(first.status.success(), "{}", stderr(&first));
    let snapshot: Vec<(std::path::PathBuf, Vec<u8>)> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    assert!(!snapshot.is_empty());
    let config = out_dir.join("audit_config.json");
    let again = run(&["audit", "--config", config.to_str().unwrap()], &[]);
    assert!(again.status.success(), "{}", stderr(&again));
    for (path, before) in snapshot {
        assert_eq!(std::fs::read(&path).unwrap(), before, "{path:?} changed");
    }
}

#[test]
fn simulate_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let out = run(
        &[
            "simulate",
            "--preset",
            "S5",
            "--n",
            "250",
            "--seed",
            "2",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    assert!(out_dir.join("s5.csv").exists());
    assert!(out_dir.join("s5.meta.json").exists());
    assert!(out_dir.join("simulate_config.json").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("s5.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["preset"], "S5");
    assert_eq!(meta["seed"], 2);
    assert_eq!(meta["rng"], "chacha8/splitmix64-v1");
    assert!(meta["spec"]["gaussians"].is_array());
}

#[test]
fn audit_of_fair_classifier_reports_zero_eta() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("aud");
    let out = run(
        &[
            "audit",
            "--preset",
            "S1",
            "--n",
            "400",
            "--seed",
            "1",
            "--classifier",
            "fair",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["eta"], 0.0);
}

#[test]
fn nonexistent_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "audit",
            "--input",
            "/nonexistent/data.csv",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_file_path_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let schema_path = dir.path().join("schema.json");
    std::fs::write(
        &schema_path,
        inframargin::ingest::ColumnSchema::adult_default().to_json(),
    )
    .unwrap();
    let data = dir.path().join("tiny.csv");
    std::fs::write(
        &data,
        "age,education,race,sex,income\n39,Bachelors,White,Male,<=50K\n45,HS-grad,Black,Female,>50K\n50,Masters,White,Female,<=50K\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(
        &[
            "audit",
            "--input",
            data.to_str().unwrap(),
            "--schema",
            schema_path.to_str().unwrap(),
            "--proxy",
            "full",
            "--classifier",
            "bayes",
            "--grid",
            "21",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("metrics.csv").exists());
}
