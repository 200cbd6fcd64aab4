use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdsim"))
        .args(args)
        .env_remove("RDSIM_THREADS")
        .output()
        .expect("binary runs")
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> String {
    tmp.path().join(name).to_str().unwrap().to_string()
}

fn manifest(dir: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(Path::new(dir).join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_outputs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "run");
    let o = rdsim(&["run", "--preset", "base_parallel", "--seed", "42", "--out", &dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir);
    let names: Vec<&str> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    for f in ["trace.csv", "events.json", "metrics.csv", "metrics.json"] {
        assert!(names.contains(&f), "{f} missing");
        assert!(Path::new(&dir).join(f).is_file());
    }
    assert_eq!(m["seed"], 42);
    assert_eq!(m["arguments"]["preset"], "base_parallel");

    let csv = fs::read_to_string(Path::new(&dir).join("metrics.csv")).unwrap();
    assert!(csv.starts_with("metric,value,unit\n"));
    let trace = fs::read_to_string(Path::new(&dir).join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,time,open,"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "same");
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        assert!(
            rdsim(&["run", "--preset", "base_sequential", "--seed", "7", "--out", &dir])
                .status
                .success()
        );
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn montecarlo_writes_curve_and_rejects_single_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "mc");
    let o = rdsim(&[
        "montecarlo",
        "--preset",
        "base_parallel",
        "--runs",
        "10",
        "--seed",
        "3",
        "--out",
        &dir,
    ]);
    assert!(o.status.success());
    let curve = fs::read_to_string(Path::new(&dir).join("maturity.csv")).unwrap();
    assert!(curve.starts_with("time,maturity_raw,maturity_smoothed,mu_hat,sigma,nu\n"));
    let runs = fs::read_to_string(Path::new(&dir).join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 12);
    assert!(runs.lines().last().unwrap().starts_with("mean,"));

    let o = rdsim(&[
        "montecarlo",
        "--preset",
        "base_parallel",
        "--runs",
        "1",
        "--out",
        &out_dir(&tmp, "one"),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("cycle.json");
    fs::write(
        &bad,
        r#"{"deadline": 10, "team": {"size": 1}, "tasks": [
            {"id": 1, "effort": 1, "rework_probability": 0, "dependencies": [2]},
            {"id": 2, "effort": 1, "rework_probability": 0, "dependencies": [1]}]}"#,
    )
    .unwrap();
    let o = rdsim(&["run", "--scenario", bad.to_str().unwrap(), "--out", &out_dir(&tmp, "x")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CYCLE"));

    let o = rdsim(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = rdsim(&[
        "run",
        "--preset",
        "base_parallel",
        "--rework-fraction",
        "0",
        "--out",
        &out_dir(&tmp, "y"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("RANGE"));

    let o = rdsim(&["run", "--preset", "team_size_sweep", "--out", &out_dir(&tmp, "z")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let o = rdsim(&["run", "--preset", "base_parallel", "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(blocker.to_str().unwrap()));

    let o = rdsim(&[
        "validate",
        "--scenario",
        tmp.path().join("absent.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_and_schema() {
    let o = rdsim(&["validate", "--preset", "team_size_sweep"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("14 scenario(s)"));

    let o = rdsim(&["--schema"]);
    assert!(o.status.success());
    let schema: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(schema["type"], "object");
}

#[test]
fn help_lists_every_flag() {
    let o = rdsim(&["run", "--help"]);
    let help = String::from_utf8_lossy(&o.stdout);
    for flag in [
        "--preset",
        "--scenario",
        "--seed",
        "--out",
        "--horizon",
        "--threshold",
        "--smoothing",
        "--allocation",
        "--retain-during-review",
        "--rework-fraction",
    ] {
        assert!(help.contains(flag), "{flag} missing from run --help");
    }
    let help = String::from_utf8_lossy(&rdsim(&["montecarlo", "--help"]).stdout).into_owned();
    assert!(help.contains("--runs"));
}

#[test]
fn threads_variable_bounds_workers_without_changing_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut hashes = Vec::new();
    for threads in ["1", "3", "0"] {
        let dir = out_dir(&tmp, &format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_rdsim"))
            .args([
                "montecarlo",
                "--preset",
                "base_sequential",
                "--runs",
                "12",
                "--out",
                &dir,
            ])
            .env("RDSIM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        hashes.push(manifest(&dir)["files"].clone());
    }
    assert_eq!(hashes[0], hashes[1]);
    assert_eq!(hashes[0], hashes[2]);

    let o = Command::new(env!("CARGO_BIN_EXE_rdsim"))
        .args([
            "montecarlo",
            "--preset",
            "base_sequential",
            "--runs",
            "2",
            "--out",
            &out_dir(&tmp, "bad"),
        ])
        .env("RDSIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiments_emit_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "e1");
    assert!(rdsim(&["experiment", "exp1", "--runs", "10", "--out", &dir])
        .status
        .success());
    let table = fs::read_to_string(Path::new(&dir).join("exp1_comparison.csv")).unwrap();
    assert!(table.starts_with("metric,parallel,sequential,change,change_kind\n"));
    assert!(table.lines().any(|l| l.starts_with("task_weeks_rework,")));

    let dir = out_dir(&tmp, "e2");
    assert!(rdsim(&["experiment", "exp2", "--runs", "4", "--out", &dir])
        .status
        .success());
    let summary = fs::read_to_string(Path::new(&dir).join("exp2_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 15);
    assert!(summary.lines().nth(1).unwrap().starts_with("parallel,1,"));
}
