use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_intervalcast"));
    c.env_remove("INTERVALCAST_OUT");
    c
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{args:?} failed: {stderr}");
    String::from_utf8(out.stdout).unwrap()
}

fn run_err(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

const QUICK: [&str; 8] = [
    "--model",
    "linear:5",
    "--epochs",
    "2",
    "--window",
    "24",
    "--horizon",
    "8",
];

fn train(out: &Path, extra: &[&str]) {
    let mut args = vec!["train", "--out", out.to_str().unwrap()];
    args.extend(QUICK);
    args.extend(extra);
    run_ok(&args);
}

#[test]
fn errors_are_one_line_and_fail_the_process() {
    for args in [
        vec!["train", "--policy", "e2e"],
        vec!["train", "--policy", "nonsense"],
        vec!["train", "--epochs", "zero"],
        vec!["eval", "--checkpoint", "/definitely/missing.ckpt"],
        vec!["frobnicate"],
    ] {
        let err = run_err(&args);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn e2e_without_interval_names_the_flag() {
    let err = run_err(&["train", "--policy", "e2e"]);
    assert!(err.contains("interval"), "{err}");
}

#[test]
fn help_lists_every_command() {
    let help = run_ok(&["--help"]);
    for cmd in ["generate", "train", "eval", "sweep", "energy"] {
        assert!(help.contains(cmd), "{help}");
    }
}

#[test]
fn generate_then_train_on_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    run_ok(&[
        "generate",
        "--seed",
        "3",
        "--noise-sd",
        "0",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3101);

    train(
        dir.path(),
        &[
            "--data",
            csv.to_str().unwrap(),
            "--channels",
            "1",
            "--name",
            "fromcsv",
        ],
    );
    assert!(dir.path().join("fromcsv.ckpt").exists());
    assert!(dir.path().join("fromcsv.report.csv").exists());
    let log = std::fs::read_to_string(dir.path().join("train.log")).unwrap();
    assert!(log.contains("wall_clock_secs="));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# quick run\npolicy = d\nL = 8\nepochs = 1\nname = fromfile\n",
    )
    .unwrap();
    let mut args = vec![
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ];
    args.extend(QUICK);
    args.extend(["--L", "4"]);
    run_ok(&args);
    let ck = std::fs::read_to_string(dir.path().join("fromfile.ckpt")).unwrap();
    assert!(ck.contains("d L=4"), "flag should win over the file");
    let report = std::fs::read_to_string(dir.path().join("fromfile.report.csv")).unwrap();
    // QUICK sets two epochs, overriding the file's one
    assert_eq!(report.lines().count(), 3);
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["generate"])
        .env("INTERVALCAST_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("synthds.csv").exists());
}

#[test]
fn eval_compares_checkpoints_against_the_baseline() {
    let dir = tempfile::tempdir().unwrap();
    train(
        dir.path(),
        &["--policy", "dstar", "--L", "4", "--name", "ds"],
    );
    train(dir.path(), &["--policy", "b", "--name", "base"]);
    train(dir.path(), &["--policy", "d", "--L", "4", "--name", "dd"]);
    let ck = |n: &str| {
        dir.path()
            .join(format!("{n}.ckpt"))
            .to_str()
            .unwrap()
            .to_string()
    };
    let (ds, base, dd) = (ck("ds"), ck("base"), ck("dd"));
    let out = dir.path().to_str().unwrap();
    let args = [
        "eval",
        "--out",
        out,
        "--window",
        "24",
        "--horizon",
        "8",
        "--checkpoint",
        &ds,
        &base,
        &dd,
    ];
    run_ok(&args);
    let table = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "interval,ds,base,dd,best,improvement_pct");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("average,"));

    // a query D cannot answer leaves its cell empty instead of failing
    let mut rolling = args.to_vec();
    rolling.extend(["--intervals", "0,0.5", "--rolling"]);
    run_ok(&rolling);
    let table = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    let row = table.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[4], "", "{row}");
}

#[test]
fn sweep_writes_one_row_per_value_seed_and_interval() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--out",
        dir.path().to_str().unwrap(),
        "--sweep",
        "nu=0,inf",
        "--seed",
        "0,1",
    ];
    args.extend(QUICK);
    run_ok(&args);
    let csv = std::fs::read_to_string(dir.path().join("sweep-nu.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "param,value,seed,interval,mae,covered_entries,best_epoch"
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 4);
}

#[test]
fn sweep_rejects_mismatched_policy() {
    let err = run_err(&["sweep", "--sweep", "delta=0,0.2", "--policy", "dstar"]);
    assert!(err.contains("cannot sweep"), "{err}");
}

#[test]
fn energy_study_from_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.csv");
    let forecast = dir.path().join("forecast.csv");
    let u: Vec<f64> = (0..48)
        .map(|t| 0.5 + 0.5 * (t as f64 / 4.0).sin())
        .collect();
    let write = |p: &Path, k: f64| {
        let body: String = u
            .iter()
            .map(|v| format!("{}\n", (v * k).min(1.0)))
            .collect();
        std::fs::write(p, format!("u\n{body}")).unwrap();
    };
    write(&truth, 1.0);
    write(&forecast, 1.1);
    run_ok(&[
        "energy",
        "--out",
        dir.path().to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--forecast",
        forecast.to_str().unwrap(),
        "--scale",
        "0.05",
    ]);
    let csv = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 27);
    assert!(csv.lines().next().unwrap().contains("sleep_duration_error"));
}
