use std::path::Path;
use std::process::{Command, Output};

fn bohm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bohm"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

const SHORT: [&str; 8] = [
    "--override",
    "n_steps=1000",
    "--override",
    "snapshot_stride=100",
    "--override",
    "norm_check_stride=100",
    "--override",
    "trajectory_stride=10",
];

fn run_preset(preset: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--preset", preset, "--out", out.to_str().unwrap()];
    args.extend_from_slice(&SHORT);
    args.extend_from_slice(extra);
    bohm(&args)
}

#[test]
fn short_preset_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_preset("free", dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["fields.csv", "trajectories.csv", "report.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("transmission = "));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "scenario = eckart # barrier run\nn_steps = 500\nsnapshot_stride = 100\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = bohm(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--override",
        "norm_check_stride=50",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.starts_with("scenario = eckart\n"));
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_preset("free", dir.path(), &["--override", "n_points=2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_points"));

    let out = run_preset("eckart", dir.path(), &["--override", "hieght=3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--override 5"));

    let out = bohm(&[
        "run",
        "--config",
        dir.path().join("nope.cfg").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // dt / dq^2 ~ 1.6: far outside the explicit stability limit
    let out = run_preset(
        "free",
        dir.path(),
        &["--override", "scheme=explicit", "--override", "dt=1e-4"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}
