//! End-to-end checks of the command-line front end: artifact layout,
//! reproducibility, and the exit-code contract.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vssbdf2")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn scalar_command_reports_logistic_threshold() {
    let dir = tempdir("scalar");
    let (code, stdout, _) = run(&[
        "scalar",
        "--set",
        "scalar.lambda=1",
        "--set",
        "scalar.alpha=-2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("conditional"));
    // dt* = 4/7
    assert!(stdout.contains("5.7142857142857"), "stdout: {stdout}");
    assert!(stdout.contains("case = 5"));
    let table = read(&dir.join("rho_table.csv"));
    assert!(table.starts_with("dt,"));
    assert!(table.contains("# config_hash = "));

    // case 1 and case 3 are unconditional
    for (lambda, alpha, case) in [("-3", "1", "case = 1"), ("-3", "-1", "case = 3")] {
        let (code, stdout, _) = run(&[
            "scalar",
            "--set",
            &format!("scalar.lambda={lambda}"),
            "--set",
            &format!("scalar.alpha={alpha}"),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(stdout.contains("unconditional"), "{stdout}");
        assert!(stdout.contains(case), "{stdout}");
    }
}

#[test]
fn config_errors_exit_2_numeric_failures_exit_3() {
    let dir = tempdir("exitcodes");
    // unknown key
    let (code, _, stderr) = run(&[
        "scalar",
        "--set",
        "scalar.lambad=1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {stderr}");
    // growing true solution: invalid scalar split
    let (code, _, _) = run(&[
        "scalar",
        "--set",
        "scalar.lambda=1",
        "--set",
        "scalar.alpha=-0.5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    // malformed config file
    let cfg = dir.join("bad.ini");
    std::fs::write(&cfg, "[nope]\nx = 1\n").unwrap();
    let (code, _, _) = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    // numeric failure: logistic implicit solve crosses its pole when
    // dt_init * r is at the singular point of (1 - dt r)
    let (code, _, stderr) = run(&[
        "simulate",
        "--set",
        "model.kind=logistic",
        "--set",
        "model.r=1",
        "--set",
        "adaptive.dt_min=1.0",
        "--set",
        "adaptive.dt_init=1.0",
        "--set",
        "adaptive.dt_max=1.0",
        "--set",
        "run.t_end=5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "stderr: {stderr}");
}

#[test]
fn simulate_logistic_defaults_and_determinism() {
    let dir_a = tempdir("sim-a");
    let dir_b = tempdir("sim-b");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--set".into(),
            "model.kind=logistic".into(),
            "--set".into(),
            "adaptive.dt_max=1.142857142857143".into(),
            "--set".into(),
            "run.t_end=400".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let out_a = Command::new(bin()).args(args(&dir_a)).output().unwrap();
    assert_eq!(out_a.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out_a.stdout).into_owned();
    // dt_infinity ~ 4/7 = 0.5714...
    let dtinf: f64 = stdout
        .lines()
        .find(|l| l.starts_with("dt_infinity = "))
        .and_then(|l| l.split_whitespace().nth(2))
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no dt_infinity in summary: {stdout}"));
    assert!(
        (dtinf - 4.0 / 7.0).abs() / (4.0 / 7.0) < 0.02,
        "dt_infinity {dtinf} not near 4/7"
    );

    let out_b = Command::new(bin()).args(args(&dir_b)).output().unwrap();
    assert_eq!(out_b.status.code(), Some(0));
    for name in ["records.csv", "state_final.csv", "summary.txt"] {
        assert_eq!(
            read(&dir_a.join(name)),
            read(&dir_b.join(name)),
            "{name} not byte-identical"
        );
    }
    let records = read(&dir_a.join("records.csv"));
    assert!(records.starts_with("t,dt,lte,accepted,reject_count\n"));
    assert!(records.trim_end().ends_with(&format!("# tool = {}", vssbdf2::cli::TOOL_VERSION)));
}

#[test]
fn steady_and_stability_small_pnp() {
    let dir = tempdir("stab");
    let common = [
        "--set",
        "model.eps=0.1",
        "--set",
        "mesh.n_cells=30",
        "--set",
        "steady.t_transient=30",
        "--out",
    ];
    let mut args = vec!["steady"];
    args.extend_from_slice(&common);
    args.push(dir.to_str().unwrap());
    let (code, stdout, stderr) = run(&args);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("steady_residual"));
    let state = read(&dir.join("steady_state.csv"));
    assert!(state.starts_with("x,c_plus,c_minus,phi\n"));
    assert_eq!(state.lines().filter(|l| !l.starts_with('#')).count(), 32);

    let mut args = vec!["stability"];
    args.extend_from_slice(&common);
    args.push(dir.to_str().unwrap());
    let (code, stdout, stderr) = run(&args);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("dt_star = "), "stdout: {stdout}");
    assert!(stdout.contains("g_linearity_probe"));
    let samples = read(&dir.join("radius_samples.csv"));
    assert!(samples.starts_with("dt,spectral_radius\n"));
    let eig = read(&dir.join("eigenvector.csv"));
    assert!(eig.starts_with("x,re_c_plus,im_c_plus,re_c_minus,im_c_minus\n"));
}

#[test]
fn sweep_single_point_grid() {
    let dir = tempdir("sweep1");
    let (code, _, stderr) = run(&[
        "sweep",
        "--set",
        "sweep.kind=epsilon",
        "--set",
        "sweep.points=1",
        "--set",
        "sweep.eps_min=0.1",
        "--set",
        "sweep.eps_max=0.1",
        "--set",
        "sweep.refine=false",
        "--set",
        "mesh.n_cells=30",
        "--set",
        "steady.t_transient=30",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let csv = read(&dir.join("sweep.csv"));
    let data_rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("eps,"))
        .count();
    assert_eq!(data_rows, 1);
    let feats = read(&dir.join("features.txt"));
    assert!(feats.contains("jumps at eps = none"));
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("vssbdf2-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
