use std::fs;
use std::path::Path;
use std::process::Command;

use iontrap::run::{RunReport, SERIES_FILE};
use iontrap::sweep::{SweepIndex, INDEX_FILE};
use tempfile::TempDir;

fn iontrap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_iontrap"))
        .args(args)
        .output()
        .unwrap()
}

fn run_ok(args: &[&str]) {
    let out = iontrap(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn column(path: &Path, col: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

fn report(dir: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analytic_run_starts_at_alpha_squared() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "run",
        "--eta",
        "0.5",
        "--nu",
        "1",
        "--omega",
        "0.5",
        "--alpha",
        "0.5+5.0i",
        "--tau-max",
        "3500",
        "--mode",
        "analytic",
        "--output",
        s(tmp.path()),
    ]);
    let csv = fs::read_to_string(tmp.path().join(SERIES_FILE)).unwrap();
    assert_eq!(csv.lines().next(), Some("tau,n_mean"));
    let n = column(&tmp.path().join(SERIES_FILE), 1);
    assert_eq!(n.len(), 70_001);
    assert!((n[0] - 25.25).abs() < 1e-6);
}

#[test]
fn compare_mode_agrees_with_oracle() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "run",
        "--mode",
        "compare",
        "--alpha",
        "0.5+5i",
        "--tau-max",
        "300",
        "-o",
        s(tmp.path()),
    ]);
    let csv = fs::read_to_string(tmp.path().join(SERIES_FILE)).unwrap();
    assert_eq!(csv.lines().next(), Some("tau,n_mean,n_mean_oracle,abs_dev"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    assert!(summary["max_abs_dev"].as_f64().unwrap() <= 1e-6);
    assert_eq!(summary["within_tolerance"], true);
    let dev = column(&tmp.path().join(SERIES_FILE), 3);
    assert!(dev.iter().all(|&d| d <= 1e-6));
}

#[test]
fn report_flags_distinguish_phases() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["run", "--alpha", "5+0.5i", "--tau-max", "3900", "-o", s(&a)]);
    run_ok(&["run", "--alpha", "0.5+5i", "--tau-max", "3900", "-o", s(&b)]);
    let ra = report(&a).revivals.unwrap();
    let rb = report(&b).revivals.unwrap();
    assert!(!ra.super_revival_detected);
    assert!(rb.super_revival_detected);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        run_ok(&[
            "run",
            "--mode",
            "oracle_rwa",
            "--tau-max",
            "100",
            "-o",
            s(dir),
        ]);
    }
    assert_eq!(
        fs::read(a.join(SERIES_FILE)).unwrap(),
        fs::read(b.join(SERIES_FILE)).unwrap()
    );
}

#[test]
fn report_json_round_trips() {
    let tmp = TempDir::new().unwrap();
    run_ok(&["run", "--tau-max", "200", "-o", s(tmp.path())]);
    let text = fs::read_to_string(tmp.path().join("report.json")).unwrap();
    let parsed: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(
        serde_json::to_string_pretty(&parsed).unwrap(),
        text.trim_end()
    );
}

#[test]
fn sweep_over_eta_lists_every_point() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "sweep",
        "--alpha",
        "0.5+5i",
        "--tau-max",
        "50",
        "--grid",
        "eta=0.1,0.3,0.5",
        "-o",
        s(tmp.path()),
    ]);
    let index: SweepIndex =
        serde_json::from_str(&fs::read_to_string(tmp.path().join(INDEX_FILE)).unwrap()).unwrap();
    assert_eq!(index.total, 3);
    assert_eq!(index.points.len(), 3);
    for (p, eta) in index.points.iter().zip([0.1, 0.3, 0.5]) {
        assert_eq!(p.status, "ok");
        assert_eq!(p.parameters["eta"].as_f64(), Some(eta));
        assert!(p.series.as_ref().unwrap().exists());
    }
}

#[test]
fn single_point_sweep_matches_run() {
    let tmp = TempDir::new().unwrap();
    let (r, w) = (tmp.path().join("run"), tmp.path().join("sweep"));
    run_ok(&["run", "--eta", "0.3", "--tau-max", "80", "-o", s(&r)]);
    run_ok(&["sweep", "--tau-max", "80", "--grid", "eta=0.3", "-o", s(&w)]);
    assert_eq!(
        fs::read(r.join(SERIES_FILE)).unwrap(),
        fs::read(w.join("point_00000").join(SERIES_FILE)).unwrap()
    );
}

#[test]
fn sweep_over_phase_reproduces_contrast() {
    let tmp = TempDir::new().unwrap();
    let abs = (25.25f64).sqrt().to_string();
    let (arg_a, arg_b) = (0.5f64.atan2(5.0), 5.0f64.atan2(0.5));
    let grid = format!("alpha_arg={arg_a},{arg_b}");
    run_ok(&[
        "sweep",
        "--tau-max",
        "3900",
        "--grid",
        &format!("alpha_abs={abs}"),
        "--grid",
        &grid,
        "-o",
        s(tmp.path()),
    ]);
    let index: SweepIndex =
        serde_json::from_str(&fs::read_to_string(tmp.path().join(INDEX_FILE)).unwrap()).unwrap();
    let flags: Vec<_> = index
        .points
        .iter()
        .map(|p| p.super_revival_detected)
        .collect();
    assert_eq!(flags, [Some(false), Some(true)]);
}

#[test]
fn sweep_cap_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = iontrap(&[
        "sweep",
        "--grid",
        "eta=0.1:1:20",
        "--cap",
        "10",
        "-o",
        s(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes_follow_error_kind() {
    let tmp = TempDir::new().unwrap();
    let out = iontrap(&["run", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");

    let out = iontrap(&["run", "--omega", "0.7", "-o", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "physics");

    let out = iontrap(&[
        "run",
        "--n-max",
        "16",
        "--tau-max",
        "5",
        "-o",
        s(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = iontrap(&["run", "--tau-max", "5", "-o", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn full_pipelines_run_off_regime() {
    let tmp = TempDir::new().unwrap();
    run_ok(&[
        "run",
        "--mode",
        "lab_full",
        "--omega",
        "0.7",
        "--alpha",
        "1+1i",
        "--tau-max",
        "5",
        "-o",
        s(tmp.path()),
    ]);
    assert_eq!(report(tmp.path()).provenance, "oracle_full");
}

#[test]
fn config_file_then_flags() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        "# real-dominant amplitude\neta = 0.5\nalpha = 5+0.5i\ntau_max: 40\nmode=oracle_rwa\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    run_ok(&["run", "--config", s(&cfg), "--tau-max", "10", "-o", s(&out)]);
    let r = report(&out);
    assert_eq!(r.config.tau_max, 10.0);
    assert_eq!(r.config.alpha_re, 5.0);
    assert_eq!(r.provenance, "oracle_rwa");
    assert_eq!(column(&out.join(SERIES_FILE), 0).len(), 201);
}

#[test]
fn verify_passes() {
    let out = iontrap(&["verify", "--n-max", "96", "--tau-max", "50"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.matches("PASS").count(), 4);
}
