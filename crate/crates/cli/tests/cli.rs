use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aliaslab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aliaslab"));
    cmd.args(args).env_remove("ALIASLAB_OUT");
    if let Some(dir) = env_out {
        cmd.env("ALIASLAB_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn small_crt(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        r#"family = "line"

[phantom]
center = [0.0, 0.0]
radius = 5.0
jump = 1.0

[scheme]
eps = 0.05
n_alpha = 80
shift = 0.03

[probe]
x0 = [5.0, 7.0]
h_max = 3.0

[outputs]
global_pixels = 64
roi_side = 8.0
"#,
    )
    .unwrap();
    path
}

#[test]
fn psi_table_uses_env_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = aliaslab(&["psi-table", "--a", "0,1", "--samples", "5"], Some(tmp.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("psi_table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h_prime,a,psi_value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().filter(|r| r[1] == 0.0).all(|r| r[2] == 0.0));
    assert!(rows.iter().filter(|r| r[0] == 0.0).all(|r| r[2] == 0.0));
}

#[test]
fn crt_demo_writes_all_artifacts_and_report_replays() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_crt(tmp.path());
    let first = tmp.path().join("first");
    let out = aliaslab(
        &["crt-demo", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap(), "--threads", "2"],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["profile.csv", "global.pgm", "global.txt", "roi.pgm", "roi.txt", "report.toml"] {
        assert!(first.join(name).exists(), "{name} missing");
    }
    let csv = fs::read_to_string(first.join("profile.csv")).unwrap();
    assert!(csv.starts_with("h,recon_scaled_diff,prediction\n"));
    assert_eq!(csv.lines().count(), 1 + 25);
    let pgm = fs::read(first.join("global.pgm")).unwrap();
    let header = b"P5\n64 64\n65535\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(pgm.len(), header.len() + 2 * 64 * 64);

    // the report is a config; replaying it into another directory with one
    // thread gives the same profile
    let second = tmp.path().join("second");
    let report = first.join("report.toml");
    let out = aliaslab(
        &["crt-demo", "--config", report.to_str().unwrap(), "--out", second.to_str().unwrap(), "--threads", "1"],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(second.join("profile.csv")).unwrap(), csv.as_bytes());
    assert_eq!(fs::read(second.join("global.pgm")).unwrap(), pgm);
}

#[test]
fn eta_override_lands_in_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_crt(tmp.path());
    let out = aliaslab(&["crt-demo", "--config", cfg.to_str().unwrap(), "--eta", "8"], Some(tmp.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(tmp.path().join("report.toml")).unwrap();
    assert!(report.contains("eta = 8"), "{report}");
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    let text = fs::read_to_string(small_crt(tmp.path())).unwrap().replace("eps = 0.05", "eps = -0.05");
    fs::write(&bad, text).unwrap();
    let out = aliaslab(&["crt-demo", "--config", bad.to_str().unwrap()], Some(tmp.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scheme.eps"));

    let missing = tmp.path().join("nope.toml");
    let out = aliaslab(&["grt-demo", "--config", missing.to_str().unwrap()], Some(tmp.path()));
    assert_eq!(out.status.code(), Some(2));

    // a line config handed to the circle demo
    let out = aliaslab(&["grt-demo", "--config", small_crt(tmp.path()).to_str().unwrap()], Some(tmp.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("family"));
}

#[test]
fn verify_psi_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = aliaslab(&["verify", "--suite", "psi-properties"], Some(tmp.path()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
    assert!(tmp.path().join("verify.toml").exists());
}
