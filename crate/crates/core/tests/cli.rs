use std::path::Path;
use std::process::{Command, Output};

fn janowski(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_janowski"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run janowski")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn coeffs_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(&["coeffs", "--A", "-0.5", "--B", "-1", "--lambda", "0.5", "--n-max", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows, vec![1.0, 0.25, 0.21875]);

    let out = janowski(&["coeffs", "--A", "-0.5", "--B", "-1", "--lambda", "0.5", "--n-max", "0"], dir.path());
    assert_eq!(stdout(&out), "n,a_n\n0,1.0000000000000000\n");
}

#[test]
fn coeffs_both_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(
        &["coeffs", "--A", "0.6", "--B", "-0.9", "--lambda", "0.45", "--n-max", "200", "--method", "both"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n,convolution,recurrence,abs_diff\n"));
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[3] <= 1e-10 * cols[2].abs().max(1.0), "{line}");
    }
}

#[test]
fn invalid_input_exits_2_without_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(
        &["coeffs", "--A", "-1", "--B", "-0.5", "--lambda", "0.5", "--out", "c.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("c.csv").exists());
    let out = janowski(&["check-stability", "--A", "0.5", "--B", "-0.5", "--lambda", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = janowski(&["verify-lemmas", "--a-max", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = janowski(&["self-check", "--r", "1.0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = janowski(&["search", "--coarse-angles", "8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn verify_lemmas_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(
        &["verify-lemmas", "--A", "-0.3", "--B", "-0.9", "--lambda", "0.7", "--n-max", "200", "--out", "v.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["lemma1"]["checked"], 201);
    assert!(v.get("lemma2_statement_literal").is_none());
}

#[test]
fn check_stability_passes_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(
        &["check-stability", "--A", "-0.5", "--B", "-1", "--lambda", "0.5", "--n-max", "3", "--samples", "512"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["verdict"] == "pass"));
}

#[test]
fn self_check_reports_published_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(&["self-check", "--samples", "1024"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "violated");
    assert!(v["worst_margin"].as_f64().unwrap() >= 0.10);

    let out = janowski(
        &["self-check", "--r", "0.98", "--disk-source", "published_formula", "--point", "0.915282,-0.357037", "--points-only"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["published_reference"]["discrepancy_flag"], true);
    assert_eq!(v["published_reference"]["printed_center"].as_f64(), Some(0.634444));
}

#[test]
fn branch_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // s_1 = 1 + 1.98 z vanishes at z = -0.505 on the sampled radius
    let out = janowski(
        &[
            "check-stability", "--A", "1", "--B", "-0.98", "--lambda", "1", "--n-max", "1", "--allow-outside",
            "--radii", "0.505050505050505", "--samples", "8", "--ray-steps", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn plot_and_csv_reimport() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(&["plot", "--out", "fig.svg", "--csv-dir", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for name in ["disk_boundary.csv", "disk_boundary_published.csv", "g_curve.csv", "point.csv"] {
        let text = std::fs::read_to_string(dir.path().join("csv").join(name)).unwrap();
        assert!(text.starts_with("re,im\n"), "{name}");
    }
    let out = janowski(&["plot", "--from-csv", "csv", "--out", "again.svg"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("fig.svg")).unwrap();
    let b = std::fs::read(dir.path().join("again.svg")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn search_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = janowski(
        &["search", "--coarse-radii", "16", "--coarse-angles", "64", "--refine-iters", "10"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "A,B,lambda,n,margin,z_re,z_im,G_re,G_im,disk_center_re,disk_center_im,disk_radius,disk_source"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(row[4].parse::<f64>().unwrap() > 0.0);
    assert_eq!(row[12], "mobius_image");
}
