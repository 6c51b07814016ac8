use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polariphase_cli::report::Report;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn polariphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polariphase"))
        .args(args)
        .env("POLARIPHASE_NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate(set: &str, out: &Path, extra: &[&str]) {
    let cfg = fixture(set);
    let mut args = vec!["simulate", "--config", path_str(&cfg), "--out", path_str(out)];
    args.extend_from_slice(extra);
    let o = polariphase(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn analyze(set: &str, scan: &Path, out: &Path) -> Report {
    let cfg = fixture(set);
    let o = polariphase(&[
        "analyze",
        "--config",
        path_str(&cfg),
        "--scan",
        path_str(scan),
        "--out",
        path_str(out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    Report::from_json(&fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn simulate_writes_the_default_scan() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    simulate("setA.cfg", &scan, &[]);
    let text = fs::read_to_string(&scan).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("index,eta_rad,position_mm,counts_off,counts_on,live_time_s")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| r.split(',').count() == 6));
    let counts: f64 = rows[5].split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(counts.fract(), 0.0);
}

#[test]
fn expectation_flag_writes_real_valued_counts() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    simulate("setA.cfg", &scan, &["--expectation"]);
    let text = fs::read_to_string(&scan).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .any(|r| r.split(',').nth(3).unwrap().parse::<f64>().unwrap().fract() != 0.0));
}

#[test]
fn corrupt_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    let text = fs::read_to_string(fixture("setA.cfg"))
        .unwrap()
        .replace("r0 = 0.976", "r0 = 1.7");
    fs::write(&cfg, text).unwrap();
    let o = polariphase(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`r0`"), "{}", stderr(&o));

    fs::write(&cfg, "xi_rad = 1\nwavelength = 2\n").unwrap();
    let o = polariphase(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`wavelength`"), "{}", stderr(&o));
}

#[test]
fn expectation_round_trip_reproduces_theory() {
    let dir = tempfile::tempdir().unwrap();
    for (set, published) in [("setA.cfg", 0.37), ("setB.cfg", 0.17)] {
        let scan = dir.path().join(format!("{set}.csv"));
        simulate(set, &scan, &["--expectation"]);
        let report = analyze(set, &scan, &dir.path().join(format!("{set}.json")));
        assert_eq!(report.count_mode.as_deref(), Some("expectation"));
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            let phi = row.phase_rad.unwrap();
            assert!((phi - row.phase_theory_rad.unwrap()).abs() < 1e-3, "{row:?}");
        }
        assert!((report.rows[0].phase_rad.unwrap() - published).abs() <= 0.005);
    }
}

#[test]
fn missing_column_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    fs::write(&scan, "index,eta_rad,position_mm,counts_off,live_time_s\n0,0,0,1,1\n").unwrap();
    let cfg = fixture("setA.cfg");
    let o = polariphase(&["analyze", "--config", path_str(&cfg), "--scan", path_str(&scan)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing column `counts_on`"), "{}", stderr(&o));
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    let report = dir.path().join("report.json");
    simulate("setA.cfg", &scan, &["--expectation"]);
    analyze("setA.cfg", &scan, &report);
    let reference = fixture("setA_reference.json");

    let o = polariphase(&[
        "compare",
        "--report",
        path_str(&report),
        "--reference",
        path_str(&report),
        "--tol",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = polariphase(&[
        "compare",
        "--report",
        path_str(&report),
        "--reference",
        path_str(&reference),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains('\x1b'));

    let noisy_scan = dir.path().join("noisy.csv");
    let noisy = dir.path().join("noisy.json");
    simulate("setA.cfg", &noisy_scan, &[]);
    analyze("setA.cfg", &noisy_scan, &noisy);
    let o = polariphase(&[
        "compare",
        "--report",
        path_str(&noisy),
        "--reference",
        path_str(&report),
        "--tol",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn full_runs_the_three_stages() {
    let dir = tempfile::tempdir().unwrap();
    for set in ["setA.cfg", "setB.cfg"] {
        let cfg = fixture(set);
        let out = dir.path().join(set);
        let o = polariphase(&[
            "full",
            "--config",
            path_str(&cfg),
            "--out",
            path_str(&out),
            "--expectation",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}{}",
            String::from_utf8_lossy(&o.stdout),
            stderr(&o)
        );
        assert!(out.join("scan.csv").exists() && out.join("report.json").exists());
        assert!(String::from_utf8_lossy(&o.stdout).contains("all rows within tolerance"));
    }
    let cfg = fixture("setA.cfg");
    let out = dir.path().join("strict");
    let o = polariphase(&[
        "full",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--tol",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_override_changes_only_sampled_output() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str, extra: &[&str]| {
        let scan = dir.path().join(name);
        simulate("setB.cfg", &scan, extra);
        fs::read(scan).unwrap()
    };
    assert_eq!(read("a.csv", &[]), read("b.csv", &[]));
    assert_ne!(read("c.csv", &[]), read("d.csv", &["--seed", "99"]));
    assert_eq!(
        read("e.csv", &["--expectation"]),
        read("f.csv", &["--expectation", "--seed", "99"])
    );
}

#[test]
fn overrides_reach_the_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("setA.cfg");
    let out = dir.path().join("run");
    let o = polariphase(&[
        "full",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--expectation",
        "--eps",
        "0",
        "--fit-mode",
        "agnostic",
        "--r-targets",
        "0.5",
        "--bootstrap",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("MISSING"));
    let report = Report::from_json(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.fit_mode.as_deref(), Some("agnostic"));
    let rs: Vec<f64> = report.rows.iter().map(|r| r.r).collect();
    assert_eq!(rs, vec![0.976, 0.5]);
    assert!(report.rows[0].flags.iter().all(|f| f != "second_order_detected"));
}

#[test]
fn bad_flags_are_rejected() {
    let cfg = fixture("setA.cfg");
    let o = polariphase(&["simulate", "--config", path_str(&cfg), "--fit-mode", "fancy"]);
    assert_eq!(o.status.code(), Some(2));
    let o = polariphase(&[
        "full",
        "--config",
        path_str(&cfg),
        "--out",
        "x",
        "--r-targets",
        "0.8,abc",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = polariphase(&["simulate", "--config", "/nonexistent/set.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}
