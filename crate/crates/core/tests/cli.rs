//! Drives the `fracadi` binary end to end.

use std::fs;
use std::process::{Command, Output};
use std::time::Instant;

use fracadi::output::{read_csv, read_snapshot};

fn fracadi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracadi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_passes_and_reports_every_item() {
    let o = fracadi(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 40);
    assert!(!out.contains("FAIL"));
    assert!(stderr(&o).contains("wall time"));
}

#[test]
fn check_with_another_seed_still_passes() {
    let o = fracadi(&["check", "--seed", "99", "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let a = stdout(&o);
    let b = stdout(&fracadi(&["check"]));
    assert_ne!(a, b);
}

#[test]
fn oversized_oracle_fails_fast() {
    let start = Instant::now();
    let o = fracadi(&["check", "--oracle-size", "200"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exceeds the dense limit"));
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn toy_ladder_emits_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    let start = Instant::now();
    let o = fracadi(&[
        "convergence",
        "--alpha",
        "1.5",
        "--beta",
        "1.9",
        "--levels",
        "8:64,16:256",
        "--out",
        csv.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(start.elapsed().as_secs_f64() < 10.0);
    let rows = read_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].rate_max.is_none());
    let rate = rows[1].rate_max.unwrap();
    assert!((3.8..4.3).contains(&rate), "{rate}");
    // human table on stdout, per-run wall time on stderr
    assert!(stdout(&o).contains("alpha"));
    assert_eq!(stderr(&o).matches("wall=").count(), 2);
}

#[test]
fn csv_on_stdout_is_byte_identical_across_runs() {
    let args = [
        "convergence",
        "--alpha",
        "1.3",
        "--beta",
        "1.7",
        "--mode",
        "temporal",
        "--levels",
        "16:4,16:8,16:16",
        "--workers",
        "3",
    ];
    let a = fracadi(&args);
    let b = fracadi(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rows = read_csv(&a.stdout[..]).unwrap();
    assert_eq!(rows.len(), 3);
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["convergence", "--preset", "table-9.9"],
        vec![
            "convergence",
            "--alpha",
            "2.5",
            "--beta",
            "1.5",
            "--levels",
            "8:64,16:256",
        ],
        vec![
            "convergence",
            "--alpha",
            "1.5",
            "--beta",
            "1.5",
            "--levels",
            "8:64,16:128",
        ],
        vec![
            "convergence",
            "--alpha",
            "1.5",
            "--beta",
            "1.5",
            "--levels",
            "8:64",
        ],
        vec!["convergence", "--alpha", "1.5"],
        vec![
            "fhn",
            "--out",
            "/nonexistent-dir/x",
            "--snapshot-every",
            "0",
        ],
        vec!["check", "--workers", "0"],
        vec!["frobnicate"],
    ] {
        let o = fracadi(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_exits_0() {
    let o = fracadi(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["convergence", "check", "fhn"] {
        assert!(stdout(&o).contains(cmd));
    }
}

#[test]
fn zero_initial_data_gives_zero_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracadi(&[
        "fhn",
        "--m",
        "12",
        "--n",
        "10",
        "--t-final",
        "5",
        "--snapshot-every",
        "5",
        "--zero-initial",
        "--write-w",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut snaps = 0;
    for e in fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "txt") {
            let (h, f) = read_snapshot(fs::File::open(&p).unwrap()).unwrap();
            assert_eq!((h.m1, h.m2), (12, 12));
            assert_eq!(f.max_abs(), 0.0);
            snaps += 1;
        }
    }
    assert_eq!(snaps, 6);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["m"], 12);
    assert_eq!(manifest["snapshots"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["snapshots"][2]["t"], 5.0);
}

#[test]
fn fhn_snapshot_cadence_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracadi(&[
        "fhn",
        "--m",
        "20",
        "--n",
        "12",
        "--t-final",
        "6",
        "--alpha",
        "1.4",
        "--beta",
        "1.9",
        "--kappa",
        "1e-3",
        "--snapshot-every",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "manifest.json",
            "u_000000.txt",
            "u_000005.txt",
            "u_000010.txt",
            "u_000012.txt"
        ]
    );
    let (h, u) = read_snapshot(fs::File::open(dir.path().join("u_000012.txt")).unwrap()).unwrap();
    assert_eq!((h.t, h.alpha, h.beta), (6.0, 1.4, 1.9));
    assert!(u.max_abs() > 0.0 && u.max_abs() <= 2.0);
}
