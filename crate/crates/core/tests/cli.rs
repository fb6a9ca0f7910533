use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ellsym(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellsym"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_gaussian_csv(path: &Path, n: usize) {
    let mut s = String::from("date,x,y\n");
    // Deterministic, roughly symmetric cloud.
    for i in 0..n {
        let a = (i as f64 * 0.7).sin() * 1.3;
        let b = (i as f64 * 1.9).cos() + 0.2 * a;
        s.push_str(&format!("2021-{i:03},{a},{b}\n"));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn test_command_prints_every_requested_test() {
    let dir = tempfile::tempdir().unwrap();
    write_gaussian_csv(&dir.path().join("x.csv"), 120);
    let out = ellsym(
        &[
            "test",
            "--data",
            "x.csv",
            "--tests",
            "specified,semiparam-t4,cassart-pg",
            "--theta0",
            "0,0",
            "--out",
            "r.csv",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["specified", "semiparam-t4", "cassart-pg"] {
        assert!(stdout.contains(name), "{stdout}");
    }
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    write_gaussian_csv(&dir.path().join("x.csv"), 50);
    assert_eq!(ellsym(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        ellsym(
            &["test", "--data", "x.csv", "--tests", "nonsense"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    // The specified test without a location.
    assert_eq!(
        ellsym(
            &["test", "--data", "x.csv", "--tests", "specified"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        ellsym(
            &[
                "test",
                "--data",
                "x.csv",
                "--tests",
                "specified",
                "--theta0",
                "0,0,0"
            ],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    fs::write(dir.path().join("bad.json"), "{\"d\": 3}").unwrap();
    assert_eq!(
        ellsym(&["simulate", "--config", "bad.json"], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        ellsym(
            &["test", "--data", "missing.csv", "--tests", "cassart-pg"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n3,oops\n").unwrap();
    let out = ellsym(
        &["test", "--data", "bad.csv", "--tests", "cassart-pg"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    // Too few observations for the scatter estimate.
    fs::write(dir.path().join("short.csv"), "1,2\n3,4\n").unwrap();
    assert_eq!(
        ellsym(
            &["test", "--data", "short.csv", "--tests", "cassart-pg"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // Every point on one line: no shape estimate exists.
    let rows: String = (0..40).map(|i| format!("{i},{}\n", 2 * i + 1)).collect();
    fs::write(dir.path().join("line.csv"), rows).unwrap();
    let out = ellsym(
        &["test", "--data", "line.csv", "--tests", "cassart-pg"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn rolling_writes_one_row_per_window_and_test() {
    let dir = tempfile::tempdir().unwrap();
    write_gaussian_csv(&dir.path().join("x.csv"), 130);
    let out = ellsym(
        &[
            "rolling",
            "--data",
            "x.csv",
            "--window",
            "60",
            "--step",
            "25",
            "--tests",
            "semiparam-t4-raw,cassart-pg",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    // floor((130 - 60) / 25) + 1 = 3 windows, two tests each, plus the header.
    assert_eq!(stdout.lines().count(), 7);
    assert!(stdout
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0,60,2021-000,2021-059,"));
}

#[test]
fn are_command_reports_published_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = ellsym(
        &["are", "--d", "2", "--ref", "t5", "--under", "t7,t20"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "d,reference,g,are,published,error");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,t5,t7,"));
}

#[test]
fn simulate_writes_result_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "d": 2, "n": 40, "replications": 20, "seed": 3,
        "tests": ["specified", "semiparam-t4-raw"],
        "alternatives": [{"family": "elliptical", "radial": "t5"}],
        "output": "table.csv"
    }"#;
    fs::write(dir.path().join("c.json"), config).unwrap();
    let out = ellsym(
        &["simulate", "--config", "c.json", "--seed", "4"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(table.starts_with("# version="));
    assert_eq!(table.lines().filter(|l| l.contains(",4,")).count(), 2);
}

#[test]
fn pitfall_runs_with_small_replication_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = ellsym(&["pitfall", "--reps", "20", "--seed", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("specified") && stdout.contains("semiparam-t4-raw"));
}
