use std::path::Path;
use std::process::{Command, Output};

fn rlt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path, kind: &str, count: &str) {
    let o = rlt(&[
        "gen",
        "--out",
        dir.to_str().unwrap(),
        "--kind",
        kind,
        "--count",
        count,
        "--seed",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bench_writes_identical_csv_on_serial_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    gen(&inst, "mixed", "3");
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}.csv"));
        let o = rlt(&[
            "bench",
            "--instances",
            inst.to_str().unwrap(),
            "--variants",
            "off,erlt,ierlt",
            "--marking",
            "on",
            "--projection",
            "off",
            "--node-limit",
            "500",
            "--out",
            out.to_str().unwrap(),
            "--serial",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(dir.path().join(format!("run{k}.subsets.csv")).exists());
        csvs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 3);
    assert!(!text.contains("wall_time"));
}

#[test]
fn per_instance_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "small", "1");
    std::fs::write(dir.path().join("bad.rlt.json"), "{}").unwrap();
    let out = dir.path().join("out.csv");
    let o = rlt(&[
        "bench",
        "--instances",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--serial",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad"));
    assert!(std::fs::read_to_string(&out).unwrap().contains(",fail,"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let missing = dir.path().join("missing");
    assert_eq!(
        rlt(&[
            "bench",
            "--instances",
            missing.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
    gen(dir.path(), "small", "1");
    let bad_variant = rlt(&[
        "bench",
        "--instances",
        dir.path().to_str().unwrap(),
        "--variants",
        "turbo",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(bad_variant.status.code(), Some(1));
    assert_eq!(rlt(&["bench", "--nonsense"]).status.code(), Some(1));
    assert_eq!(rlt(&["--help"]).status.code(), Some(0));
}

#[test]
fn detect_names_source_rows() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "mixed", "1");
    let file = dir.path().join("mixed0000.rlt.json");
    let o = rlt(&["detect", file.to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(
        s.contains("<= y0*x0") && s.contains("on_up0") && s.contains("off_up0"),
        "{s}"
    );
}

#[test]
fn root_prints_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "bilinear", "1");
    let file = dir.path().join("bilinear0000.rlt.json");
    let o = rlt(&[
        "root",
        file.to_str().unwrap(),
        "--variant",
        "erlt",
        "--cuts",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("round   0") && s.contains("final bound"), "{s}");
}

#[test]
fn solve_reports_status() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "mixed", "1");
    let file = dir.path().join("mixed0000.rlt.json");
    let o = rlt(&["solve", file.to_str().unwrap(), "--variant", "off"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("status optimal"));
}
