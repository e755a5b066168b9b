use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pseudomode");

const BASELINE: &str = "\
[spectral]
[[spectral.terms]]
gamma = 1.0
lambda = 0.2
delta = 0.5

[grid]
t_max = 60.0
output_dt = 0.02

[sampler]
n = 5000
T = 60.0
seed = 3
";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    names
}

#[test]
fn figure2_without_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["figure2", "--out", "out"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let names = files(&tmp.path().join("out"));
    assert_eq!(names.len(), 3);
    let summary = names
        .iter()
        .find(|n| n.starts_with("figure2-summary-"))
        .unwrap();
    let text = fs::read_to_string(tmp.path().join("out").join(summary)).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let get = |k: &str| values[header.iter().position(|h| *h == k).unwrap()];
    assert_eq!(get("gamma"), 1.0);
    assert_eq!(get("lambda"), 0.2);
    assert_eq!(get("delta"), 0.5);
    assert!((get("t_S_quadrature") - 9.75).abs() < 1e-4);
    assert!((get("t_P_quadrature") - 2.5).abs() < 1e-4);
}

#[test]
fn malformed_config_exits_one_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.toml"),
        "[spectral]\n[[spectral.terms]]\ngamma = \n",
    )
    .unwrap();
    let out = run(
        tmp.path(),
        &["simulate", "--config", "bad.toml", "--out", "out"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert!(files(&tmp.path().join("out")).is_empty());
}

#[test]
fn too_short_trajectory_exits_two_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), BASELINE).unwrap();
    let out = run(tmp.path(), &["stats", "--config", "c.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(files(&tmp.path().join("out")).is_empty());
}

#[test]
fn simulate_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), BASELINE).unwrap();
    assert!(run(
        tmp.path(),
        &["simulate", "--config", "c.toml", "--out", "a"]
    )
    .status
    .success());
    assert!(run(
        tmp.path(),
        &["simulate", "--config", "c.toml", "--out", "b"]
    )
    .status
    .success());
    let names = files(&tmp.path().join("a"));
    assert_eq!(names, files(&tmp.path().join("b")));
    assert_eq!(names.len(), 1);
    let a = fs::read(tmp.path().join("a").join(&names[0])).unwrap();
    let b = fs::read(tmp.path().join("b").join(&names[0])).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8(a)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        "t,re_a0,im_a0,abs2_a0,re_q1,im_q1,abs2_q1,P0,p,Pi_p"
    );
}

#[test]
fn sample_output_independent_of_workers() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), BASELINE).unwrap();
    for (dir, w) in [("w1", "1"), ("w4", "4")] {
        let out = run(
            tmp.path(),
            &["sample", "--config", "c.toml", "--out", dir, "--workers", w],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let names = files(&tmp.path().join("w1"));
    assert_eq!(names.len(), 2);
    for n in &names {
        assert_eq!(
            fs::read(tmp.path().join("w1").join(n)).unwrap(),
            fs::read(tmp.path().join("w4").join(n)).unwrap()
        );
    }
}

#[test]
fn seed_flag_and_json_format() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), BASELINE).unwrap();
    let base = run(
        tmp.path(),
        &[
            "sample", "--config", "c.toml", "--out", "a", "--format", "json",
        ],
    );
    assert!(base.status.success());
    let seeded = run(
        tmp.path(),
        &[
            "sample", "--config", "c.toml", "--out", "b", "--format", "json", "--seed", "99",
        ],
    );
    assert!(seeded.status.success());
    let a = files(&tmp.path().join("a"));
    let b = files(&tmp.path().join("b"));
    assert!(a.iter().all(|n| n.ends_with(".json")));
    assert_ne!(a, b);
    let summary = b.iter().find(|n| n.contains("summary")).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("b").join(summary)).unwrap())
            .unwrap();
    assert_eq!(v[0]["seed"], 99);
    assert_eq!(v[0]["n_total"], 5000);
}

#[test]
fn analytic_requires_single_lorentzian() {
    let tmp = tempfile::tempdir().unwrap();
    let two = "[spectral]\n\
        [[spectral.terms]]\ngamma = 1.0\nlambda = 0.2\ndelta = 0.5\n\
        [[spectral.terms]]\ngamma = 0.5\nlambda = 0.3\ndelta = -1.0\n";
    fs::write(tmp.path().join("two.toml"), two).unwrap();
    let out = run(
        tmp.path(),
        &["analytic", "--config", "two.toml", "--out", "out"],
    );
    assert_eq!(out.status.code(), Some(1));
    fs::write(tmp.path().join("one.toml"), BASELINE).unwrap();
    let out = run(
        tmp.path(),
        &["analytic", "--config", "one.toml", "--out", "out"],
    );
    assert!(out.status.success());
    assert_eq!(files(&tmp.path().join("out")).len(), 2);
}

#[test]
fn oracle_comparison_small_bath() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = BASELINE
        .replace("t_max = 60.0", "t_max = 10.0")
        .replace("T = 60.0", "T = 10.0")
        + "\n[oracle]\nN = 2000\nW = 40.0\n";
    fs::write(tmp.path().join("c.toml"), cfg).unwrap();
    let out = run(
        tmp.path(),
        &["oracle", "--config", "c.toml", "--out", "out"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let names = files(&tmp.path().join("out"));
    let summary = names.iter().find(|n| n.contains("summary")).unwrap();
    let text = fs::read_to_string(tmp.path().join("out").join(summary)).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let dev: f64 = row[header.iter().position(|h| *h == "max_abs_dev").unwrap()]
        .parse()
        .unwrap();
    assert!(dev < 1e-3);
}
