use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crack-pencil"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fold_l2_json() {
    let out = bin(&["fold", "--l", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let n = v["result"]["n_star"].as_f64().unwrap();
    assert!(n > 0.11912 && n < 0.11913);
    assert_eq!(v["command"], "fold");
    assert_eq!(v["tool"], "crack-pencil");
}

#[test]
fn pencil_coefficients() {
    let v = json(&bin(&["pencil", "--degree", "4", "--family", "first"]));
    let c: Vec<f64> = v["result"]["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(c, vec![1.0, 0.0, -6.0, 0.0, 1.0]);
}

#[test]
fn char_scan_header_follows_n_list() {
    let out = bin(&[
        "char-scan",
        "--l",
        "2",
        "--n-list",
        "0,0.1,0.2,0.3,0.4,0.5",
        "--points",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,phi(n=0),phi(n=0.1),phi(n=0.2),phi(n=0.3),phi(n=0.4),phi(n=0.5)"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.len() == 7));
}

#[test]
fn branch_and_shoot_headers() {
    let b = String::from_utf8(bin(&["branch", "--l", "2", "--n-max", "0.05"]).stdout).unwrap();
    assert!(b.starts_with("n,lambda\n"));
    let first: Vec<f64> = b
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first, vec![0.0, -2.0]);
    let s = String::from_utf8(
        bin(&[
            "shoot",
            "--l",
            "2",
            "--n",
            "0",
            "--lambda",
            "-2",
            "--z-max",
            "5",
            "--samples",
            "11",
        ])
        .stdout,
    )
    .unwrap();
    assert!(s.starts_with("z,psi,dpsi\n"));
    assert_eq!(s.lines().count(), 12);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let csv = dir.path().join(format!("s{i}.csv"));
            let sum = dir.path().join(format!("s{i}.json"));
            let out = bin(&[
                "shoot",
                "--l",
                "3",
                "--n",
                "0.01",
                "--z-max",
                "10",
                "--samples",
                "101",
                "--output",
                csv.to_str().unwrap(),
                "--summary",
                sum.to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(0));
            assert!(out.stdout.is_empty());
            let mut bytes = std::fs::read(&csv).unwrap();
            bytes.extend(std::fs::read(&sum).unwrap());
            bytes
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let summary: Value = serde_json::from_slice(&std::fs::read(dir.path().join("s0.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["zeros"]["zeros"].as_array().unwrap().len(), 3);
    assert!(summary["config"]["lambda"].as_f64().unwrap() < -3.0);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# fold run\nl = 3\nformat = json\n").unwrap();
    let v = json(&bin(&["fold", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["result"]["l"], 3);
    let v = json(&bin(&["fold", "--config", cfg.to_str().unwrap(), "--l", "2"]));
    assert_eq!(v["result"]["l"], 2);
    assert_eq!(v["config"]["l"], 2);
    std::fs::write(&cfg, "l = 3\nz_max = 4\n").unwrap();
    let out = bin(&["fold", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("z-max"));
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["crack", "--alphas", "-1,1"]).status.code(), Some(0));
    assert_eq!(
        bin(&["crack", "--alphas", "-3,3", "--l-max", "2"]).status.code(),
        Some(3)
    );
    assert_eq!(
        bin(&["crack", "--alphas", "-1,1", "--n", "0.2", "--l-max", "2"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(bin(&["crack"]).status.code(), Some(2));
    assert_eq!(bin(&["fold", "--l", "0"]).status.code(), Some(2));
    assert_eq!(bin(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn crack_modes() {
    let v = json(&bin(&["crack", "--alphas", "-1,1", "--any-subset"]));
    assert_eq!(v["config"]["mode"], "any-subset");
    assert_eq!(v["result"]["decay_exponent"], 2);
    let out = bin(&["crack", "--alphas", "-1,1", "--any-subset", "--mode", "all-zeros"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mu_reports_both_methods() {
    let v = json(&bin(&["mu", "--l", "1", "--family", "first", "--method", "quad"]));
    assert_eq!(v["result"]["ift"].as_f64(), Some(0.0));
    assert!(v["result"]["mu"].is_null());
    assert_eq!(v["result"]["quadrature"]["diagnostics"]["divergent_tail"], true);
}

#[test]
fn figure_three_curves_meet_at_minus_one() {
    let out = bin(&["figure", "--id", "3", "--format", "json", "--points", "5"]);
    let v = json(&out);
    assert_eq!(v["result"]["n_list"].as_array().unwrap().len(), 21);
    assert_eq!(bin(&["figure", "--id", "9"]).status.code(), Some(2));
}
