use std::path::PathBuf;
use std::process::{Command, Output};

use diolab::output::{Table, Value};

fn diolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diolab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn table(args: &[&str]) -> Table {
    let out = diolab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Table::read_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn delta_of_sqrt2() {
    let t = table(&["dioph", "delta", "--omega", "sqrt:2", "--q", "2"]);
    assert_eq!(t.schema, "diolab.dioph.delta");
    assert_eq!(t.rows.len(), 1);
    assert_eq!(num(t.column("p").unwrap()[0]), 3.0);
    assert!((num(t.column("delta").unwrap()[0]) - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
}

#[test]
fn convergents_count() {
    let t = table(&["dioph", "convergents", "--omega", "sqrt:2", "--count", "4"]);
    let q: Vec<f64> = t.column("q").unwrap().into_iter().map(num).collect();
    assert_eq!(q, [1.0, 2.0, 5.0, 12.0]);
}

#[test]
fn malformed_descriptor_exits_2() {
    let out = diolab(&["dioph", "delta", "--omega", "sqr:2", "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("sqrt:<positive-integer>"), "{msg}");
}

#[test]
fn jbeta_hand_value() {
    let t = table(&[
        "walk", "jbeta", "--omega", "sqrt:2", "--beta", "3", "--eps", "0.2", "--nmax", "5",
    ]);
    let want = 2.0 * 10.0 / (1024.0 * 5f64.powf(1.5));
    assert!((num(t.column("partial").unwrap()[0]) - want).abs() < 1e-15);
}

#[test]
fn dist_at_zero_steps() {
    let t = table(&["walk", "dist", "--omega", "sqrt:2", "--nmax", "0"]);
    assert_eq!(t.rows.len(), 1);
    assert_eq!([num(&t.rows[0][0]), num(&t.rows[0][1])], [0.0, 0.0]);
    assert_eq!(num(t.column("probability").unwrap()[0]), 1.0);
}

#[test]
fn memory_budget_exits_4() {
    let out = diolab(&[
        "walk",
        "dist",
        "--omega",
        "sqrt:2 sqrt:3; sqrt:5 sqrt:7",
        "--nmax",
        "60",
        "--prune",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prune threshold"));
}

#[test]
fn fit_recovers_cubic() {
    let path = scratch("cubic.csv");
    let body: String = (1..=8)
        .map(|i| format!("{},{}\n", i as f64, 0.5 * (i as f64).powi(3)))
        .collect();
    std::fs::write(&path, format!("x,y\n{body}")).unwrap();
    let t = table(&["fit", "--input", path.to_str().unwrap()]);
    assert!((num(t.column("slope").unwrap()[0]) - 3.0).abs() < 1e-12);
    assert!((num(t.column("intercept").unwrap()[0]) - 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn variance_then_fit() {
    let out = scratch("variance.csv");
    let o = out.to_str().unwrap();
    let status = diolab(&[
        "variance", "--omega", "sqrt:2", "--T", "5,10,20", "--nmax", "300", "--out", o,
    ]);
    assert!(status.status.success());
    let t = table(&["fit", "--input", o, "--columns", "T,V_est"]);
    assert_eq!(num(t.column("points").unwrap()[0]), 3.0);
    assert!(num(t.column("slope").unwrap()[0]).is_finite());
}

#[test]
fn atoms_table() {
    let t = table(&["sfactor", "atoms", "--omega", "sqrt:2", "--nmax", "1"]);
    assert_eq!(t.rows.len(), 4);
    let w: f64 = t.column("weight").unwrap().into_iter().map(num).sum();
    assert!(w > 0.0);
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "mc", "--omega", "sqrt:2", "--T", "2,3", "--reps", "40", "--seed", "9", "--format", "json",
    ];
    let a = diolab(&args);
    let b = diolab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t = Table::read_json(&String::from_utf8(a.stdout).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 2);
}

#[test]
fn json_and_csv_agree() {
    let base = [
        "walk",
        "pbar",
        "--omega",
        "sqrt:2; sqrt:3",
        "--eps",
        "0.3,0.5",
        "--nmax",
        "4",
    ];
    let csv = table(&base);
    let mut args = base.to_vec();
    args.extend(["--format", "json"]);
    let out = diolab(&args);
    let json = Table::read_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(csv.columns, json.columns);
    assert_eq!(csv.rows.len(), json.rows.len());
    for (r, s) in csv.rows.iter().zip(&json.rows) {
        for (a, b) in r.iter().zip(s) {
            assert_eq!(a.as_f64(), b.as_f64());
        }
    }
}

#[test]
fn config_file_and_flag_override() {
    let cfg = scratch("exp.conf");
    std::fs::write(&cfg, "# sweep\nomega = sqrt:3\nprecision = 128\n").unwrap();
    let c = cfg.to_str().unwrap();
    let t = table(&["--config", c, "dioph", "delta", "--q", "1"]);
    assert!((num(t.column("delta").unwrap()[0]) - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    let t = table(&["--config", c, "--omega", "sqrt:2", "dioph", "delta", "--q", "1"]);
    assert!((num(t.column("delta").unwrap()[0]) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(
        diolab(&["--config", c, "dioph", "delta", "--q", "1"]).status.code(),
        Some(2)
    );
}
