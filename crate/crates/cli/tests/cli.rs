use std::process::{Command, Output};

fn trotterr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trotterr"))
        .args(args)
        .env("TROTTERR_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let i = table[0].iter().position(|h| h == name).expect("column exists");
    table[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn zero_time_bounds_vanish() {
    let o = trotterr(&["bounds", "--model", "heisenberg1d", "--n", "3", "--p", "1", "--t", "0", "--r", "1"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    let names = column(&t, "bound");
    assert!(names.contains(&"triangle".to_string()));
    assert!(names.contains(&"interference".to_string()));
    assert!(column(&t, "value").iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn header_echoes_config_and_version() {
    let o = trotterr(&["bounds", "--n", "4", "--t", "n"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# trotterr "));
    assert!(text.contains("# subcommand = bounds\n"));
    assert!(text.contains("# t = n\n"));
    assert!(text.contains("model,n,p,t,r,bound,value,assumptions_ok,flags,seed"));
}

#[test]
fn exit_codes() {
    assert_eq!(trotterr(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(trotterr(&["bounds", "--n", "x"]).status.code(), Some(2));
    assert_eq!(trotterr(&["otoc", "--n", "13"]).status.code(), Some(3));
    assert_eq!(
        trotterr(&["trotter-search", "--p", "2", "--n", "4", "--criteria", "interference"]).status.code(),
        Some(3)
    );
}

#[test]
fn memory_guard_needs_force() {
    let o = Command::new(env!("CARGO_BIN_EXE_trotterr"))
        .args(["otoc", "--n", "4", "--r", "1"])
        .env("TROTTERR_MEMORY_CAP_MB", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
    let o = Command::new(env!("CARGO_BIN_EXE_trotterr"))
        .args(["otoc", "--n", "4", "--r", "1", "--force"])
        .env("TROTTERR_MEMORY_CAP_MB", "0")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn search_schema_and_config_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let o = trotterr(&[
        "trotter-search", "--model", "heisenberg1d", "--p", "1", "--n", "4..5", "--t", "n",
        "--eps", "1e-2", "--instances", "2", "--samples", "4",
        "--criteria", "empirical,triangle,counting,interference,worst",
        "--out", first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = trotterr(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    let t = rows(&String::from_utf8(a).unwrap());
    assert_eq!(
        t[0],
        ["model", "n", "p", "t", "eps", "criterion", "r_mean", "r_std", "instances", "N", "seed"]
    );
    assert_eq!(t.len(), 1 + 2 * 5);
    let get = |c: &str| {
        let crit = column(&t, "criterion");
        let r = column(&t, "r_mean");
        crit.iter().zip(r).filter(|(x, _)| *x == c).map(|(_, v)| v.parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    for (e, w) in get("empirical").iter().zip(get("worst")) {
        assert!(*e <= w);
    }
    for (tri, cnt) in get("triangle").iter().zip(get("counting")) {
        assert!(*tri <= cnt);
    }
}

#[test]
fn flags_override_config_entries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "subcommand = bounds\nn = 3\nt = 0\n").unwrap();
    let o = trotterr(&["--config", cfg.to_str().unwrap(), "--n", "5"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    assert!(column(&t, "n").iter().all(|n| n == "5"));
}

#[test]
fn stats_rows_carry_seed() {
    let o = trotterr(&["empirical", "--n", "4", "--r", "5,50", "--samples", "8", "--instances", "2", "--seed", "7"]);
    let t = rows(&stdout(&o));
    assert_eq!(
        &t[0][..12],
        ["model", "n", "t", "r", "p", "ensemble", "N", "mean_sqrtS", "std_sqrtS", "mean_S", "var_S", "seed"]
    );
    assert_eq!(t.len(), 5);
    assert!(column(&t, "seed").iter().all(|s| s == "7"));
    let m: Vec<f64> = column(&t, "mean_sqrtS").iter().map(|v| v.parse().unwrap()).collect();
    assert!(m[1] < m[0] && m[3] < m[2]);
}

#[test]
fn error_vs_t_grows_with_time() {
    let o = trotterr(&["error-vs-t", "--n", "4", "--r", "1000", "--t", "1,10", "--instances", "1", "--samples", "4"]);
    let t = rows(&stdout(&o));
    let m: Vec<f64> = column(&t, "mean_sqrtS").iter().map(|v| v.parse().unwrap()).collect();
    assert!(m[1] > 5.0 * m[0]);
}

#[test]
fn otoc_and_haar_schemas() {
    let o = trotterr(&["otoc", "--n", "4", "--t", "1", "--r", "4,16"]);
    let t = rows(&stdout(&o));
    assert_eq!(
        &t[0][..10],
        ["model", "n", "t", "p", "r", "otoc_exact", "otoc_trott", "gap", "bound_avg", "bound_worst"]
    );
    let gap: Vec<f64> = column(&t, "gap").iter().map(|v| v.parse().unwrap()).collect();
    let avg: Vec<f64> = column(&t, "bound_avg").iter().map(|v| v.parse().unwrap()).collect();
    assert!(gap.iter().zip(&avg).all(|(g, b)| g <= b));
    let o = trotterr(&["haar-d", "--scenario", "one_nonzero", "--d", "1,4", "--mc-samples", "100"]);
    let t = rows(&stdout(&o));
    assert_eq!(&t[0][..6], ["scenario", "d", "D_value", "method", "samples", "std_err"]);
    let d: Vec<f64> = column(&t, "D_value").iter().map(|v| v.parse().unwrap()).collect();
    assert!(d[0].abs() < 1e-12 && d[1] > 0.0);
}

#[test]
fn json_mirror() {
    let o = trotterr(&["bounds", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["subcommand"], "bounds");
    assert!(v["rows"].as_array().unwrap().len() >= 4);
    let o = trotterr(&["hamiltonian", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}
