use std::path::Path;
use std::process::{Command, Output};

fn frakolm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frakolm"))
        .args(args)
        .env_remove("FRAKOLM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Records of a CSV artifact, skipping the manifest line.
fn records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn manifest_of_csv(text: &str) -> serde_json::Value {
    let line = text.lines().next().unwrap();
    serde_json::from_str(line.strip_prefix("# manifest: ").unwrap()).unwrap()
}

/// Removes the fields that legitimately change between runs.
fn scrub(v: &mut serde_json::Value) {
    if let Some(m) = v.as_object_mut() {
        m.remove("timestamp");
        m.remove("seconds");
        for (_, x) in m.iter_mut() {
            scrub(x);
        }
    } else if let Some(a) = v.as_array_mut() {
        a.iter_mut().for_each(scrub);
    }
}

#[test]
fn classical_constants() {
    let o = frakolm(&["constants", "--d", "3", "--alpha", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (header, rows) = records(&text);
    assert_eq!(header, ["quantity", "input", "value", "residual"]);
    let star = rows.iter().find(|r| r[0] == "nu_star").unwrap();
    assert!((star[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    let m = manifest_of_csv(&text);
    assert_eq!(m["command"], "constants");
    assert_eq!(m["config"]["d"], 3);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn alpha_two_needs_three_dimensions() {
    let o = frakolm(&["constants", "--d", "2", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha=2 requires d≥3"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(frakolm(&["constants", "--d", "3"]).status.code(), Some(2));
    assert_eq!(frakolm(&["t-norm", "--d", "2", "--alpha", "1.5", "--n", "48"]).status.code(), Some(2));
    assert_eq!(frakolm(&["sweep", "--only", "11"]).status.code(), Some(2));
    let o = frakolm(&["evolve", "--d", "2", "--alpha", "1.5", "--n", "16", "--dt", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn kappa_columns_meet_only_at_two() {
    let o = frakolm(&["compare-constants", "--d", "2", "--alpha", "1.5"]);
    assert!(o.status.success());
    let (header, rows) = records(&stdout(&o));
    assert_eq!(header, ["p", "sv_kappa", "kappa_p", "nu_p", "nu_sv_route"]);
    assert_eq!(rows.len(), 201);
    for r in &rows {
        let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        if v[0] == 2.0 {
            assert!((v[1] / v[2] - 1.0).abs() < 1e-14);
        } else {
            assert!(v[1] < v[2], "p={}", v[0]);
        }
    }
}

#[test]
fn gamma_curve_is_decreasing() {
    let o = frakolm(&["gamma-exponent", "--d", "2", "--alpha", "1.5", "--points", "50"]);
    let (_, rows) = records(&stdout(&o));
    let g: Vec<f64> = rows.iter().filter(|r| r[0] == "gamma_of_nu").map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(g.len(), 50);
    assert_eq!(g[0], 2.0);
    assert!(g.windows(2).all(|w| w[1] < w[0]));
    assert!(*g.last().unwrap() > 1.5);
}

#[test]
fn outputs_are_reproducible() {
    let a = ["t-norm", "--d", "2", "--alpha", "1.5", "--n", "16", "--eps", "0.05"];
    let mut x: serde_json::Value = serde_json::from_slice(&frakolm(&a).stdout).unwrap();
    let mut y: serde_json::Value = serde_json::from_slice(&frakolm(&a).stdout).unwrap();
    scrub(&mut x);
    scrub(&mut y);
    assert_eq!(x, y);
    let c = ["gamma-exponent", "--d", "3", "--alpha", "1.2", "--points", "20"];
    let (p, q) = (stdout(&frakolm(&c)), stdout(&frakolm(&c)));
    assert_eq!(p.lines().skip(1).collect::<Vec<_>>(), q.lines().skip(1).collect::<Vec<_>>());
    let mut mp = manifest_of_csv(&p);
    let mut mq = manifest_of_csv(&q);
    scrub(&mut mp);
    scrub(&mut mq);
    assert_eq!(mp, mq);
}

#[test]
fn solve_dump_and_orlicz_norm() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("u.bin");
    let out = dir.path().join("solve.json");
    let o = frakolm(&[
        "solve-elliptic", "--d", "2", "--alpha", "1.5", "--n", "32", "--lambda", "20", "--eps", "0.03",
        "--dump", dump.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(report["residual"].as_f64().unwrap() <= 1e-10);
    assert!(report["apriori"]["sup_ratio"].as_f64().unwrap() <= 1.0 + 1e-8);
    assert!(Path::new(&format!("{}.json", dump.display())).exists());
    let n = frakolm(&["orlicz-norm", "--in", dump.to_str().unwrap()]);
    assert!(n.status.success());
    let v: serde_json::Value = serde_json::from_slice(&n.stdout).unwrap();
    assert_eq!(v["norm"], report["u_orlicz"]);
    let (lo, hi) = (v["bracket"][0].as_f64().unwrap(), v["bracket"][1].as_f64().unwrap());
    assert!(lo <= hi && hi - lo <= 1e-10 * hi);
}

#[test]
fn unreachable_tolerance_exits_four() {
    let o = frakolm(&["solve-elliptic", "--d", "2", "--alpha", "1.5", "--n", "16", "--lambda", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn threads_flag_wins_over_environment() {
    let bin = env!("CARGO_BIN_EXE_frakolm");
    let env_only = Command::new(bin).args(["constants", "--d", "3", "--alpha", "2"]).env("FRAKOLM_THREADS", "0").output().unwrap();
    assert_eq!(env_only.status.code(), Some(2));
    let both = Command::new(bin)
        .args(["--threads", "1", "constants", "--d", "3", "--alpha", "2"])
        .env("FRAKOLM_THREADS", "0")
        .output()
        .unwrap();
    assert!(both.status.success());
}

#[test]
fn hardy_and_sv_reports() {
    let o = frakolm(&["verify-hardy", "--ineq", "exponential", "--d", "2", "--alpha", "1.5", "--n", "32", "--eps-grid", "0.1,0.01"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r["sup"].as_f64().unwrap().is_finite());
        assert!(r["argmax"]["recipe"].is_string());
    }
    let s = frakolm(&["verify-sv", "--samples", "20000", "--n", "16"]);
    assert!(s.status.success());
    let v: serde_json::Value = serde_json::from_slice(&s.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["sv2_min_best_constant"].as_f64().unwrap() > 3.9);
}

#[test]
fn spectral_and_drift_reports() {
    let o = frakolm(&["spectral-check", "--d", "2", "--alpha", "1.5", "--n", "32"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 5);
    let o = frakolm(&["drift-report", "--d", "2", "--alpha", "1.5", "--n", "128", "--eps", "0.01", "--betas", "0.125"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["domination"]["div_constant"].as_f64().unwrap().is_finite());
    assert_eq!(v["lyapunov"][0]["riesz"]["samples"].as_u64().unwrap() > 0, true);
}

#[test]
fn sweep_rolls_up_selected_criteria() {
    let o = frakolm(&["sweep", "--only", "1,3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], 2);
    assert_eq!(v["failed"], 0);
    let lines = String::from_utf8_lossy(&o.stderr);
    assert!(lines.lines().all(|l| l.starts_with("PASS [")));
}
