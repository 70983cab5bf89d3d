use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpground"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

fn manifest(csv: &Path) -> Value {
    let text = fs::read_to_string(csv.with_extension("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn lambda_reports_eigenvalue() {
    let o = run(&["lambda", "--d", "5", "--b", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o)
        .lines()
        .find(|l| l.starts_with("lambda"))
        .unwrap()
        .to_string();
    let value = line.split_whitespace().nth(1).unwrap();
    let lam: f64 = value.parse().unwrap();
    assert!(lam > 1.0 && lam < 5.0);
    assert!(value.split('.').nth(1).unwrap().len() >= 12);

    let v = json(&["lambda", "--d", "5", "--b", "3.7733455", "--json"]);
    assert!((v["lambda"].as_f64().unwrap() - 4.01036).abs() <= 5e-5);
    assert!(v["invariant_violations"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["lambda", "--d", "3", "--b", "1"][..],
        &["lambda", "--d", "5"],
        &["lambda-inf", "--d", "4"],
        &["curve", "--d", "5", "--points", "0"],
        &["profile", "--d", "5", "--out", "x.csv"],
        &["lambda", "--d", "5", "--b", "-1"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn lambda_inf_methods_agree() {
    let shoot = json(&["lambda-inf", "--d", "5", "--json"]);
    let pade = json(&["lambda-inf", "--d", "5", "--method", "pade", "--json"]);
    let (s, p) = (
        shoot["lambda_inf"].as_f64().unwrap(),
        pade["lambda_inf"].as_f64().unwrap(),
    );
    assert!((s - 4.01036).abs() <= 5e-5);
    assert!((s - p).abs() < 1e-3);
    assert_eq!(pade["method"], "pade");
}

#[test]
fn curve_writes_sorted_csv_with_manifest_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = [
        "curve", "--d", "5", "--b-min", "0.5", "--b-max", "500", "--points", "15",
    ];
    for (out, jobs) in [(&a, "1"), (&b, "2")] {
        let mut args = common.to_vec();
        args.extend(["--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert_eq!(run(&args).status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "b,lambda,bracket_width,tail_C,mass,energy,pohozaev_residual"
    );
    let bs: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(bs.len(), 15);
    assert!(bs.windows(2).all(|w| w[1] > w[0]));

    let m = manifest(&a);
    for key in [
        "version",
        "command",
        "params",
        "tolerances",
        "wall_ms",
        "anomalies",
    ] {
        assert!(m.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(m["command"], "curve");
    assert_eq!(m["tolerances"]["rel_tol"], 1e-11);
    assert_eq!(m["params"]["points"], 15);
}

#[test]
fn snake_reports_regime() {
    let o = run(&["snake", "--d", "13", "--b-max", "3000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("regime      monotone"));
    let exponent: f64 = text
        .lines()
        .find(|l| l.starts_with("exponent"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent + 4.0).abs() < 0.1);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roots.csv");
    let o = run(&[
        "snake",
        "--d",
        "5",
        "--b-max",
        "600",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("regime      oscillatory"));
    let roots = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = roots.lines().collect();
    assert_eq!(rows[0], "n,b_n,ratio");
    assert_eq!(rows.len(), 5);
    let b1: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((b1 / 3.7733455 - 1.0).abs() < 1e-5);
    assert_eq!(manifest(&out)["command"], "snake");
}

#[test]
fn profiles_have_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let cases: [(&[&str], &str, &str); 4] = [
        (
            &["--b", "14000", "--emden"],
            "e.csv",
            "t,psi,psi_t,Psi,Psi_t",
        ),
        (&["--b", "10"], "r.csv", "r,f,fp"),
        (&["--singular"], "s.csv", "r,F,Fp"),
        (&["--singular", "--emden"], "se.csv", "t,Psi,Psi_t"),
    ];
    for (extra, name, header) in cases {
        let out = path(name);
        let mut args = vec!["profile", "--d", "5", "--out", &out];
        args.extend_from_slice(extra);
        assert_eq!(run(&args).status.code(), Some(0), "{args:?}");
        let text = fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().next().unwrap(), header);
        assert!(text.lines().count() > 100);
    }
    // The Emden-frame Psi of a large amplitude oscillates at intermediate t.
    let text = fs::read_to_string(path("e.csv")).unwrap();
    let psi_t: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    let turns = psi_t
        .windows(2)
        .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
        .count();
    assert!(turns >= 3, "{turns}");
}

#[test]
fn lambda_override_shows_both_failure_modes() {
    let v = json(&["lambda", "--d", "5", "--b", "10", "--json"]);
    let lam = v["lambda"].as_f64().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let shot = |l: f64| {
        let o = run(&[
            "profile",
            "--d",
            "5",
            "--b",
            "10",
            "--lambda",
            &l.to_string(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    assert!(shot(lam + 1e-3).contains("HitZero"));
    assert!(shot(lam - 1e-3).contains("TurnedUp"));
}

#[test]
fn verify_runs_checks() {
    let start = Instant::now();
    let o = run(&["verify", "--d", "9", "--quick"]);
    assert!(start.elapsed() < Duration::from_secs(30));
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(&["verify", "--d", "13"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS nondegeneracy") && text.contains("a3"));
    assert!(text.contains("PASS convergence rate"));
}
