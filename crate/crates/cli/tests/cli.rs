use std::fs;
use std::process::{Command, Output};

fn gpsol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpsol"))
        .args(args)
        .env_remove("GPSOL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    let tok = line
        .split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"));
    tok.parse().unwrap()
}

const SMALL: [&str; 4] = ["--L", "20", "--n", "2001"];

#[test]
fn solve_manakov_reports_subsonic_speed() {
    let mut args = vec![
        "solve", "--alpha", "1", "--beta", "1", "--q", "0.3", "--m", "0.2",
    ];
    args.extend(SMALL);
    let o = gpsol(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = field(&stdout(&o), "c");
    assert!(c > 0.0 && c < 2f64.sqrt());
    assert!(stdout(&o).contains("H2=true"));
}

#[test]
fn solve_rejects_momentum_out_of_range() {
    let o = gpsol(&["solve", "--q", "2.0", "--m", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--q"), "{}", stderr(&o));
    let o = gpsol(&["solve", "--q", "0.3", "--n", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--n"));
    let o = gpsol(&["solve", "--m", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--q"));
    let o = gpsol(&["solve", "--q", "0.3", "--nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scalar_mode_reproduces_one_third() {
    let mut args = vec!["solve", "--m", "0", "--q", "0.2854"];
    args.extend(SMALL);
    let o = gpsol(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "E") - 1.0 / 3.0).abs() < 2e-3);
}

#[test]
fn non_convergence_exits_two() {
    let mut args = vec!["solve", "--q", "0.3", "--m", "0.2", "--max-iters", "2"];
    args.extend(SMALL);
    let o = gpsol(&args);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"q": 0.3, "m": 0.2, "L": 20, "n": 2001, "alpha": 1.0, "beta": 1.0}"#,
    )
    .unwrap();
    let out = dir.path().join("a.json");
    let o = gpsol(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(a["m"], 0.2);
    let o = gpsol(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(b["m"], 0.1);
    fs::write(&cfg, r#"{"q": 0.3, "unknown": 1}"#).unwrap();
    let o = gpsol(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn profiles_and_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let trace = dir.path().join("t.csv");
    let o = gpsol(&[
        "solve",
        "--q",
        "0.3",
        "--m",
        "0.2",
        "--L",
        "10",
        "--n",
        "401",
        "--format",
        "csv",
        "--profiles",
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,rho,phi,v,theta");
    assert_eq!(text.lines().count(), 402);
    let t = fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("iter,E,grad_norm,p_residual,mass_residual"));
}

#[test]
fn residual_check_on_stored_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let mut args = vec![
        "solve",
        "--q",
        "0.3",
        "--m",
        "0.2",
        "--profiles",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(SMALL);
    assert_eq!(gpsol(&args).status.code(), Some(0));
    let o = gpsol(&["check", "residual", "--in", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).matches("PASS").count(), 2);
    let o = gpsol(&[
        "check",
        "residual",
        "--in",
        out.to_str().unwrap(),
        "--c",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = gpsol(&[
        "check",
        "residual",
        "--in",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_suites_pass() {
    let o = gpsol(&["check", "scalar", "--L", "20", "--n", "2001"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = gpsol(&["check", "rearrange", "--cases", "1000", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS hardy_littlewood"));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn sweep_is_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let report = dir.path().join(format!("{name}.report.json"));
        let mut args = vec![
            "sweep",
            "--q-list",
            "0.15,0.3",
            "--m-list",
            "0,0.1",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ];
        args.extend(SMALL);
        let o = gpsol(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let r: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
        assert!(r["checks"].as_array().unwrap().len() > 5);
        fs::read_to_string(out).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("8", "b.csv");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 5);
    assert_eq!(
        a.lines().next().unwrap(),
        "q,m,e_min,c,lambda,converged,h1,h2,bounds_ok"
    );
}

#[test]
fn single_cell_sweep_matches_solve() {
    let mut args = vec![
        "sweep",
        "--q-list",
        "0.3",
        "--m-list",
        "0.2",
        "--restarts",
        "1",
        "--jobs",
        "1",
    ];
    args.extend(SMALL);
    let o = gpsol(&args);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let e_sweep: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    let mut args = vec!["solve", "--q", "0.3", "--m", "0.2"];
    args.extend(SMALL);
    let e_solve = field(&stdout(&gpsol(&args)), "E");
    assert_eq!(e_sweep, e_solve);
}

#[test]
fn sweep_rejects_bad_lists() {
    let o = gpsol(&["sweep", "--q-list", "0.3,1.7", "--m-list", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--q-list"));
    let o = gpsol(&["sweep", "--q-list", "0.3", "--m-list", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--m-list"));
}
