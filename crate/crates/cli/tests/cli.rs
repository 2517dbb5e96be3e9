use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn inertial(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_inertial"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn default_run_passes_with_complete_report() {
    let tmp = TempDir::new().unwrap();
    let out = inertial(tmp.path(), &["run"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = read(tmp.path(), "trajectory.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,g_x,g_y,grad_norm_y,gap,E,delta,Delta");
    assert!(lines.next().unwrap().ends_with("NaN,NaN,NaN"));
    assert!(lines.count() > 5);

    let report = json(tmp.path(), "report.json");
    assert_eq!(report["termination"], "gradient-tolerance");
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["run"]["objective"], "quadratic");
    for name in ["lyapunov", "gradH", "rates", "ode-compare"] {
        let m = &report["monitors"][name];
        for field in [
            "enabled",
            "status",
            "pass",
            "violation_count",
            "violations",
            "error",
            "details",
        ] {
            assert!(m.get(field).is_some(), "{name}.{field} missing");
        }
        assert!(m["pass"].is_boolean() && m["violations"].is_array());
    }
    assert_eq!(report["monitors"]["lyapunov"]["status"], "pass");
    assert_eq!(report["monitors"]["ode-compare"]["status"], "skipped");
    assert!(tmp.path().join("out/config.toml").exists());
}

#[test]
fn config_echo_reloads_to_the_same_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[run]\nobjective = \"doublewell\"\nx0 = [0.3]\n[params]\nbeta = 0.4\nstep = 0.02\n";
    assert_eq!(inertial(tmp.path(), &["run"], Some(cfg)).status.code(), Some(0));
    let echo = read(tmp.path(), "config.toml");
    let first = read(tmp.path(), "trajectory.csv");
    assert_eq!(inertial(tmp.path(), &["run"], Some(&echo)).status.code(), Some(0));
    assert_eq!(read(tmp.path(), "trajectory.csv"), first);
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = inertial(tmp.path(), &["run"], Some("[params]\nbeta = 0.5\nstep = 1.0\n"));
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("2(1-beta)/L_g = 1"), "{msg}");

    let out = inertial(
        tmp.path(),
        &["run"],
        Some("[params]\nbeta = 0.3\nstep = 2.0\n[run]\nobjective = \"rosenbrock\"\n"),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("{}", 2.0 * 0.7 / 3030.0)));

    for bad in [
        "[run]\nobjective = \"nope\"\n",
        "[params]\nbeta = 1.0\n",
        "[params]\nstep_fraction = 1.0\n",
        "[params]\nunknown_key = 1\n",
        "[run]\nx0 = [1.0, 2.0]\n",
        "not toml at all [",
    ] {
        assert_eq!(
            inertial(tmp.path(), &["run"], Some(bad)).status.code(),
            Some(2),
            "{bad}"
        );
    }
}

#[test]
fn unconverged_run_exits_1() {
    let tmp = TempDir::new().unwrap();
    let out = inertial(tmp.path(), &["run"], Some("[stop]\nmax_iter = 5\n"));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(tmp.path(), "report.json")["termination"], "max-iterations");
}

#[test]
fn sweep_grid_rows_are_ordered_and_pass() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[sweep]\nbeta = [0.3, 0.5, 0.7]\nstep_fraction = [0.5, 0.8, 0.95]\n";
    let out = inertial(tmp.path(), &["sweep", "--workers", "4"], Some(cfg));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let parallel = read(tmp.path(), "summary.csv");
    let mut rdr = csv::Reader::from_reader(parallel.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[col("index")].parse::<usize>().unwrap(), i);
        assert_eq!(&r[col("pass")], "true");
        for m in ["lyapunov", "gradH", "rates"] {
            assert_eq!(&r[col(m)], "pass");
        }
    }

    assert_eq!(
        inertial(tmp.path(), &["sweep", "--workers", "1"], Some(cfg))
            .status
            .code(),
        Some(0)
    );
    assert_eq!(read(tmp.path(), "summary.csv"), parallel);
}

#[test]
fn sweep_edge_cases() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        inertial(tmp.path(), &["sweep"], Some("[sweep]\nbeta = []\n"))
            .status
            .code(),
        Some(0)
    );
    assert_eq!(read(tmp.path(), "summary.csv").lines().count(), 1);

    assert_eq!(
        inertial(tmp.path(), &["sweep"], Some("[sweep]\nbeta = [0.5, 1.0]\n"))
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        inertial(
            tmp.path(),
            &["sweep"],
            Some("[sweep]\nobjective = [\"quadratic\", \"nope\"]\n")
        )
        .status
        .code(),
        Some(2)
    );

    // failing rows are recorded and the sweep continues
    let out = inertial(
        tmp.path(),
        &["sweep"],
        Some("[stop]\nmax_iter = 5\n[sweep]\nalpha = [1.0, 3.0]\n"),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(read(tmp.path(), "summary.csv").lines().count(), 3);
}

#[test]
fn rates_on_the_quartic() {
    let tmp = TempDir::new().unwrap();
    let out = inertial(
        tmp.path(),
        &["rates"],
        Some("[run]\nobjective = \"power:q=4\"\n[stop]\nmax_iter = 20000\n"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(tmp.path(), "rates.json");
    assert_eq!(doc["regime"], "slow");
    let value = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == "value_gap_y")
        .unwrap();
    assert!((value["slope_fitted"].as_f64().unwrap() + 2.0).abs() <= 0.3);

    for theta in ["0.0", "1.0", "1.5", "-0.2"] {
        let cfg = format!("[rates]\ntheta = {theta}\n");
        assert_eq!(
            inertial(tmp.path(), &["rates"], Some(&cfg)).status.code(),
            Some(2),
            "theta {theta}"
        );
    }
}

#[test]
fn ode_ladder_on_the_quadratic() {
    let tmp = TempDir::new().unwrap();
    let out = inertial(tmp.path(), &["ode-compare", "--plot-stub"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "ode_compare.csv");
    assert!(csv.starts_with("s,beta,n_compared,sup_distance\n"));
    let d: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(d.len(), 3);
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
    assert!(tmp.path().join("out/plot_ode_compare.py").exists());
}

#[test]
fn seeded_presets_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[run]\nobjective = \"rosenbrock\"\nx0 = \"random\"\n[stop]\nmax_iter = 200\n";
    let x0 = |seed: &str| {
        inertial(tmp.path(), &["run", "--seed", seed], Some(cfg));
        (
            json(tmp.path(), "report.json")["x0"].clone(),
            read(tmp.path(), "trajectory.csv"),
        )
    };
    let (a, ta) = x0("5");
    let (b, tb) = x0("5");
    let (c, _) = x0("6");
    assert_eq!((a.clone(), ta), (b, tb));
    assert_ne!(a, c);
}

#[test]
fn catalog_commands() {
    let tmp = TempDir::new().unwrap();
    let out = inertial(tmp.path(), &["list-objectives"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("quadratic:dim=10:cond=100"));
    let out = inertial(
        tmp.path(),
        &["check-gradients"],
        Some("[run]\nobjective = \"quartic2d\"\n"),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("ok"));
}
