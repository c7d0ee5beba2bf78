use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qcharge::experiment::{check_diagnostics, read_csv, Diagnostics};

const BIN: &str = env!("CARGO_BIN_EXE_qcharge");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn qcharge(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("QCHARGE_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = qcharge(args, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const TRAJECTORIES: &str = r#"
mode = "trajectories"
[model]
d = 4
gamma = 1.0
f_over_gamma = 1.0
eta = 0.3
[sim]
t_max = 2.0
n_traj = 12
seed = 99
samples = 10
"#;

#[test]
fn minimal_steady_document_runs_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "mode = \"steady-analytic\"\n[model]\nf_over_gamma = 1.0\neta = 0.3\n");
    let out_dir = dir.path().join("out");
    run_ok(&["steady-analytic", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    let t = read_csv(&out_dir.join("steady-analytic.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
    let e = t.column("E_over_Emax").unwrap()[0];
    assert!((e - 0.8779).abs() < 1e-3, "{e}");
    let m = manifest(&out_dir.join("steady-analytic.manifest.json"));
    let base = &m["resolved"]["config"]["model"]["base"];
    assert_eq!(base["d"], 20);
    assert_eq!(base["eta_c"].as_f64().unwrap(), 0.3f64.sqrt());
    assert_eq!(base["eta_d"].as_f64().unwrap(), 0.3f64.sqrt());
    assert!(m["efficiency_rule"].as_str().unwrap().contains("sqrt"));
    assert!(m["config_text"].as_str().unwrap().contains("eta = 0.3"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("unknown.toml", "mode = \"evolve\"\n[model]\nkappa = 1.0\n", "evolve", "model.kappa"),
        (
            "tau.toml",
            "mode = \"trajectories\"\n[sim]\nt_max = 1.0\ndt = 0.001\ntau = 0.0105\n",
            "trajectories",
            "dt",
        ),
        (
            "empty.toml",
            "mode = \"sweep\"\n[sweep]\naxis = \"f\"\nvalues = []\ntarget = \"steady-analytic\"\n",
            "sweep",
            "sweep",
        ),
        ("mismatch.toml", "mode = \"evolve\"\n[sim]\nt_max = 1.0\n", "sweep", "mode"),
    ];
    for (name, text, sub, needle) in cases {
        let cfg = write(d, name, text);
        let out = qcharge(&[sub, "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()], &[]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    let out = qcharge(&["evolve", "--config", "/nonexistent/x.toml"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = qcharge(&["preset", "--preset", "fig99"], &[]);
    assert_eq!(out.status.code(), Some(2));
    // no CSV was left behind by the failures
    assert!(std::fs::read_dir(d).unwrap().all(|e| {
        let p = e.unwrap().path();
        p.extension().map_or(true, |x| x != "csv")
    }));
}

#[test]
fn invariant_failures_map_to_three() {
    let bad = Diagnostics { min_eigenvalue: Some(-1e-6), ..Diagnostics::default() };
    assert_eq!(check_diagnostics(&bad, 1e-9).unwrap_err().exit_code(), 3);
    let fine = Diagnostics { min_eigenvalue: Some(-1e-12), ..Diagnostics::default() };
    assert!(check_diagnostics(&fine, 1e-9).is_ok());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", TRAJECTORIES);
    let cfg = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_ok(&["trajectories", "--config", cfg, "--out", a.to_str().unwrap(), "--threads", "1"]);
    run_ok(&["trajectories", "--config", cfg, "--out", b.to_str().unwrap(), "--threads", "3"]);
    for stem in ["trajectories", "trajectories_trajectories"] {
        let x = std::fs::read(a.join(format!("{stem}.csv"))).unwrap();
        let y = std::fs::read(b.join(format!("{stem}.csv"))).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{stem}");
        assert!(a.join(format!("{stem}.manifest.json")).exists());
    }
    let t = read_csv(&a.join("trajectories.csv")).unwrap();
    assert_eq!(t.rows.len(), 11);
    let m = manifest(&a.join("trajectories.manifest.json"));
    assert_eq!(m["seed"], 99);
    assert_eq!(m["diagnostics"]["trajectories"], 12);
    assert!(m["diagnostics"]["min_eigenvalue"].as_f64().unwrap() >= -1e-9);

    // a different seed changes the output
    let c = dir.path().join("c");
    run_ok(&["trajectories", "--config", cfg, "--out", c.to_str().unwrap(), "--seed", "100"]);
    let x = std::fs::read(a.join("trajectories.csv")).unwrap();
    assert_ne!(x, std::fs::read(c.join("trajectories.csv")).unwrap());
    assert_eq!(manifest(&c.join("trajectories.manifest.json"))["seed"], 100);
}

#[test]
fn thread_variable_is_used_only_without_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "mode = \"steady-analytic\"\n");
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().to_str().unwrap();
    let env = [("QCHARGE_THREADS", "2")];
    assert!(qcharge(&["steady-analytic", "--config", cfg, "--out", out], &env).status.success());
    let m = manifest(&dir.path().join("steady-analytic.manifest.json"));
    assert_eq!(m["threads"], 2);
    let args = ["steady-analytic", "--config", cfg, "--out", out, "--threads", "3"];
    assert!(qcharge(&args, &env).status.success());
    let m = manifest(&dir.path().join("steady-analytic.manifest.json"));
    assert_eq!(m["threads"], 3);
}

#[test]
fn evolve_rows_follow_the_sample_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        "mode = \"evolve\"\nnormalize = false\n[model]\nd = 6\n[sim]\nt_max = 3.0\nsamples = 3\n",
    );
    run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let t = read_csv(&dir.path().join("evolve.csv")).unwrap();
    assert_eq!(t.header[..4], ["g_t", "gamma_t", "E", "ergotropy"]);
    assert_eq!(t.column("g_t").unwrap(), [0.0, 1.0, 2.0, 3.0]);
}

#[test]
fn fig2_preset_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["preset", "--preset", "fig2", "--out", dir.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("fig2.csv"));
    let text = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert!(text.starts_with("f_over_gamma,eta,E_over_Emax,ergotropy_over_Emax\n"));
    assert!(text.contains("\n1.0,1.0,1.0,1.0\n"));
    let t = read_csv(&dir.path().join("fig2.csv")).unwrap();
    let row = t
        .rows
        .iter()
        .find(|r| r[0].as_f64() == 1.0 && r[1].as_f64() == 0.3)
        .unwrap();
    // geometric populations with ratio 10/7 over 20 levels
    let w: Vec<f64> = (0..20).map(|n| (10.0f64 / 7.0).powi(n)).collect();
    let mean = w.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>() / w.iter().sum::<f64>();
    assert!((row[2].as_f64() - mean / 19.0).abs() < 1e-12);
    assert!(dir.path().join("fig2.manifest.json").exists());
    let listing = run_ok(&["preset", "--list"]);
    let listing = String::from_utf8_lossy(&listing.stdout);
    for k in 2..=10 {
        assert!(listing.contains(&format!("fig{k} ")), "{listing}");
    }
}
