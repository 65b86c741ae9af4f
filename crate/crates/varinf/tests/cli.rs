use std::fs;
use std::path::Path;
use std::process::Command;

use varinf::cli::{dispatch, EXIT_FAILED, EXIT_INVALID, EXIT_OK};

const CONFIG: &str = r#"
[scenario]
variant = "SEIR"
N = 300
seed = 4
replications = 3
e0_frac = 0.02
i0_frac = 0.02

[model]
family = "piecewise_indicator"
beta = 0.8
exposed = { law = "exponential", rate = 0.5 }
infectious = { law = "gamma", shape = 2.0, rate = 0.5 }

[grid]
delta = 0.05
horizon = 6.0

[experiment]
ns = [200, 800]
reps = 12
paths = 5
"#;

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("varinf").chain(args.iter().copied()))
}

fn setup(dir: &Path) -> String {
    let cfg = dir.join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    cfg.to_str().unwrap().to_string()
}

fn out(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn flln_writes_csv_with_header() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let o = out(tmp.path(), "flln");
    assert_eq!(run(&["flln", "--config", &cfg, "--out", &o]), EXIT_OK);
    let text = fs::read_to_string(Path::new(&o).join("flln.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,S,FoI,E,I,R,Upsilon"));
    assert_eq!(lines.count(), 121);
    assert!(!text.contains('\r'));
    let sojourn = fs::read_to_string(Path::new(&o).join("sojourn.csv")).unwrap();
    assert!(sojourn.starts_with("t,G,Phi,Psi,G0,Phi0,Psi0,F0I\n"));
    assert!(Path::new(&o).join("config.toml").exists());
}

#[test]
fn missing_config_is_a_usage_error() {
    assert_eq!(run(&["flln", "--out", "x"]), EXIT_INVALID);
    assert_eq!(run(&["frobnicate"]), EXIT_INVALID);
    assert_eq!(run(&["--help"]), EXIT_OK);
    assert_eq!(run(&["flln", "--config", "/nonexistent/c.toml"]), EXIT_INVALID);
}

#[test]
fn invalid_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, CONFIG.replace("i0_frac = 0.02", "i0_frac = 1.5")).unwrap();
    assert_eq!(run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out(tmp.path(), "o")]), EXIT_INVALID);
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let (a, b, c) = (out(tmp.path(), "a"), out(tmp.path(), "b"), out(tmp.path(), "c"));
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", &a]), EXIT_OK);
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", &b]), EXIT_OK);
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", &c, "--seed", "5", "--reps", "2"]), EXIT_OK);
    for f in ["trajectories.csv", "events.csv"] {
        let x = fs::read(Path::new(&a).join(f)).unwrap();
        assert_eq!(x, fs::read(Path::new(&b).join(f)).unwrap());
        assert_ne!(x, fs::read(Path::new(&c).join(f)).unwrap());
    }
    let traj = fs::read_to_string(Path::new(&a).join("trajectories.csv")).unwrap();
    assert!(traj.starts_with("rep,t,S,E,I,R,FoI,Upsilon\n"));
    assert_eq!(traj.lines().count(), 1 + 3 * 121);
}

#[test]
fn fclt_writes_kernels_and_ensemble() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let o = out(tmp.path(), "fclt");
    assert_eq!(run(&["fclt", "--config", &cfg, "--out", &o, "--paths", "4"]), EXIT_OK);
    let dir = Path::new(&o);
    assert!(dir.join("kernel_S_S.csv").exists() && dir.join("kernel_FoI_I.csv").exists());
    let ens = fs::read_to_string(dir.join("ensemble_I.csv")).unwrap();
    assert!(ens.starts_with("t,path_0,path_1,path_2,path_3\n"));
    for name in ["S", "FoI", "E", "I", "R", "Upsilon"] {
        assert!(dir.join(format!("ensemble_{name}.csv")).exists());
    }
}

#[test]
fn verify_prm_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = out(tmp.path(), "prm");
    assert_eq!(run(&["verify-prm", "--out", &o, "--seed", "1"]), EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(Path::new(&o).join("prm_report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["experiment"], "prm");
    assert_eq!(json["statistics"].as_array().unwrap().len(), 5);
    assert_eq!(run(&["verify-prm", "--out", &o, "--reps", "10"]), EXIT_INVALID);
}

#[test]
fn verify_lln_reports_through_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let o = out(tmp.path(), "lln");
    let code = run(&["verify-lln", "--config", &cfg, "--out", &o]);
    assert!(code == EXIT_OK || code == EXIT_FAILED);
    let report: varinf::report::McReport =
        serde_json::from_str(&fs::read_to_string(Path::new(&o).join("lln_report.json")).unwrap()).unwrap();
    assert_eq!(report.pass, code == EXIT_OK);
    assert_eq!(report.pass, report.computed_pass());
    assert!(Path::new(&o).join("lln_report.txt").exists());
}

#[test]
fn output_directory_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let o = tmp.path().join("from_env");
    let status = Command::new(env!("CARGO_BIN_EXE_varinf"))
        .args(["flln", "--config", &cfg])
        .env("VARINF_OUT", &o)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(o.join("flln.csv").exists());
    let status = Command::new(env!("CARGO_BIN_EXE_varinf")).arg("simulate").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_INVALID));
}
