//! End-to-end checks of the `lenssplit` binary: exit codes, output files and
//! reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lenssplit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lenssplit")).args(args).current_dir(cwd).output().expect("spawn lenssplit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_LOG: &str = r#"
[meta]
name = "small-log"
reproduces = "smoke test"

[equation]
nonlinearity = "logarithmic"
lambda = -3.0
omega = 2.0
epsilon = 1e-15

[initial]
profile = "gaussian"
amplitude = 2.0
alpha = 2.0

[grid]
a = -8.0
b = 8.0
points = 256

[time]
final_time = 0.5
steps = 50

[scheme]
splitting = "strang"

[output]
observables = ["mass", "h1", "weighted", "error"]
observe_every = 5
reference = "gaussian"
snapshot_times = [0.25]
snapshot_count = 2
snapshot_stride = 8

[study]
steps = [50, 100, 200]
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn list_presets_names_every_preset() {
    let tmp = TempDir::new().unwrap();
    let o = lenssplit(&["list-presets"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for name in ["example1-strangI", "example2-portrait", "example6-sigma3", "rate-cutoff"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
    assert_eq!(text.lines().count(), 25);
}

#[test]
fn help_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let o = lenssplit(&["--help"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("simulate"));
}

#[test]
fn classify_reports_center_and_saddle() {
    let tmp = TempDir::new().unwrap();
    let o = lenssplit(&["classify", "--preset", "example2-portrait", "--out", "c"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("c/classification.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "lambda,omega,regime,mu,kind");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains("two-stationary") && rows[1].ends_with("center"), "{csv}");
    assert!(rows[2].ends_with("saddle"), "{csv}");
    let manifest = fs::read_to_string(tmp.path().join("c/manifest.txt")).unwrap();
    assert!(manifest.contains("regime = two-stationary"));
}

#[test]
fn phase_portrait_writes_curves() {
    let tmp = TempDir::new().unwrap();
    let o = lenssplit(&["phase-portrait", "--preset", "example3-portrait", "--out", "p"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let curves = fs::read_to_string(tmp.path().join("p/phase_portrait.csv")).unwrap();
    assert!(curves.starts_with("curve,seed_mu,seed_mudot,level,closed,point,mu,mudot\n"));
    assert!(curves.lines().count() > 100);
    let stat = fs::read_to_string(tmp.path().join("p/stationary_points.csv")).unwrap();
    // lambda = -omega: a single degenerate equilibrium at mu = 1/sqrt(omega)
    assert_eq!(stat.lines().count(), 2, "{stat}");
    assert!(stat.lines().nth(1).unwrap().ends_with("degenerate"), "{stat}");
}

#[test]
fn simulate_writes_series_snapshots_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "small.toml", SMALL_LOG);
    let o = lenssplit(&["simulate", "--config", &cfg, "--out", "run"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = tmp.path().join("run");
    for f in [
        "series_mass.csv",
        "series_h1.csv",
        "series_weighted.csv",
        "series_error.csv",
        "snapshots.csv",
        "events.csv",
        "manifest.txt",
    ] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let mass = fs::read_to_string(dir.join("series_mass.csv")).unwrap();
    assert!(mass.starts_with("step,t,s,value\n"));
    // steps 0, 5, ..., 50
    assert_eq!(mass.lines().count(), 12);
    let values: Vec<f64> = mass.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(values.iter().all(|v| (v - values[0]).abs() < 1e-12));
    let index = fs::read_to_string(dir.join("snapshots.csv")).unwrap();
    // t = 0, 0.25, 0.5 for both the physical and the transformed field
    assert_eq!(index.lines().count(), 7, "{index}");
    let snap = fs::read_to_string(dir.join("snapshot_u_0001.csv")).unwrap();
    assert!(snap.starts_with("t,x,re,im,abs\n"));
    assert_eq!(snap.lines().count(), 1 + 256 / 8);
    let events = fs::read_to_string(dir.join("events.csv")).unwrap();
    assert_eq!(events.trim(), "event,step,t_lo,t_hi,s_lo,s_hi,grad_norm,threshold");
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status = completed"));
    assert!(manifest.contains("# resolved configuration"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "small.toml", SMALL_LOG);
    for out in ["a", "b"] {
        let o = lenssplit(&["simulate", "--config", &cfg, "--out", out, "--workers", "2"], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 5);
    for name in names {
        let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn converge_fits_an_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "small.toml", SMALL_LOG);
    let o = lenssplit(&["converge", "--config", &cfg, "--out", "conv"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit = fs::read_to_string(tmp.path().join("conv/convergence_fit.csv")).unwrap();
    let row: Vec<&str> = fit.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "Strang");
    assert_eq!(row[5], "ok");
    let order: f64 = row[3].parse().unwrap();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
}

#[test]
fn converge_refuses_two_points() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "two.toml", &SMALL_LOG.replace("steps = [50, 100, 200]", "steps = [50, 100]"));
    let o = lenssplit(&["converge", "--config", &cfg, "--out", "conv"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("no order fit"));
    let fit = fs::read_to_string(tmp.path().join("conv/convergence_fit.csv")).unwrap();
    let row = fit.lines().nth(1).unwrap();
    assert!(row.contains("at least 3"), "{row}");
}

#[test]
fn linear_problem_converges_at_round_off() {
    // lambda = 0: the sub-flows commute and splitting is exact
    let tmp = TempDir::new().unwrap();
    let text =
        SMALL_LOG.replace("lambda = -3.0", "lambda = 0.0").replace("reference = \"gaussian\"", "reference = \"self\"");
    let cfg = write_config(&tmp, "linear.toml", &text);
    let o = lenssplit(&["converge", "--config", &cfg, "--out", "conv"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = fs::read_to_string(tmp.path().join("conv/convergence.csv")).unwrap();
    for line in rows.lines().skip(1) {
        let error: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(error < 1e-12, "{line}");
    }
}

#[test]
fn unknown_key_is_a_config_error_with_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "bad.toml", &SMALL_LOG.replace("omega = 2.0", "omega = 2.0\nomegga = 1.0"));
    let o = lenssplit(&["simulate", "--config", &cfg, "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("omegga") && err.contains("line"), "{err}");
}

#[test]
fn unknown_preset_and_bad_usage_exit_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(lenssplit(&["simulate", "--preset", "nope"], tmp.path()).status.code(), Some(1));
    assert_eq!(lenssplit(&["simulate"], tmp.path()).status.code(), Some(1));
    assert_eq!(lenssplit(&["frobnicate"], tmp.path()).status.code(), Some(1));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let o = lenssplit(&["simulate", "--config", "absent.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("file"), "").unwrap();
    let o = lenssplit(&["classify", "--preset", "example2-portrait", "--out", "file/sub"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn blow_up_exits_two_with_event_row() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
[meta]
name = "focusing"
reproduces = "smoke test"

[equation]
nonlinearity = "power"
lambda = -1.0
omega = 2.0
sigma = 3.0

[initial]
profile = "gaussian"
amplitude = 2.0
alpha = 2.0

[grid]
a = -10.0
b = 10.0
points = 2048

[time]
final_time = 0.1
steps = 500

[scheme]
blowup_monitor = true
blowup_factor = 10.0

[output]
observables = ["h1"]
"#;
    let cfg = write_config(&tmp, "focus.toml", text);
    let o = lenssplit(&["simulate", "--config", &cfg, "--out", "b"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}\n{}", stdout(&o), stderr(&o));
    let events = fs::read_to_string(tmp.path().join("b/events.csv")).unwrap();
    let row: Vec<&str> = events.lines().nth(1).expect("event row").split(',').collect();
    assert_eq!(row[0], "blowup");
    let t_lo: f64 = row[2].parse().unwrap();
    assert!(t_lo > 0.0 && t_lo < 0.1);
    let manifest = fs::read_to_string(tmp.path().join("b/manifest.txt")).unwrap();
    assert!(manifest.contains("status = blowup"));
    let check = lenssplit(&["blowup-check", "--config", &cfg, "--out", "v"], tmp.path());
    assert_eq!(check.status.code(), Some(0));
    let virial = fs::read_to_string(tmp.path().join("v/virial.csv")).unwrap();
    assert!(virial.lines().nth(1).unwrap().ends_with("true"));
}
