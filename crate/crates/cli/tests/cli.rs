use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use biharm::catalog::{KernelSpec, Profile};
use biharm::GridSpec;
use serde_json::Value;
use tempfile::TempDir;

fn biharm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biharm"))
}

struct Scenario {
    horizon: f64,
    steps: usize,
    nonlinearity: String,
    initial: &'static str,
    b: f64,
    max_iter: usize,
    extra: &'static str,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            steps: 64,
            nonlinearity: gl_linear(0.1),
            initial: "gaussian(sigma=1.0,amp=1.0)",
            b: 0.0,
            max_iter: 25,
            extra: "",
        }
    }
}

/// Linear reaction with `g·l = gl` against the unit Gaussian kernel.
fn gl_linear(gl: f64) -> String {
    let grid = GridSpec::new(40.0, 256).unwrap();
    let g = KernelSpec::new(Profile::Gaussian { sigma: 1.0, amp: 1.0 }, &grid)
        .unwrap()
        .g_constant();
    format!("linear(kappa={:?})", gl / g)
}

impl Scenario {
    fn write(&self, dir: &Path) -> std::path::PathBuf {
        let text = format!(
            r#"seed = 5
{extra}
[grid]
L = 40.0
N = 256

[time]
T = {t:?}
M = {m}

[params]
a = 0.0
b = {b:?}

[model]
kernel = "gaussian(sigma=1.0,amp=1.0)"
nonlinearity = "{f}"
initial = "{u0}"

[solver]
tol = 1e-10
max_iter = {iters}
"#,
            extra = self.extra,
            t = self.horizon,
            m = self.steps,
            b = self.b,
            f = self.nonlinearity,
            u0 = self.initial,
            iters = self.max_iter,
        );
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        path
    }
}

fn run(cmd: &mut Command) -> (i32, Output) {
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), out)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_small_coupling_on_unit_horizon() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario::default().write(dir.path());
    let out_dir = dir.path().join("cert");
    let (code, out) = run(biharm().args(["certify", "--config"]).arg(&cfg).arg("--out").arg(&out_dir));
    assert_eq!(code, 0, "{}", stderr(&out));
    let cert = json(&out_dir.join("certificate.json"));
    assert!((cert["q"].as_f64().unwrap() - 0.2236068).abs() < 1e-6);
    assert_eq!(cert["certified"], Value::Bool(true));
    let keys: Vec<&str> = cert.as_object().unwrap().keys().map(String::as_str).collect();
    for key in ["g", "l", "a", "b", "T", "q", "certified", "T_max", "support_measure", "eps"] {
        assert!(keys.contains(&key), "{key} missing from {keys:?}");
    }
    assert_eq!(keys.len(), 10);
}

#[test]
fn certify_past_the_horizon_reports_t_max() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        horizon: 10.0,
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, out) = run(biharm().args(["certify", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code, 2);
    let msg = stderr(&out);
    assert!(msg.contains("T_max = 5.7154"), "{msg}");
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["certified"], Value::Bool(false));
    assert!((cert["T_max"].as_f64().unwrap() - (98.0f64 / 3.0).sqrt()).abs() < 1e-8);
}

#[test]
fn zero_lipschitz_constant_certifies_any_horizon() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        horizon: 1e4,
        nonlinearity: "forcing+h:gaussian(sigma=2.0,amp=0.1)".into(),
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, _) = run(biharm().args(["certify", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code, 0);
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["q"].as_f64(), Some(0.0));
    assert_eq!(cert["T_max"], Value::Null);
}

#[test]
fn forcing_only_solve_stops_after_two_iterations() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        nonlinearity: "forcing+h:gaussian(sigma=2.0,amp=0.1)".into(),
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, out) = run(biharm()
        .args(["solve", "--oracle", "forcing", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 0, "{}", stderr(&out));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["iterations"], 2);
    assert!(summary["residual_history"][1].as_f64().unwrap() <= 1e-14);
    assert_eq!(summary["oracles"][0]["passed"], Value::Bool(true));
    for key in ["iterations", "residual_history", "measured_ratio_max", "certified_q", "final_w142_norm", "wall_time_s"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
}

#[test]
fn linear_solve_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario::default().write(dir.path());
    let (code, out) = run(biharm()
        .args(["solve", "--oracle", "linear", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 0, "{}", stderr(&out));
    let oracle = &json(&dir.path().join("summary.json"))["oracles"][0];
    assert!(oracle["max_rel_error"].as_f64().unwrap() <= 1e-6, "{oracle}");
}

#[test]
fn field_csv_layout() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        steps: 8,
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, _) = run(biharm().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,t,u"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9 * 256);
    // Row-major over t, then x.
    assert_eq!(rows[0][0], -40.0);
    assert_eq!(rows[0][1], 0.0);
    assert_eq!(rows[255][1], 0.0);
    assert_eq!(rows[256][1], 0.125);
    assert_eq!(rows[256][0], -40.0);
    let sample = text.lines().nth(1).unwrap();
    let mantissa = sample.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
}

#[test]
fn uncertified_solve_is_refused_before_iterating() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        nonlinearity: gl_linear(0.8),
        ..Scenario::default()
    }
    .write(dir.path());
    let out_dir = dir.path().join("out");
    let (code, out) = run(biharm().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(&out_dir));
    assert_eq!(code, 2);
    assert!(stderr(&out).contains("override_uncertified"));
    assert!(!out_dir.join("field.csv").exists());
    assert!(!out_dir.join("summary.json").exists());
}

#[test]
fn exhausted_iteration_budget_exits_three_with_history() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        nonlinearity: "tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)".into(),
        b: 0.5,
        max_iter: 2,
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, _) = run(biharm().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code, 3);
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["converged"], Value::Bool(false));
    assert_eq!(summary["residual_history"].as_array().unwrap().len(), 2);
}

#[test]
fn config_and_usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.toml");
    let (code, _) = run(biharm().args(["certify", "--config"]).arg(&missing));
    assert_eq!(code, 1);

    let cfg = Scenario {
        extra: "colour = \"blue\"",
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, out) = run(biharm().args(["certify", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code, 1);
    assert!(stderr(&out).contains("colour"));

    let (code, _) = run(biharm().args(["validate", "--suite", "everything"]));
    assert_eq!(code, 1);
    let (code, _) = run(biharm().arg("solve"));
    assert_eq!(code, 1);
}

#[test]
fn validate_reports_json_and_exit_status() {
    for suite in ["fourier", "bounds", "contraction"] {
        let (code, out) = run(biharm().args(["validate", "--seed", "2", "--suite", suite]));
        assert_eq!(code, 0, "{suite}: {}", stderr(&out));
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["suite"], suite);
        assert_eq!(report["passed"], Value::Bool(true));
        assert!(!report["checks"].as_array().unwrap().is_empty());
    }
    let (_, out) = run(biharm().args(["validate", "--suite", "bounds"]));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let dipole = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"].as_str().unwrap().starts_with("bounds.dipole"))
        .unwrap();
    // Reported value is minus the slack: strictly inside the bound.
    assert!(dipole["value"].as_f64().unwrap() < -1e-3);
}

#[test]
fn repeated_solves_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        nonlinearity: "tanh(s=0.05)+h:gaussian(sigma=2.0,amp=0.1)".into(),
        b: 0.5,
        ..Scenario::default()
    }
    .write(dir.path());
    let mut summaries = Vec::new();
    let mut fields = Vec::new();
    for name in ["first", "second"] {
        let out_dir = dir.path().join(name);
        let (code, _) = run(biharm().args(["solve", "--config"]).arg(&cfg).arg("--out").arg(&out_dir));
        assert_eq!(code, 0);
        fields.push(fs::read(out_dir.join("field.csv")).unwrap());
        let mut summary = json(&out_dir.join("summary.json"));
        summary.as_object_mut().unwrap().remove("wall_time_s");
        summaries.push(summary);
    }
    assert!(fields[0] == fields[1]);
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn windowed_solve_reports_each_seam() {
    let dir = TempDir::new().unwrap();
    let mut cfg_text = fs::read_to_string(Scenario::default().write(dir.path())).unwrap();
    cfg_text = cfg_text.replace("T = 1.0\nM = 64", "T = 2.0\nM = 32\nwindows = 2");
    let cfg = dir.path().join("windows.toml");
    fs::write(&cfg, cfg_text).unwrap();
    let (code, out) = run(biharm().args(["solve", "--oracle", "linear", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert_eq!(code, 0, "{}", stderr(&out));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["windows"], 2);
    assert_eq!(summary["seam_jumps"][0].as_f64(), Some(0.0));
    let rows = fs::read_to_string(dir.path().join("field.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 65 * 256);
}

#[test]
fn failed_oracle_comparison_exits_four() {
    // Two steps on [0, 1] leave an O(dt²) quadrature error far above 1e-6.
    let dir = TempDir::new().unwrap();
    let cfg = Scenario {
        steps: 2,
        nonlinearity: gl_linear(0.3),
        ..Scenario::default()
    }
    .write(dir.path());
    let (code, out) = run(biharm()
        .args(["solve", "--oracle", "linear", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code, 4, "{}", stderr(&out));
    let oracle = &json(&dir.path().join("summary.json"))["oracles"][0];
    assert_eq!(oracle["passed"], Value::Bool(false));
}
