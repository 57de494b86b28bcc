//! Dispatch-level integration tests: artifact formats, determinism and
//! the exit-code contract, exercised through the same entry points the
//! CLI uses.

use std::path::Path;

use dirac1d::config::{ExperimentKind, RunConfig};
use dirac1d::report::dispatch;
use dirac1d::verdict::Status;

const RUN_CONFIG: &str = r#"
seed = 7

[model]
preset = "gross_neveu"
alpha = 1.0
mass = 1.0

[scheme]
n_cells = 256
x_min = -16.0
x_max = 16.0
t_final = 2.0
diagnostics_stride = 4

[[profiles]]
kind = "gaussian"
component = "u"
amplitude = 0.02
center = -2.0
width = 0.8

[[profiles]]
kind = "gaussian"
component = "v"
amplitude = 0.02
center = 2.0
width = 0.8

[experiment]
kind = "run"

[output]
directory = "out"
write_snapshots = true
"#;

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn run_writes_contracted_artifacts() {
    let cfg = RunConfig::parse(RUN_CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, Some(ExperimentKind::Run)).unwrap();
    assert_eq!(out.exit_code, 0);

    let csv = read(dir.path(), "functionals.csv");
    assert!(csv.starts_with(
        "t,L0,Q0,D0,int_D0,bony_budget,bony_residual,gammaR,gammaL,q_bound,linf_sq,linf_envelope,h1_semi\n"
    ));
    // 2.0 / (32/256) = 16 steps at stride 4 -> records at steps 0,4,8,12,16.
    assert_eq!(csv.lines().count(), 1 + 5);

    let snap = read(dir.path(), "snapshot_000000.csv");
    assert!(snap.starts_with("x,re_u,im_u,re_v,im_v\n"));
    assert_eq!(snap.lines().count(), 1 + 256);
    assert!(dir.path().join("snapshot_000016.csv").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary["experiment"], "run");
    let c = summary["constants"]["c"].as_f64().unwrap();
    assert!((c - 8.0).abs() < 1e-12);
    assert!(summary["constants"]["delta"].as_f64().unwrap() > 0.0);
    assert!(summary["verdicts"].as_array().unwrap().len() >= 5);
    for v in summary["verdicts"].as_array().unwrap() {
        if v["status"] == "pass" || v["status"] == "fail" {
            assert!(v["tolerance"].is_number(), "verdict without tolerance: {v}");
        }
    }
    assert_eq!(summary["config_echo"]["seed"].as_u64().unwrap(), 7);
    assert_eq!(summary["versions"]["format"].as_u64().unwrap(), 1);
}

#[test]
fn dispatch_is_byte_deterministic() {
    let cfg = RunConfig::parse(RUN_CONFIG).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    dispatch(&cfg, d1.path(), Some(99), Some(ExperimentKind::Run)).unwrap();
    dispatch(&cfg, d2.path(), Some(99), Some(ExperimentKind::Run)).unwrap();
    for name in ["functionals.csv", "summary.json", "snapshot_000008.csv"] {
        assert_eq!(read(d1.path(), name), read(d2.path(), name), "{name} differs");
    }
}

#[test]
fn zero_data_run_is_all_zero_and_passes() {
    let text = RUN_CONFIG.replace("amplitude = 0.02", "amplitude = 0.0");
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, None).unwrap();
    assert_eq!(out.exit_code, 0);
    let csv = read(dir.path(), "functionals.csv");
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        // Everything except t and the q-bound/envelope columns is zero.
        for idx in [1usize, 2, 3, 4, 7, 8, 10, 12] {
            assert_eq!(fields[idx].parse::<f64>().unwrap(), 0.0, "line {line}");
        }
    }
}

#[test]
fn large_data_run_reports_not_applicable_and_exits_zero() {
    let text = RUN_CONFIG.replace("amplitude = 0.02", "amplitude = 1.0");
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, None).unwrap();
    assert_eq!(out.exit_code, 0, "not-applicable must never fail a run");
    let na: Vec<_> = out
        .summary
        .verdicts
        .iter()
        .filter(|v| v.status == Status::NotApplicable)
        .map(|v| v.name.as_str().to_owned())
        .collect();
    assert!(na.contains(&"bony_budget".to_string()));
    assert!(na.contains(&"linf_envelope".to_string()));
}

#[test]
fn subcommand_config_mismatch_is_a_config_error() {
    let cfg = RunConfig::parse(RUN_CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = dispatch(&cfg, dir.path(), None, Some(ExperimentKind::Pair)).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn validate_reports_constants() {
    let text = RUN_CONFIG.replace("kind = \"run\"", "kind = \"validate\"");
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, Some(ExperimentKind::Validate)).unwrap();
    assert_eq!(out.exit_code, 0);
    let constants = out.summary.constants.unwrap();
    assert_eq!(constants.c, 8.0);
    assert!((constants.delta - 1.0 / (4.0 * constants.c_star)).abs() < 1e-15);
    assert!(!dir.path().join("functionals.csv").exists());
}

#[test]
fn validate_rejecting_model_exits_two() {
    let text = r#"
[model]
preset = "custom"
mass = 0.0

[model.custom]
alpha1 = [0.0, 1.0]
alpha2 = [0.0, 0.0]
alpha3 = [1.0, 0.0]
alpha4 = [0.0, 0.0]
alpha5 = [0.0, 0.0]
beta1 = [0.0, 0.0]
beta2 = [0.0, 0.0]
beta3 = [0.0, 0.0]
beta4 = [0.0, 0.0]
beta5 = [0.0, 0.0]

[scheme]
n_cells = 64
x_min = -8.0
x_max = 8.0
t_final = 1.0

[experiment]
kind = "validate"
"#;
    let cfg = RunConfig::parse(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, None).unwrap();
    assert_eq!(out.exit_code, 2, "null-structure violation must fail validate");
    assert!(out.summary.constants.is_none());
    // The same model under `run` is a configuration-class rejection.
    let run_text = text.replace("kind = \"validate\"", "kind = \"run\"");
    let cfg = RunConfig::parse(&run_text).unwrap();
    let err = dispatch(&cfg, dir.path(), None, None).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn clean_custom_model_validates_and_runs() {
    // Product-form coefficients realizing a u|v|^2 / v|u|^2 pair: passes
    // the null-structure gate, derives sampled constants, evolves via rk4.
    let text = r#"
[model]
preset = "custom"
mass = 1.0

[model.custom]
alpha1 = [1.0, 0.0]
alpha2 = [0.0, 0.0]
alpha3 = [1.0, 0.0]
alpha4 = [0.0, 0.0]
alpha5 = [0.0, 0.0]
beta1 = [1.0, 0.0]
beta2 = [0.0, 0.0]
beta3 = [1.0, 0.0]
beta4 = [0.0, 0.0]
beta5 = [0.0, 0.0]

[scheme]
n_cells = 512
x_min = -16.0
x_max = 16.0
t_final = 2.0
diagnostics_stride = 8

[[profiles]]
kind = "gaussian"
component = "u"
amplitude = 0.02
center = -2.0
width = 0.8

[experiment]
kind = "validate"
"#;
    let cfg = RunConfig::parse(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, None).unwrap();
    assert_eq!(out.exit_code, 0);
    let constants = out.summary.constants.unwrap();
    // Sampled cubic bound of this model approaches the closed-form 2.
    assert!(constants.c > 1.9 && constants.c <= 2.0 + 1e-9, "sampled c = {}", constants.c);
    assert!(constants.c_star >= 2.0 * constants.c);

    let run_text = text.replace("kind = \"validate\"", "kind = \"run\"");
    let cfg = RunConfig::parse(&run_text).unwrap();
    let out = dispatch(&cfg, dir.path(), None, None).unwrap();
    assert_eq!(out.exit_code, 0);
    let cons = out
        .summary
        .verdicts
        .iter()
        .find(|v| v.name == "charge_conservation")
        .unwrap();
    assert_eq!(cons.status, Status::Pass);
}

#[test]
fn pair_experiment_artifacts() {
    let text = format!(
        "{}\n[experiment.perturbation]\nkind = \"smooth_bump\"\ncomponent = \"u\"\namplitude = 1e-3\ncenter = -2.0\nwidth = 1.5\n",
        RUN_CONFIG.replace("kind = \"run\"", "kind = \"pair\"")
    );
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, Some(ExperimentKind::Pair)).unwrap();
    let csv = read(dir.path(), "pair.csv");
    assert!(csv.starts_with("t,L1,Q1,D1,int_D1,lyapunov,h3,h3_closed,h4,bound_residual\n"));
    assert!(dir.path().join("functionals_base.csv").exists());
    assert!(dir.path().join("functionals_perturbed.csv").exists());
    // The stability bound itself must pass on this instance.
    let prop = out
        .summary
        .verdicts
        .iter()
        .find(|v| v.name == "prop_l2_stability")
        .unwrap();
    assert_eq!(prop.status, Status::Pass);
}

#[test]
fn cauchy_experiment_artifacts() {
    let text = format!(
        "{}\n[experiment.perturbation]\nkind = \"smooth_bump\"\ncomponent = \"u\"\namplitude = 1e-2\ncenter = -2.0\nwidth = 1.5\n",
        RUN_CONFIG
            .replace("kind = \"run\"", "kind = \"cauchy\"\nmembers = 3\nratio = 0.5")
            .replace("t_final = 2.0", "t_final = 1.0")
    );
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, Some(ExperimentKind::Cauchy)).unwrap();
    assert_eq!(out.exit_code, 0);
    let csv = read(dir.path(), "distances.csv");
    assert!(csv.starts_with("k,j,t_sup,d_initial,d_sup,bound,verdict\n"));
    // 3 members + limit -> C(4,2) = 6 ordered pairs.
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(csv.contains(",pass"));

    // Streaming and post-hoc assembly must agree byte for byte.
    let posthoc = text.replace("[output]", "[stability]\nstreaming = false\n\n[output]");
    let cfg2 = RunConfig::parse(&posthoc).unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    dispatch(&cfg2, dir2.path(), None, None).unwrap();
    assert_eq!(read(dir.path(), "distances.csv"), read(dir2.path(), "distances.csv"));
}

#[test]
fn oracle_experiment_artifacts() {
    let text = RUN_CONFIG
        .replace("kind = \"run\"", "kind = \"oracle\"\nlevels = 3")
        .replace("preset = \"gross_neveu\"", "preset = \"thirring\"")
        .replace("mass = 1.0", "mass = 0.0")
        .replace("amplitude = 0.02", "amplitude = 1.0");
    let cfg = RunConfig::parse(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dispatch(&cfg, dir.path(), None, Some(ExperimentKind::Oracle)).unwrap();
    assert_eq!(out.exit_code, 0);
    let csv = read(dir.path(), "refinement.csv");
    assert!(csv.starts_with("level,n_cells,l2_error,observed_order\n"));
    assert_eq!(csv.lines().count(), 1 + 3);
    // First level carries no order estimate.
    assert!(csv.lines().nth(1).unwrap().ends_with(','));
}
