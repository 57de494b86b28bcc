//! Run persistence: subcommand dispatch, CSV diagnostics and the
//! machine-readable JSON summary.
//!
//! Exit-code contract: 0 when every applicable verdict passes, 2 when any
//! verdict fails, 3 for configuration errors (including rejected models),
//! 4 for numerical aborts.  Not-applicable verdicts never fail a run.
//! Identical config + seed produces byte-identical artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::functionals::{run_with_records, run_verdicts, FunctionalRecord, PairRecord};
use crate::model::{A2Report, ModelConstants, A2_REJECT_REL};
use crate::oracles::{refinement_study, RefinementProblem, RefinementRow};
use crate::stability::{
    cauchy_experiment, pair_run, CauchyExperiment, DistanceRow, PairExperiment, TestFunction,
    WeakResidual,
};
use crate::verdict::{count, Counts, Status, Verdict};

/// Sample counts pinned for constant derivation and identity sampling.
pub const CONSTANT_SAMPLES: usize = 1_000_000;
pub const A2_SAMPLES: usize = 10_000;

pub const SUMMARY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Versions {
    pub crate_version: &'static str,
    pub format: u32,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub verdicts: Vec<Verdict>,
    pub counts: Counts,
    pub tolerances: BTreeMap<String, f64>,
    pub constants: Option<ModelConstants>,
    pub a2: A2Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_residual: Option<WeakResidual>,
    pub config_echo: RunConfig,
    pub versions: Versions,
}

#[derive(Debug)]
pub struct DispatchOutcome {
    pub summary: Summary,
    pub exit_code: i32,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not_applicable",
        };
        write!(f, "{s}")
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn functional_csv(records: &[FunctionalRecord]) -> String {
    let mut s = String::from(
        "t,L0,Q0,D0,int_D0,bony_budget,bony_residual,gammaR,gammaL,q_bound,linf_sq,linf_envelope,h1_semi\n",
    );
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.l0,
            r.q0,
            r.d0,
            r.int_d0,
            r.bony_budget,
            r.bony_residual,
            r.gamma_r,
            r.gamma_l,
            r.q_bound,
            r.linf_sq,
            r.linf_envelope,
            r.h1_semi
        );
    }
    s
}

pub fn pair_csv(records: &[PairRecord]) -> String {
    let mut s = String::from("t,L1,Q1,D1,int_D1,lyapunov,h3,h3_closed,h4,bound_residual\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t, r.l1, r.q1, r.d1, r.int_d1, r.lyapunov, r.h3, r.h3_closed, r.h4, r.bound_residual
        );
    }
    s
}

pub fn distance_csv(rows: &[DistanceRow]) -> String {
    let mut s = String::from("k,j,t_sup,d_initial,d_sup,bound,verdict\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.k, r.j, r.t_sup, r.d_initial, r.d_sup, r.bound, r.status
        );
    }
    s
}

pub fn refinement_csv(rows: &[RefinementRow]) -> String {
    let mut s = String::from("level,n_cells,l2_error,observed_order\n");
    for r in rows {
        let err = r.l2_error.map(|v| v.to_string()).unwrap_or_default();
        let ord = r.observed_order.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", r.level, r.n_cells, err, ord);
    }
    s
}

pub fn snapshot_csv(field: &SpinorField) -> String {
    let mut s = String::from("x,re_u,im_u,re_v,im_v\n");
    for j in 0..field.n_cells() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            field.grid.x(j),
            field.u[j].re,
            field.u[j].im,
            field.v[j].re,
            field.v[j].im
        );
    }
    s
}

/// Acceptance window for observed refinement orders.
pub const ORDER_WINDOW: (f64, f64) = (1.9, 2.1);

fn refinement_verdicts(rows: &[RefinementRow]) -> Vec<Verdict> {
    let mut verdicts = Vec::new();
    let orders: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|r| r.observed_order.map(|o| (r.level, o)))
        .collect();
    if orders.is_empty() {
        verdicts.push(Verdict::not_applicable(
            "refinement_order",
            "no error pairs to measure an order from".into(),
        ));
        return verdicts;
    }
    let (mid_lo, mid_hi) = ORDER_WINDOW;
    let center = 0.5 * (mid_lo + mid_hi);
    let (level, worst) = orders
        .iter()
        .copied()
        .max_by(|a, b| (a.1 - center).abs().total_cmp(&(b.1 - center).abs()))
        .unwrap();
    verdicts.push(Verdict::upper(
        "refinement_order",
        (worst - center).abs(),
        0.0,
        0.5 * (mid_hi - mid_lo),
        format!("worst observed order {worst} at level {level}, window [{mid_lo}, {mid_hi}]"),
    ));
    verdicts
}

/// Run the experiment a config describes and write its artifacts.
///
/// `expected` is the CLI subcommand; when present it must agree with the
/// config's experiment kind.
pub fn dispatch(
    cfg: &RunConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
    expected: Option<ExperimentKind>,
) -> Result<DispatchOutcome> {
    if let Some(exp) = expected {
        if exp != cfg.experiment.kind {
            return Err(Error::Config {
                key: "experiment.kind".into(),
                reason: format!(
                    "subcommand `{exp}` does not match the config's experiment kind `{}`",
                    cfg.experiment.kind
                ),
            });
        }
    }
    let mut cfg = cfg.clone();
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(out_dir)?;

    let params = cfg.model_params()?;
    let a2 = params.a2_max_residual(A2_SAMPLES, cfg.seed);
    let mut verdicts: Vec<Verdict> = Vec::new();
    verdicts.push(Verdict::upper(
        "a2_identity",
        a2.max_rel,
        0.0,
        A2_REJECT_REL,
        format!("max relative null-structure residual over {} points, seed {}", a2.n_points, a2.seed),
    ));

    let constants = match params.derive_constants(CONSTANT_SAMPLES, cfg.seed) {
        Ok(c) => Some(c),
        Err(e @ Error::ModelRejected { .. }) => {
            if cfg.experiment.kind == ExperimentKind::Validate {
                None
            } else {
                return Err(e);
            }
        }
        Err(e) => return Err(e),
    };
    if let Some(c) = &constants {
        verdicts.push(Verdict::upper(
            "delta_selection",
            -2.0 + 2.0 * c.delta * c.c,
            -1.0,
            0.0,
            format!("-2 + 2 delta c with delta = {}, c = {}", c.delta, c.c),
        ));
    }

    let mut weak_residual = None;

    match cfg.experiment.kind {
        ExperimentKind::Validate => {}
        ExperimentKind::Run => {
            let constants = constants.as_ref().unwrap();
            let grid = cfg.grid()?;
            let scheme = cfg.scheme_config()?;
            let init = SpinorField::build_initial(grid, &cfg.profiles, scheme.t_final)?;
            let (traj, records) = run_with_records(&init, &params, &scheme, constants)?;
            verdicts.extend(run_verdicts(&records, &params, constants, cfg.integrator()));
            write_text(&out_dir.join("functionals.csv"), &functional_csv(&records))?;
            if cfg.output.write_snapshots {
                for (snap, step) in traj.snapshots.iter().zip(&traj.steps) {
                    let name = format!("snapshot_{step:06}.csv");
                    write_text(&out_dir.join(name), &snapshot_csv(snap))?;
                }
            }
        }
        ExperimentKind::Pair => {
            let constants = constants.as_ref().unwrap();
            let exp = PairExperiment {
                params,
                grid: cfg.grid()?,
                scheme: cfg.scheme_config()?,
                base_profiles: cfg.profiles.clone(),
                perturbation: cfg.experiment.perturbation.expect("validated"),
            };
            let out = pair_run(&exp, constants)?;
            verdicts.extend(out.verdicts);
            write_text(&out_dir.join("pair.csv"), &pair_csv(&out.records))?;
            write_text(
                &out_dir.join("functionals_base.csv"),
                &functional_csv(&out.base_records),
            )?;
            write_text(
                &out_dir.join("functionals_perturbed.csv"),
                &functional_csv(&out.perturbed_records),
            )?;
        }
        ExperimentKind::Cauchy => {
            let constants = constants.as_ref().unwrap();
            let grid = cfg.grid()?;
            let scheme = cfg.scheme_config()?;
            let tf: Option<TestFunction> = cfg.experiment.test_function;
            let exp = CauchyExperiment {
                params,
                grid,
                scheme,
                base_profiles: cfg.profiles.clone(),
                perturbation: cfg.experiment.perturbation.expect("validated"),
                members: cfg.experiment.members,
                ratio: cfg.experiment.ratio,
                streaming: cfg.stability.streaming,
                test_function: tf,
            };
            let out = cauchy_experiment(&exp, constants)?;
            verdicts.extend(out.verdicts);
            weak_residual = out.weak;
            write_text(&out_dir.join("distances.csv"), &distance_csv(&out.rows))?;
        }
        ExperimentKind::Oracle => {
            let problem = RefinementProblem {
                params,
                base_grid: cfg.grid()?,
                scheme: cfg.scheme_config()?,
                profiles: cfg.profiles.clone(),
            };
            let rows = refinement_study(&problem, cfg.experiment.levels)?;
            verdicts.extend(refinement_verdicts(&rows));
            write_text(&out_dir.join("refinement.csv"), &refinement_csv(&rows))?;
        }
    }

    let counts = count(&verdicts);
    let tolerances: BTreeMap<String, f64> = verdicts
        .iter()
        .filter(|v| v.status != Status::NotApplicable)
        .map(|v| (v.name.clone(), v.tolerance))
        .collect();
    let summary = Summary {
        experiment: cfg.experiment.kind,
        verdicts,
        counts,
        tolerances,
        constants,
        a2,
        weak_residual,
        config_echo: cfg.clone(),
        versions: Versions {
            crate_version: env!("CARGO_PKG_VERSION"),
            format: SUMMARY_FORMAT_VERSION,
        },
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_text(&out_dir.join("summary.json"), &json)?;
    let exit_code = if counts.failures > 0 { 2 } else { 0 };
    Ok(DispatchOutcome { summary, exit_code })
}
