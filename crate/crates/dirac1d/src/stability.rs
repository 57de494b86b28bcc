//! Two-solution stability runs, Cauchy-sequence convergence experiments,
//! and weak-form residuals of trajectories.
//!
//! A pair experiment evolves a base field and an epsilon-perturbed sibling
//! in lockstep and checks the L2 stability bound
//! `L1(t) <= h4(t) L1(0)` together with the discrete Lyapunov interval
//! inequality.  A Cauchy experiment evolves a whole family converging to a
//! designated limit member and checks that evolved distances stay below
//! sqrt(h4) times the initial ones, shrink monotonically toward the limit,
//! and (for a geometric family) shrink at the expected per-member factor.
//!
//! Distances are suprema over the sampled record times only; the stride is
//! part of the reported verdicts.  Members evolve independently, so the
//! distance matrix can be assembled either in lockstep ("streaming", no
//! snapshot retention except the limit member) or post hoc from stored
//! trajectories; the two paths produce identical output and are both kept.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{run_trajectory, step, SchemeConfig, Trajectory};
use crate::field::{Grid, ProfileSpec, SpinorField};
use crate::functionals::{
    pair_records, pair_verdicts, pointwise_functionals, run_with_records, FunctionalRecord,
    PairRecord, REL_TOL,
};
use crate::model::{ModelConstants, ModelParams};
use crate::verdict::{Status, Verdict};

/// A base run plus an epsilon perturbation of it.
#[derive(Debug, Clone)]
pub struct PairExperiment {
    pub params: ModelParams,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    pub base_profiles: Vec<ProfileSpec>,
    pub perturbation: ProfileSpec,
}

#[derive(Debug)]
pub struct PairRunOutput {
    pub records: Vec<PairRecord>,
    pub base_records: Vec<FunctionalRecord>,
    pub perturbed_records: Vec<FunctionalRecord>,
    pub verdicts: Vec<Verdict>,
}

/// Evolve base and perturbed trajectories in lockstep and emit the pair
/// record stream plus verdicts.  Numerical aborts in either member abort
/// the experiment.
pub fn pair_run(exp: &PairExperiment, constants: &ModelConstants) -> Result<PairRunOutput> {
    let horizon = exp.scheme.t_final;
    let base = SpinorField::build_initial(exp.grid, &exp.base_profiles, horizon)?;
    let mut perturbed_profiles = exp.base_profiles.clone();
    perturbed_profiles.push(exp.perturbation);
    let perturbed = SpinorField::build_initial(exp.grid, &perturbed_profiles, horizon)?;

    let (traj_a, recs_a) = run_with_records(&base, &exp.params, &exp.scheme, constants)?;
    let (traj_b, recs_b) = run_with_records(&perturbed, &exp.params, &exp.scheme, constants)?;
    let records = pair_records(
        &traj_a.snapshots,
        &traj_b.snapshots,
        &recs_a,
        &recs_b,
        constants,
        exp.params.mass,
    )?;
    let verdicts = pair_verdicts(&records, &recs_a, &recs_b, constants, exp.params.mass);
    Ok(PairRunOutput { records, base_records: recs_a, perturbed_records: recs_b, verdicts })
}

/// A family of initial fields converging to a designated limit member.
/// Member k carries the perturbation scaled by ratio^k; the limit member
/// is the unperturbed base.
#[derive(Debug, Clone)]
pub struct CauchyExperiment {
    pub params: ModelParams,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    pub base_profiles: Vec<ProfileSpec>,
    pub perturbation: ProfileSpec,
    pub members: usize,
    pub ratio: f64,
    pub streaming: bool,
    pub test_function: Option<TestFunction>,
}

/// One row of the distance matrix; `j == members` refers to the limit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistanceRow {
    pub k: usize,
    pub j: usize,
    pub t_sup: f64,
    pub d_initial: f64,
    pub d_sup: f64,
    pub bound: f64,
    pub status: Status,
}

#[derive(Debug)]
pub struct CauchyOutput {
    pub rows: Vec<DistanceRow>,
    pub verdicts: Vec<Verdict>,
    pub weak: Option<WeakResidual>,
}

struct MemberTrace {
    l00: f64,
    int_d0: f64,
    prev: Option<(f64, f64)>,
}

struct PairAccum {
    d_initial: f64,
    d_sup: f64,
    t_sup: f64,
}

fn l1_distance_sq(a: &SpinorField, b: &SpinorField) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.n_cells() {
        acc += (a.u[j] - b.u[j]).norm_sqr() + (a.v[j] - b.v[j]).norm_sqr();
    }
    acc * a.grid.dx
}

/// Evolve all members, assemble the sup-distance matrix and its bounds.
pub fn cauchy_experiment(
    exp: &CauchyExperiment,
    constants: &ModelConstants,
) -> Result<CauchyOutput> {
    if exp.members < 2 {
        return Err(Error::InvalidExperiment(format!(
            "cauchy experiment needs at least 2 members, got {}",
            exp.members
        )));
    }
    if !exp.ratio.is_finite() || exp.ratio <= 0.0 || exp.ratio >= 1.0 {
        return Err(Error::InvalidExperiment(format!(
            "cauchy ratio must lie in (0, 1), got {}",
            exp.ratio
        )));
    }
    let horizon = exp.scheme.t_final;
    let m = exp.members;
    // Members 0..m-1, limit member at index m.
    let mut inits: Vec<SpinorField> = Vec::with_capacity(m + 1);
    for k in 0..m {
        let mut profiles = exp.base_profiles.clone();
        let mut pert = exp.perturbation;
        pert.amplitude *= exp.ratio.powi(k as i32);
        profiles.push(pert);
        inits.push(SpinorField::build_initial(exp.grid, &profiles, horizon)?);
    }
    inits.push(SpinorField::build_initial(exp.grid, &exp.base_profiles, horizon)?);

    // Invariant: initial distances to the limit strictly decrease.
    for k in 0..m - 1 {
        let dk = l1_distance_sq(&inits[k], &inits[m]);
        let dk1 = l1_distance_sq(&inits[k + 1], &inits[m]);
        if dk1 >= dk {
            return Err(Error::InvalidExperiment(
                "initial distances to the limit member must strictly decrease".into(),
            ));
        }
    }

    let mut traces: Vec<MemberTrace> = inits
        .iter()
        .map(|f| {
            let (l0, _, _, _) = pointwise_functionals(f);
            MemberTrace { l00: l0, int_d0: 0.0, prev: None }
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..=m)
        .flat_map(|k| ((k + 1)..=m).map(move |j| (k, j)))
        .collect();
    let mut accums: Vec<PairAccum> = pairs
        .iter()
        .map(|_| PairAccum { d_initial: 0.0, d_sup: f64::MIN, t_sup: 0.0 })
        .collect();

    let mut observe = |fields: &[SpinorField], first: bool| {
        let t = fields[0].t;
        for (trace, f) in traces.iter_mut().zip(fields) {
            let (_, d0, _, _) = pointwise_functionals(f);
            if let Some((tp, dp)) = trace.prev {
                trace.int_d0 += 0.5 * (t - tp) * (d0 + dp);
            }
            trace.prev = Some((t, d0));
        }
        for ((k, j), acc) in pairs.iter().zip(accums.iter_mut()) {
            let d = l1_distance_sq(&fields[*k], &fields[*j]).sqrt();
            if first {
                acc.d_initial = d;
            }
            if d > acc.d_sup {
                acc.d_sup = d;
                acc.t_sup = t;
            }
        }
    };

    // Limit-member snapshots are retained in both modes for the weak-form
    // residual.
    let limit_traj = if exp.streaming {
        let n_steps = exp.scheme.validate(exp.grid.dx)?;
        let mut fields = inits.clone();
        observe(&fields, true);
        let mut limit_snaps = vec![fields[m].clone()];
        let mut limit_steps = vec![0usize];
        for s in 1..=n_steps {
            for f in fields.iter_mut() {
                step(f, &exp.params, &exp.scheme, s)?;
                if !f.is_finite() {
                    return Err(Error::NonFinite { step: s, t: f.t });
                }
            }
            if s % exp.scheme.diagnostics_stride == 0 || s == n_steps {
                observe(&fields, false);
                limit_snaps.push(fields[m].clone());
                limit_steps.push(s);
            }
        }
        Trajectory { snapshots: limit_snaps, steps: limit_steps, dt: exp.grid.dx }
    } else {
        let trajs: Vec<Trajectory> = inits
            .iter()
            .map(|f| run_trajectory(f, &exp.params, &exp.scheme))
            .collect::<Result<_>>()?;
        let n_records = trajs[0].snapshots.len();
        for (i, first) in (0..n_records).map(|i| (i, i == 0)) {
            let fields: Vec<SpinorField> =
                trajs.iter().map(|t| t.snapshots[i].clone()).collect();
            observe(&fields, first);
        }
        trajs.into_iter().next_back().unwrap()
    };

    let t_end = exp.scheme.t_final;
    let small = traces.iter().all(|t| t.l00 <= constants.delta);

    let mut rows = Vec::with_capacity(pairs.len());
    for ((k, j), acc) in pairs.iter().zip(&accums) {
        let h3 = 2.0 * exp.params.mass * (traces[*k].l00 + traces[*j].l00) * t_end
            + constants.c * (traces[*k].int_d0 + traces[*j].int_d0);
        let h4 = (1.0 + constants.k * (traces[*k].l00 + traces[*j].l00)) * h3.exp();
        let bound = h4.sqrt() * acc.d_initial;
        let status = if !small {
            Status::NotApplicable
        } else if acc.d_sup <= bound + REL_TOL * bound + 1e-30 {
            Status::Pass
        } else {
            Status::Fail
        };
        rows.push(DistanceRow {
            k: *k,
            j: *j,
            t_sup: acc.t_sup,
            d_initial: acc.d_initial,
            d_sup: acc.d_sup,
            bound,
            status,
        });
    }

    let mut verdicts = Vec::new();
    if small {
        let worst = rows
            .iter()
            .max_by(|a, b| (a.d_sup - a.bound).total_cmp(&(b.d_sup - b.bound)))
            .unwrap();
        verdicts.push(Verdict::upper(
            "pairwise_l2_bound",
            worst.d_sup,
            worst.bound,
            REL_TOL * worst.bound + 1e-30,
            format!("worst pair (k = {}, j = {}) at t_sup = {}", worst.k, worst.j, worst.t_sup),
        ));
    } else {
        verdicts.push(Verdict::not_applicable(
            "pairwise_l2_bound",
            format!("some member charge exceeds delta = {}", constants.delta),
        ));
    }

    // Distances from members to the limit must decrease monotonically and,
    // for a geometric family, by about 1/ratio per member.
    let limit_d: Vec<f64> = rows
        .iter()
        .filter(|r| r.j == m)
        .map(|r| r.d_sup)
        .collect();
    let mut worst_inc = f64::MIN;
    for w in limit_d.windows(2) {
        worst_inc = worst_inc.max(w[1] - w[0]);
    }
    verdicts.push(Verdict::upper(
        "limit_distance_monotone",
        worst_inc,
        0.0,
        1e-12 * limit_d[0].max(1e-300),
        "max increase of d(k, limit) in k".into(),
    ));
    let expected = 1.0 / exp.ratio;
    let mut worst_ratio = expected;
    for w in limit_d.windows(2) {
        if w[1] > 0.0 {
            let r = w[0] / w[1];
            if (r - expected).abs() > (worst_ratio - expected).abs() {
                worst_ratio = r;
            }
        }
    }
    verdicts.push(Verdict::upper(
        "limit_distance_ratio",
        (worst_ratio - expected).abs(),
        0.0,
        0.1 * expected,
        format!("worst per-member shrink factor {worst_ratio} vs expected {expected}"),
    ));

    let weak = match &exp.test_function {
        Some(tf) => Some(weak_residual(&limit_traj, &exp.params, tf)?),
        None => None,
    };

    Ok(CauchyOutput { rows, verdicts, weak })
}

/// Tensor-product smooth bump test function, compactly supported strictly
/// inside the space-time domain; derivatives are analytic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub x_center: f64,
    pub x_width: f64,
    pub t_center: f64,
    pub t_width: f64,
}

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn bump_prime(s: f64) -> f64 {
    if s.abs() < 1.0 {
        let d = 1.0 - s * s;
        bump(s) * (-2.0 * s) / (d * d)
    } else {
        0.0
    }
}

impl TestFunction {
    pub fn validate(&self, grid: &Grid, t_end: f64) -> Result<()> {
        let ok = self.x_width > 0.0
            && self.t_width > 0.0
            && self.x_center - self.x_width > grid.x_min
            && self.x_center + self.x_width < grid.x_max
            && self.t_center - self.t_width > 0.0
            && self.t_center + self.t_width < t_end;
        if ok {
            Ok(())
        } else {
            Err(Error::TestSupportOutsideDomain)
        }
    }

    #[inline]
    fn phi(&self, t: f64, x: f64) -> f64 {
        bump((x - self.x_center) / self.x_width) * bump((t - self.t_center) / self.t_width)
    }

    #[inline]
    fn phi_x(&self, t: f64, x: f64) -> f64 {
        bump_prime((x - self.x_center) / self.x_width) / self.x_width
            * bump((t - self.t_center) / self.t_width)
    }

    #[inline]
    fn phi_t(&self, t: f64, x: f64) -> f64 {
        bump((x - self.x_center) / self.x_width)
            * bump_prime((t - self.t_center) / self.t_width)
            / self.t_width
    }
}

/// Moduli of the weak-form defects of the two equations: transport
/// derivatives moved onto the test function, mass and nonlinear terms kept
/// on the solution.  O(dx^2) for trajectories of smooth genuine solutions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeakResidual {
    pub r1: f64,
    pub r2: f64,
}

impl WeakResidual {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2)
    }
}

pub fn weak_residual(
    traj: &Trajectory,
    params: &ModelParams,
    tf: &TestFunction,
) -> Result<WeakResidual> {
    let grid = traj.snapshots[0].grid;
    let t_end = traj.snapshots.last().unwrap().t;
    tf.validate(&grid, t_end)?;
    let m = params.mass;
    let mut w1 = Complex64::ZERO;
    let mut w2 = Complex64::ZERO;
    let last = traj.snapshots.len() - 1;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        // Trapezoid weight in time.
        let lo = if i == 0 { snap.t } else { traj.snapshots[i - 1].t };
        let hi = if i == last { snap.t } else { traj.snapshots[i + 1].t };
        let wt = 0.5 * (hi - lo);
        if wt == 0.0 {
            continue;
        }
        let t = snap.t;
        let mut s1 = Complex64::ZERO;
        let mut s2 = Complex64::ZERO;
        for j in 0..grid.n_cells {
            let x = grid.x(j);
            let phi = tf.phi(t, x);
            let pt = tf.phi_t(t, x);
            let px = tf.phi_x(t, x);
            if phi == 0.0 && pt == 0.0 && px == 0.0 {
                continue;
            }
            let u = snap.u[j];
            let v = snap.v[j];
            let (n1, n2) = params.eval_n(u, v);
            s1 += -Complex64::i() * u * (pt + px) + (v.scale(m) - n1) * phi;
            s2 += -Complex64::i() * v * (pt - px) + (u.scale(m) - n2) * phi;
        }
        w1 += s1.scale(grid.dx * wt);
        w2 += s2.scale(grid.dx * wt);
    }
    Ok(WeakResidual { r1: w1.norm(), r2: w2.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{NonlinearIntegrator, SubstepOrder};
    use crate::field::{Component, ProfileKind};
    use crate::model::Preset;
    use crate::oracles::thirring_m0_exact;

    fn gaussian(component: Component, amplitude: f64, center: f64, width: f64) -> ProfileSpec {
        ProfileSpec { kind: ProfileKind::Gaussian, component, center, width, amplitude, phase: 0.0 }
    }

    fn bump_profile(component: Component, amplitude: f64, center: f64, width: f64) -> ProfileSpec {
        ProfileSpec {
            kind: ProfileKind::SmoothBump,
            component,
            center,
            width,
            amplitude,
            phase: 0.0,
        }
    }

    fn scheme(t_final: f64, stride: usize) -> SchemeConfig {
        SchemeConfig {
            t_final,
            substep_order: SubstepOrder::Strang,
            nonlinear_integrator: NonlinearIntegrator::ExactPreset,
            diagnostics_stride: stride,
        }
    }

    fn small_pair(preset: Preset, eps: f64) -> PairExperiment {
        PairExperiment {
            params: ModelParams::preset(preset, 1.0, 1.0).unwrap(),
            grid: Grid::new(-12.0, 12.0, 512).unwrap(),
            scheme: scheme(3.0, 8),
            base_profiles: vec![
                gaussian(Component::U, 0.02, -2.0, 0.8),
                gaussian(Component::V, 0.015, 2.0, 1.1),
            ],
            perturbation: bump_profile(Component::U, eps, -2.0, 1.5),
        }
    }

    #[test]
    fn zero_perturbation_is_degenerate_pass() {
        let mut exp = small_pair(Preset::Thirring, 0.0);
        exp.perturbation.amplitude = 0.0;
        let constants = exp.params.derive_constants(20_000, 42).unwrap();
        let out = pair_run(&exp, &constants).unwrap();
        for r in &out.records {
            assert_eq!(r.l1, 0.0);
        }
        for v in &out.verdicts {
            assert!(!v.is_failure(), "{}", v.name);
        }
    }

    #[test]
    fn pair_run_small_data_bounds_hold() {
        for preset in [Preset::Thirring, Preset::GrossNeveu] {
            let exp = small_pair(preset, 1e-3);
            let constants = exp.params.derive_constants(20_000, 42).unwrap();
            let out = pair_run(&exp, &constants).unwrap();
            assert!(out.base_records[0].l0 <= constants.delta, "not small data");
            let stability = out
                .verdicts
                .iter()
                .find(|v| v.name == "prop_l2_stability")
                .unwrap();
            assert_eq!(stability.status, Status::Pass, "{preset:?}: {stability:?}");
        }
    }

    #[test]
    fn pair_run_swap_is_symmetric() {
        // The pair functionals treat (base, perturbed) symmetrically:
        // swapping the two trajectories reproduces the streams exactly.
        let exp = small_pair(Preset::Thirring, 1e-2);
        let constants = exp.params.derive_constants(20_000, 42).unwrap();
        let base = SpinorField::build_initial(exp.grid, &exp.base_profiles, 3.0).unwrap();
        let mut pert_profiles = exp.base_profiles.clone();
        pert_profiles.push(exp.perturbation);
        let pert = SpinorField::build_initial(exp.grid, &pert_profiles, 3.0).unwrap();
        let (ta, ra) = run_with_records(&base, &exp.params, &exp.scheme, &constants).unwrap();
        let (tb, rb) = run_with_records(&pert, &exp.params, &exp.scheme, &constants).unwrap();
        let fwd = pair_records(&ta.snapshots, &tb.snapshots, &ra, &rb, &constants, 1.0).unwrap();
        let rev = pair_records(&tb.snapshots, &ta.snapshots, &rb, &ra, &constants, 1.0).unwrap();
        for (a, b) in fwd.iter().zip(&rev) {
            assert_eq!(a.l1, b.l1);
            assert_eq!(a.d1, b.d1);
            assert_eq!(a.q1, b.q1);
        }
    }

    #[test]
    fn alpha_zero_pair_is_isometric() {
        let mut exp = small_pair(Preset::Thirring, 1e-2);
        exp.params = ModelParams::preset(Preset::Thirring, 0.0, 1.0).unwrap();
        let constants = exp.params.derive_constants(5_000, 42).unwrap();
        let out = pair_run(&exp, &constants).unwrap();
        let l1_0 = out.records[0].l1;
        for r in &out.records {
            assert!((r.l1 - l1_0).abs() <= 1e-12 * l1_0);
        }
        for v in &out.verdicts {
            assert!(!v.is_failure(), "{}", v.name);
        }
    }

    fn small_cauchy(streaming: bool) -> CauchyExperiment {
        CauchyExperiment {
            params: ModelParams::preset(Preset::Thirring, 1.0, 1.0).unwrap(),
            grid: Grid::new(-12.0, 12.0, 384).unwrap(),
            scheme: scheme(2.0, 8),
            base_profiles: vec![
                gaussian(Component::U, 0.02, -1.5, 0.8),
                gaussian(Component::V, 0.015, 1.5, 1.2),
            ],
            perturbation: bump_profile(Component::U, 1e-2, -1.5, 1.5),
            members: 4,
            ratio: 0.5,
            streaming,
            test_function: None,
        }
    }

    #[test]
    fn cauchy_streaming_and_post_hoc_agree() {
        let constants = small_cauchy(true).params.derive_constants(20_000, 42).unwrap();
        let a = cauchy_experiment(&small_cauchy(true), &constants).unwrap();
        let b = cauchy_experiment(&small_cauchy(false), &constants).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.d_sup, rb.d_sup);
            assert_eq!(ra.d_initial, rb.d_initial);
            assert_eq!(ra.t_sup, rb.t_sup);
            assert_eq!(ra.bound, rb.bound);
        }
    }

    #[test]
    fn cauchy_distances_shrink_geometrically() {
        let exp = small_cauchy(true);
        let constants = exp.params.derive_constants(20_000, 42).unwrap();
        let out = cauchy_experiment(&exp, &constants).unwrap();
        for v in &out.verdicts {
            assert!(!v.is_failure(), "{:?}", v);
        }
        // Triangle inequality on the sup-distance matrix.
        let m = exp.members;
        let d = |a: usize, b: usize| -> f64 {
            if a == b {
                return 0.0;
            }
            let (k, j) = if a < b { (a, b) } else { (b, a) };
            out.rows.iter().find(|r| r.k == k && r.j == j).unwrap().d_sup
        };
        for a in 0..=m {
            for b in 0..=m {
                for c in 0..=m {
                    assert!(d(a, b) <= d(a, c) + d(c, b) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn cauchy_identical_members_rejected_by_monotonicity() {
        let mut exp = small_cauchy(true);
        exp.perturbation.amplitude = 0.0;
        let constants = exp.params.derive_constants(5_000, 42).unwrap();
        assert!(matches!(
            cauchy_experiment(&exp, &constants),
            Err(Error::InvalidExperiment(_))
        ));
    }

    #[test]
    fn two_member_cauchy_matches_pair_run() {
        // A two-member family is just a pair experiment in disguise; its
        // sup distance must obey the same h4 bound.
        let mut exp = small_cauchy(false);
        exp.members = 2;
        let constants = exp.params.derive_constants(20_000, 42).unwrap();
        let out = cauchy_experiment(&exp, &constants).unwrap();
        let bound_v = out.verdicts.iter().find(|v| v.name == "pairwise_l2_bound").unwrap();
        assert_eq!(bound_v.status, Status::Pass);

        let pair = PairExperiment {
            params: exp.params,
            grid: exp.grid,
            scheme: exp.scheme,
            base_profiles: exp.base_profiles.clone(),
            perturbation: exp.perturbation,
        };
        let pout = pair_run(&pair, &constants).unwrap();
        // Row (member 0, limit) is exactly the pair experiment distance.
        let row = out.rows.iter().find(|r| r.k == 0 && r.j == 2).unwrap();
        let max_l1 = pout.records.iter().map(|r| r.l1).fold(f64::MIN, f64::max);
        assert!((row.d_sup - max_l1.sqrt()).abs() <= 1e-12 * row.d_sup.max(1e-300));
    }

    #[test]
    fn weak_residual_zero_solution() {
        let grid = Grid::new(-8.0, 8.0, 128).unwrap();
        let params = ModelParams::preset(Preset::Thirring, 1.0, 1.0).unwrap();
        let mut snaps = Vec::new();
        let mut steps = Vec::new();
        for k in 0..=32 {
            let mut f = SpinorField::zero(grid);
            f.t = k as f64 * grid.dx;
            snaps.push(f);
            steps.push(k);
        }
        let t_end = 32.0 * grid.dx;
        let traj = Trajectory { snapshots: snaps, steps, dt: grid.dx };
        let tf = TestFunction {
            x_center: 0.0,
            x_width: 2.0,
            t_center: t_end / 2.0,
            t_width: t_end / 4.0,
        };
        let w = weak_residual(&traj, &params, &tf).unwrap();
        assert_eq!((w.r1, w.r2), (0.0, 0.0));
    }

    #[test]
    fn weak_residual_rejects_support_touching_boundary() {
        let grid = Grid::new(-8.0, 8.0, 128).unwrap();
        let params = ModelParams::preset(Preset::Thirring, 1.0, 1.0).unwrap();
        let traj = Trajectory {
            snapshots: vec![SpinorField::zero(grid)],
            steps: vec![0],
            dt: grid.dx,
        };
        let tf = TestFunction { x_center: 7.0, x_width: 2.0, t_center: 0.0, t_width: 0.1 };
        assert!(matches!(
            weak_residual(&traj, &params, &tf),
            Err(Error::TestSupportOutsideDomain)
        ));
    }

    /// Scheme trajectory for the massless Thirring problem used by the
    /// weak-residual order and sensitivity probes.
    fn oracle_problem_trajectory(n: usize) -> (Trajectory, ModelParams) {
        let params = ModelParams::preset(Preset::Thirring, 1.0, 0.0).unwrap();
        let grid = Grid::new(-8.0, 8.0, n).unwrap();
        let init = SpinorField::build_initial(
            grid,
            &[gaussian(Component::U, 1.0, -1.5, 0.7), gaussian(Component::V, 1.0, 1.5, 0.7)],
            2.0,
        )
        .unwrap();
        let sch = scheme(2.0, 1);
        (run_trajectory(&init, &params, &sch).unwrap(), params)
    }

    #[test]
    fn weak_residual_second_order_and_sensitive() {
        let tf = TestFunction { x_center: 0.0, x_width: 4.0, t_center: 1.0, t_width: 0.8 };
        let (coarse, params) = oracle_problem_trajectory(512);
        let (fine, _) = oracle_problem_trajectory(1024);
        let rc = weak_residual(&coarse, &params, &tf).unwrap().max();
        let rf = weak_residual(&fine, &params, &tf).unwrap().max();
        let order = (rc / rf).log2();
        assert!(order >= 1.9, "observed order {order} ({rc} -> {rf})");

        // Corrupting one snapshot must light up the residual.
        let mut corrupted = fine.clone();
        let mid = corrupted.snapshots.len() / 2;
        for z in corrupted.snapshots[mid].u.iter_mut() {
            *z = z.scale(1.1);
        }
        let rbad = weak_residual(&corrupted, &params, &tf).unwrap().max();
        assert!(rbad >= 10.0 * rf, "corrupted {rbad} vs smooth {rf}");
    }

    #[test]
    fn weak_residual_of_exact_oracle_trajectory_is_small() {
        let params = ModelParams::preset(Preset::Thirring, 1.0, 0.0).unwrap();
        let grid = Grid::new(-8.0, 8.0, 256).unwrap();
        let profiles =
            [gaussian(Component::U, 1.0, -1.5, 0.7), gaussian(Component::V, 1.0, 1.5, 0.7)];
        let mut snaps = Vec::new();
        let mut steps = Vec::new();
        let n_steps = (2.0 / grid.dx).round() as usize;
        for k in 0..=n_steps {
            snaps.push(
                thirring_m0_exact(&profiles, &params, k as f64 * grid.dx, grid).unwrap(),
            );
            steps.push(k);
        }
        let traj = Trajectory { snapshots: snaps, steps, dt: grid.dx };
        let tf = TestFunction { x_center: 0.0, x_width: 4.0, t_center: 1.0, t_width: 0.8 };
        let w = weak_residual(&traj, &params, &tf).unwrap();
        // Pure quadrature error on an exact solution.
        assert!(w.max() < 5e-3, "residual {}", w.max());
    }
}
