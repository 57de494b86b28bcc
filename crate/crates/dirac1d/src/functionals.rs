//! The interaction functionals and every envelope they are checked
//! against, all in O(N) per record.
//!
//! For a single run the record carries the charge L0, the ordered
//! interaction functional Q0 = sum_{x<y} |u(x)|^2 |v(y)|^2, the diagonal
//! dissipation D0, the running integral of D0, the interaction budget
//! `Q0(t) + int D0 <= 2 m L0(0)^2 t + Q0(0)`, the characteristic line
//! integrals with their bound q(t), the sup-norm envelope, and the H1
//! seminorm monitor.
//!
//! For a pair of runs the record carries the difference functionals
//! (L1, Q1, D1), the Lyapunov combination L1 + K Q1, the growth exponent
//! h3 with its closed bounds, and the stability envelope h4 with the
//! resulting L2 bound.
//!
//! Budget and envelope inequalities are theorems only under the small-data
//! hypothesis (initial charge below the model's delta), so their verdicts
//! report not-applicable instead of pass/fail when a run exceeds it.
//! Tolerances combine a 1e-6 relative allowance on the bound's scale with
//! a first-order estimate of the trapezoid quadrature error, and are
//! always reported next to the residuals they gate.
//!
//! Conventions pinned here and mirrored by the brute-force oracles:
//! strict ordering x < y (the diagonal cell feeds D0, not Q0); midpoint
//! rule in space; trapezoid accumulation in time at the diagnostics
//! stride.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{run_trajectory, NonlinearIntegrator, SchemeConfig, Trajectory};
use crate::field::SpinorField;
use crate::model::{ModelConstants, ModelParams};
use crate::verdict::Verdict;

/// Relative tolerance floor used across inequality verdicts.
pub const REL_TOL: f64 = 1e-6;

/// Per-snapshot diagnostics of a single run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalRecord {
    pub t: f64,
    pub l0: f64,
    pub q0: f64,
    pub d0: f64,
    pub int_d0: f64,
    pub bony_budget: f64,
    pub bony_residual: f64,
    pub gamma_r: f64,
    pub gamma_l: f64,
    pub q_bound: f64,
    pub linf_sq: f64,
    pub linf_envelope: f64,
    pub h1_semi: f64,
}

/// Per-snapshot diagnostics of a two-run stability experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairRecord {
    pub t: f64,
    pub l1: f64,
    pub q1: f64,
    pub d1: f64,
    pub int_d1: f64,
    pub lyapunov: f64,
    pub h3: f64,
    /// Closed bound on h3 exactly as printed (no cubic-bound constant on
    /// the dissipation term).
    pub h3_closed: f64,
    /// The derivable variant that keeps the constant c on the dissipation
    /// integral.
    pub h3_closed_with_c: f64,
    pub h4: f64,
    pub k: f64,
    /// h4(t) L1(0) - L1(t); nonnegative when the stability bound holds.
    pub bound_residual: f64,
}

/// L0, D0, sup |.|^2 and H1 seminorm of one snapshot.
pub fn pointwise_functionals(field: &SpinorField) -> (f64, f64, f64, f64) {
    let norms = field.norms();
    let dx = field.grid.dx;
    let mut d0 = 0.0;
    for (u, v) in field.u.iter().zip(&field.v) {
        d0 += u.norm_sqr() * v.norm_sqr();
    }
    (norms.charge, d0 * dx, norms.linf_sq, norms.h1_semi)
}

/// Ordered interaction functional by one suffix-sum pass.
pub fn bony_q0(field: &SpinorField) -> f64 {
    let dx = field.grid.dx;
    let n = field.n_cells();
    let mut suffix_v = 0.0;
    let mut acc = 0.0;
    // Walk right to left: suffix holds sum_{k>j} |v_k|^2.
    for j in (0..n).rev() {
        acc += field.u[j].norm_sqr() * suffix_v;
        suffix_v += field.v[j].norm_sqr();
    }
    acc * dx * dx
}

/// The line-integral budget q(t) = t (m L0 + 4 c m L0^2) + 4 c L0^2 + L0.
pub fn q_bound(t: f64, m: f64, c: f64, l0_init: f64) -> f64 {
    t * (m * l0_init + 4.0 * c * m * l0_init * l0_init)
        + 4.0 * c * l0_init * l0_init
        + l0_init
}

/// Sup-norm envelope (sup0 + 2 m q(t)) exp(m t + 2 c q(t)), clamped to
/// f64::MAX so large-data records stay finite (the check is gated off
/// there anyway).
pub fn linf_envelope(t: f64, m: f64, c: f64, l0_init: f64, linf0: f64) -> f64 {
    let q = q_bound(t, m, c, l0_init);
    let val = (linf0 + 2.0 * m * q) * (m * t + 2.0 * c * q).exp();
    if val.is_finite() {
        val
    } else {
        f64::MAX
    }
}

/// Flux integrals along the two edges of the backward cone with apex at
/// cell `apex_cell` of snapshot `apex_idx`.
///
/// The right edge x = x0 + (t0 - t) carries the u-flux and the left edge
/// x = x0 - (t0 - t) the v-flux; with dt = dx both edges pass through cell
/// centers at every snapshot.  The factor 2 is the full flux density the
/// divergence identity produces, which is what q(t0) bounds.
pub fn line_integrals(
    traj: &Trajectory,
    apex_cell: usize,
    apex_idx: usize,
) -> Result<(f64, f64)> {
    let apex_step = traj.steps[apex_idx];
    let n = traj.snapshots[0].n_cells();
    let offset0 = apex_step - traj.steps[0];
    if apex_cell + offset0 >= n || apex_cell < offset0 {
        let apex = &traj.snapshots[apex_idx];
        return Err(Error::ConeOutsideDomain { x0: apex.grid.x(apex_cell), t0: apex.t });
    }
    let mut gamma_r = 0.0;
    let mut gamma_l = 0.0;
    for i in 0..=apex_idx {
        let snap = &traj.snapshots[i];
        let off = apex_step - traj.steps[i];
        let fu = snap.u[apex_cell + off].norm_sqr();
        let fv = snap.v[apex_cell - off].norm_sqr();
        // Trapezoid weight over the snapshot times up to the apex.
        let w = trapezoid_weight(traj, i, apex_idx);
        gamma_r += 2.0 * fu * w;
        gamma_l += 2.0 * fv * w;
    }
    Ok((gamma_r, gamma_l))
}

fn trapezoid_weight(traj: &Trajectory, i: usize, last: usize) -> f64 {
    if last == 0 {
        return 0.0;
    }
    let t = |k: usize| traj.snapshots[k].t;
    let lo = if i == 0 { t(0) } else { t(i - 1) };
    let hi = if i == last { t(last) } else { t(i + 1) };
    0.5 * (hi - lo)
}

/// Build the full diagnostic record stream for a trajectory.  The
/// per-record line integrals use the cone with apex at the grid midpoint
/// and t0 = the record time; records whose cone would leave the domain
/// carry zeros there (the sampled-cone checks cover those regimes).
pub fn trajectory_records(
    traj: &Trajectory,
    params: &ModelParams,
    constants: &ModelConstants,
) -> Vec<FunctionalRecord> {
    let m = params.mass;
    let c = constants.c;
    let mut records = Vec::with_capacity(traj.snapshots.len());
    let mut int_d0 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let (l00, _, linf0, _) = pointwise_functionals(&traj.snapshots[0]);
    let q00 = bony_q0(&traj.snapshots[0]);
    let apex_cell = traj.snapshots[0].n_cells() / 2;

    for (i, snap) in traj.snapshots.iter().enumerate() {
        let (l0, d0, linf_sq, h1_semi) = pointwise_functionals(snap);
        let q0 = bony_q0(snap);
        if let Some((tp, dp)) = prev {
            int_d0 += 0.5 * (snap.t - tp) * (d0 + dp);
        }
        prev = Some((snap.t, d0));

        let (gamma_r, gamma_l) = line_integrals(traj, apex_cell, i).unwrap_or((0.0, 0.0));
        let budget = 2.0 * m * l00 * l00 * snap.t + q00;
        records.push(FunctionalRecord {
            t: snap.t,
            l0,
            q0,
            d0,
            int_d0,
            bony_budget: budget,
            bony_residual: budget - q0 - int_d0,
            gamma_r,
            gamma_l,
            q_bound: q_bound(snap.t, m, c, l00),
            linf_sq,
            linf_envelope: linf_envelope(snap.t, m, c, l00, linf0),
            h1_semi,
        });
    }
    records
}

/// Evolve and diagnose in one call.
pub fn run_with_records(
    init: &SpinorField,
    params: &ModelParams,
    scheme: &SchemeConfig,
    constants: &ModelConstants,
) -> Result<(Trajectory, Vec<FunctionalRecord>)> {
    let traj = run_trajectory(init, params, scheme)?;
    let records = trajectory_records(&traj, params, constants);
    Ok((traj, records))
}

/// First-order estimate of the accumulated trapezoid error of int D0 up to
/// each record: sum of (dt/2) |D0 step change|.
fn quadrature_error_series(records: &[FunctionalRecord]) -> Vec<f64> {
    let mut out = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    for i in 0..records.len() {
        if i > 0 {
            let dt = records[i].t - records[i - 1].t;
            acc += 0.5 * dt * (records[i].d0 - records[i - 1].d0).abs();
        }
        out.push(acc);
    }
    out
}

/// Verdicts for a single-run record stream.
///
/// Charge conservation is checked unconditionally (it needs no smallness).
/// The interaction budget, the line-integral bounds and the sup-norm
/// envelope assume initial charge <= delta and report not-applicable
/// otherwise.
pub fn run_verdicts(
    records: &[FunctionalRecord],
    params: &ModelParams,
    constants: &ModelConstants,
    integrator: NonlinearIntegrator,
) -> Vec<Verdict> {
    let mut verdicts = Vec::new();
    let l00 = records[0].l0;
    let t_end = records.last().map(|r| r.t).unwrap_or(0.0);

    // Exact substeps keep the charge drift at rounding level; the RK4
    // fallback drifts at its own order and gets a matching allowance.
    let drift = records
        .iter()
        .map(|r| (r.l0 - l00).abs())
        .fold(0.0f64, f64::max);
    let cons_tol = match integrator {
        NonlinearIntegrator::ExactPreset => 1e-10 * l00.max(1e-300),
        NonlinearIntegrator::Rk4 => {
            let dt = records.get(1).map(|r| r.t - records[0].t).unwrap_or(1.0);
            (1e-10 * l00).max(1e3 * dt.powi(4) * t_end * l00) + 1e-300
        }
    };
    verdicts.push(Verdict::upper(
        "charge_conservation",
        drift,
        0.0,
        cons_tol,
        format!("max |L0(t) - L0(0)| over {} records, L0(0) = {l00}", records.len()),
    ));

    // Ordering sanity: Q0 can never exceed (sum |u|^2 dx)(sum |v|^2 dx)
    // <= (L0/2)^2.
    let q0_excess = records
        .iter()
        .map(|r| r.q0 - 0.25 * r.l0 * r.l0)
        .fold(f64::MIN, f64::max);
    verdicts.push(Verdict::upper(
        "q0_cauchy_ordering",
        q0_excess,
        0.0,
        1e-12 * l00.max(1e-300) * l00.max(1e-300),
        "max of Q0 - (L0/2)^2 over records".into(),
    ));

    let small_data = l00 <= constants.delta;
    if !small_data {
        for name in ["bony_budget", "bony_differential", "line_gamma_r", "line_gamma_l", "linf_envelope"] {
            verdicts.push(Verdict::not_applicable(
                name,
                format!("initial charge {l00} exceeds delta = {}", constants.delta),
            ));
        }
        return verdicts;
    }

    let quad = quadrature_error_series(records);
    let m = params.mass;

    // Integral budget: residual already stored per record.
    let (worst_idx, worst) = records
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.bony_residual))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let budget_tol = REL_TOL * l00 * l00 + quad[worst_idx];
    verdicts.push(Verdict::lower(
        "bony_budget",
        worst,
        0.0,
        budget_tol,
        format!("min residual at t = {}", records[worst_idx].t),
    ));

    // Differential form per interval: 2 m L0(0)^2 - dQ0/dt - avg D0 >= -tol.
    let mut diff_worst = f64::MAX;
    let mut diff_tol = 0.0;
    let mut diff_at = 0.0;
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        let lhs = (w[1].q0 - w[0].q0) / dt + 0.5 * (w[0].d0 + w[1].d0);
        let res = 2.0 * m * l00 * l00 - lhs;
        let tol = REL_TOL * l00 * l00 + 0.5 * (w[1].d0 - w[0].d0).abs();
        if res - tol < diff_worst - diff_tol {
            diff_worst = res;
            diff_tol = tol;
            diff_at = w[0].t;
        }
    }
    if records.len() > 1 {
        verdicts.push(Verdict::lower(
            "bony_differential",
            diff_worst,
            0.0,
            diff_tol,
            format!("worst interval starts at t = {diff_at}"),
        ));
    }

    // Line integrals against q(t) at every record.
    for (name, pick) in [
        ("line_gamma_r", &(|r: &FunctionalRecord| r.gamma_r) as &dyn Fn(&FunctionalRecord) -> f64),
        ("line_gamma_l", &|r: &FunctionalRecord| r.gamma_l),
    ] {
        let (idx, excess) = records
            .iter()
            .enumerate()
            .map(|(i, r)| (i, pick(r) - r.q_bound))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        verdicts.push(Verdict::upper(
            name,
            pick(&records[idx]),
            records[idx].q_bound,
            REL_TOL * q_bound(t_end, m, constants.c, l00) + quad[idx],
            format!("worst at t = {} (excess {excess:.3e})", records[idx].t),
        ));
    }

    // Sup-norm envelope at every record.
    let (idx, _) = records
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.linf_sq - r.linf_envelope))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    verdicts.push(Verdict::upper(
        "linf_envelope",
        records[idx].linf_sq,
        records[idx].linf_envelope,
        REL_TOL * records[idx].linf_envelope.max(1e-300),
        format!("worst at t = {}", records[idx].t),
    ));

    verdicts
}

/// Difference functionals of two snapshots on the same grid and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFunctionals {
    pub l1: f64,
    pub q1: f64,
    pub d1: f64,
}

/// (L1, Q1, D1) in O(N) via suffix sums, same strict-diagonal convention
/// as `bony_q0`.
pub fn pair_functionals(a: &SpinorField, b: &SpinorField) -> Result<PairFunctionals> {
    if a.grid != b.grid || a.t != b.t {
        return Err(Error::GridMismatch);
    }
    let n = a.n_cells();
    let dx = a.grid.dx;
    let mut l1 = 0.0;
    let mut d1 = 0.0;
    let mut q1 = 0.0;
    // suffix_a = sum_{k>j} (|v_k|^2 + |v'_k|^2), suffix_v = sum_{k>j} |V_k|^2.
    let mut suffix_a = 0.0;
    let mut suffix_v = 0.0;
    for j in (0..n).rev() {
        let du = (a.u[j] - b.u[j]).norm_sqr();
        let dv = (a.v[j] - b.v[j]).norm_sqr();
        let av = a.v[j].norm_sqr() + b.v[j].norm_sqr();
        let bu = a.u[j].norm_sqr() + b.u[j].norm_sqr();
        l1 += du + dv;
        d1 += du * av + bu * dv;
        q1 += du * suffix_a + bu * suffix_v;
        suffix_a += av;
        suffix_v += dv;
    }
    Ok(PairFunctionals { l1: l1 * dx, d1: d1 * dx, q1: q1 * dx * dx })
}

/// Assemble the pair record stream from two lockstep runs.
///
/// h3 follows its defining quadrature; h3_closed is the printed closed
/// bound; h4(t) = (1 + K (L0(0) + L0'(0))) exp(h3(t)) instantiates the
/// stability envelope via the initial-Q1 bound
/// Q1(0) <= L1(0) (L0(0) + L0'(0)).
pub fn pair_records(
    snaps_a: &[SpinorField],
    snaps_b: &[SpinorField],
    recs_a: &[FunctionalRecord],
    recs_b: &[FunctionalRecord],
    constants: &ModelConstants,
    mass: f64,
) -> Result<Vec<PairRecord>> {
    if snaps_a.len() != snaps_b.len() || recs_a.len() != snaps_a.len() || recs_b.len() != snaps_b.len() {
        return Err(Error::GridMismatch);
    }
    let l00a = recs_a[0].l0;
    let l00b = recs_b[0].l0;
    let c = constants.c;
    let k = constants.k;
    let mut out = Vec::with_capacity(snaps_a.len());
    let mut int_d1 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut l1_init = 0.0;
    for i in 0..snaps_a.len() {
        let pf = pair_functionals(&snaps_a[i], &snaps_b[i])?;
        let t = snaps_a[i].t;
        if i == 0 {
            l1_init = pf.l1;
        }
        if let Some((tp, dp)) = prev {
            int_d1 += 0.5 * (t - tp) * (pf.d1 + dp);
        }
        prev = Some((t, pf.d1));
        let h3 = 2.0 * mass * (l00a + l00b) * t + c * (recs_a[i].int_d0 + recs_b[i].int_d0);
        let h3_closed = 2.0 * mass * (l00a + l00b + l00a * l00a + l00b * l00b) * t
            + l00a * l00a
            + l00b * l00b;
        let h3_closed_with_c = 2.0 * mass * (l00a + l00b) * t
            + c * (2.0 * mass * (l00a * l00a + l00b * l00b) * t + l00a * l00a + l00b * l00b);
        let h4 = {
            let v = (1.0 + k * (l00a + l00b)) * h3.exp();
            if v.is_finite() { v } else { f64::MAX }
        };
        out.push(PairRecord {
            t,
            l1: pf.l1,
            q1: pf.q1,
            d1: pf.d1,
            int_d1,
            lyapunov: pf.l1 + k * pf.q1,
            h3,
            h3_closed,
            h3_closed_with_c,
            h4,
            k,
            bound_residual: h4 * l1_init - pf.l1,
        });
    }
    Ok(out)
}

/// Verdicts for a pair experiment: the L2 stability bound, the discrete
/// Lyapunov interval inequality (in its unweighted form and the
/// K-weighted variant the Gronwall chain supports), and the two closed
/// bounds on h3.
pub fn pair_verdicts(
    pair: &[PairRecord],
    recs_a: &[FunctionalRecord],
    recs_b: &[FunctionalRecord],
    constants: &ModelConstants,
    mass: f64,
) -> Vec<Verdict> {
    let l00a = recs_a[0].l0;
    let l00b = recs_b[0].l0;
    let small = l00a <= constants.delta && l00b <= constants.delta;
    let names = [
        "prop_l2_stability",
        "lyapunov_interval",
        "lyapunov_interval_weighted",
        "h3_closed_literal",
        "h3_closed_with_c",
    ];
    if !small {
        return names
            .iter()
            .map(|n| {
                Verdict::not_applicable(
                    n,
                    format!(
                        "initial charges ({l00a}, {l00b}) exceed delta = {}",
                        constants.delta
                    ),
                )
            })
            .collect();
    }

    let mut verdicts = Vec::new();
    let l1_init = pair[0].l1;
    let c = constants.c;
    let k = constants.k;

    // L1(t) <= h4(t) L1(0).
    let (idx, worst) = pair
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.bound_residual))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    verdicts.push(Verdict::lower(
        "prop_l2_stability",
        worst,
        0.0,
        REL_TOL * pair[idx].h4 * l1_init + 1e-30,
        format!("min of h4(t) L1(0) - L1(t) at t = {}", pair[idx].t),
    ));

    // Interval inequality: d/dt(L1 + K Q1) + D1 <= R(t) L1 with
    // R = 2 m (L0(0) + L0'(0)) + c (D0 + D0'), trapezoid on both sides.
    // The unweighted form is checked as stated; the Gronwall chain behind
    // it actually yields the K-weighted rate, so that variant is reported
    // too (for m > 0 the unweighted form fails around bump interactions
    // while the weighted one holds with a wide margin).
    let rate = |i: usize| 2.0 * mass * (l00a + l00b) + c * (recs_a[i].d0 + recs_b[i].d0);
    let rate_weighted =
        |i: usize| k * (2.0 * mass * (l00a + l00b) + c * (recs_a[i].d0 + recs_b[i].d0));
    for (name, r) in [
        ("lyapunov_interval", &rate as &dyn Fn(usize) -> f64),
        ("lyapunov_interval_weighted", &rate_weighted),
    ] {
        let mut worst = f64::MAX;
        let mut worst_tol = 0.0;
        let mut worst_t = 0.0;
        let scale0 = r(0) * pair[0].l1;
        for i in 0..pair.len().saturating_sub(1) {
            let dt = pair[i + 1].t - pair[i].t;
            let lhs = (pair[i + 1].lyapunov - pair[i].lyapunov) / dt
                + 0.5 * (pair[i].d1 + pair[i + 1].d1);
            let rhs = 0.5 * (r(i) * pair[i].l1 + r(i + 1) * pair[i + 1].l1);
            let res = rhs - lhs;
            let tol = REL_TOL * scale0.abs()
                + 0.5 * (pair[i + 1].d1 - pair[i].d1).abs()
                + 0.5 * (r(i + 1) * pair[i + 1].l1 - r(i) * pair[i].l1).abs()
                + 1e-30;
            if res - tol < worst - worst_tol {
                worst = res;
                worst_tol = tol;
                worst_t = pair[i].t;
            }
        }
        if pair.len() > 1 {
            verdicts.push(Verdict::lower(
                name,
                worst,
                0.0,
                worst_tol,
                format!("worst interval starts at t = {worst_t}"),
            ));
        }
    }

    // h3 against its closed bounds.
    let quad: Vec<f64> = {
        let qa = quadrature_error_series(recs_a);
        let qb = quadrature_error_series(recs_b);
        qa.iter().zip(qb).map(|(a, b)| c * (a + b)).collect()
    };
    for (name, bound) in [
        ("h3_closed_literal", &(|r: &PairRecord| r.h3_closed) as &dyn Fn(&PairRecord) -> f64),
        ("h3_closed_with_c", &|r: &PairRecord| r.h3_closed_with_c),
    ] {
        let (idx, _) = pair
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.h3 - bound(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        verdicts.push(Verdict::upper(
            name,
            pair[idx].h3,
            bound(&pair[idx]),
            REL_TOL * bound(pair.last().unwrap()).max(1e-300) + quad[idx],
            format!("worst at t = {}", pair[idx].t),
        ));
    }

    verdicts
}
