//! Independent ground truth: a closed-form massless Thirring solution,
//! literal O(N^2) interaction sums, and grid-refinement studies.
//!
//! With m = 0 and a real Thirring coupling both modulus transport
//! equations have zero right-hand side, so |u| and |v| translate rigidly
//! and only the phases interact:
//!
//! ```text
//! u(t, x) = u0(x - t) exp(-i a/2 * int_{x-t}^{x+t} |v0|^2 dy)
//! v(t, x) = v0(x + t) exp(-i a/2 * int_{x-t}^{x+t} |u0|^2 dy)
//! ```
//!
//! The phase integrals are evaluated by adaptive quadrature; the formula
//! itself is validated against a tiny-step ODE integration along
//! characteristics (see [`characteristic_reference`]), which is a
//! prerequisite for using it as the error reference in refinement studies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{run_trajectory, SchemeConfig};
use crate::field::{Component, Grid, ProfileSpec, SpinorField};
use crate::model::{ModelParams, Preset};

/// Quadratic-cost guard for the brute-force kernels.
pub const BRUTE_FORCE_GUARD: usize = 4096;

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
///
/// The interval is first cut into eight panels so narrow features cannot
/// hide between the initial sample points of a single panel.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }

    if a == b {
        return 0.0;
    }
    let mut total = 0.0;
    let h = (b - a) / 8.0;
    for k in 0..8 {
        let lo = a + k as f64 * h;
        let hi = lo + h;
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = simpson(fa, fm, fb, hi - lo);
        total += recurse(f, lo, hi, fa, fm, fb, whole, tol / 8.0, 48);
    }
    total
}

/// Sum of the profiles feeding one component, as a closed-form function.
pub fn component_closure(profiles: &[ProfileSpec], component: Component) -> impl Fn(f64) -> Complex64 + '_ {
    move |x: f64| {
        profiles
            .iter()
            .filter(|p| p.component == component)
            .map(|p| p.eval(x))
            .sum()
    }
}

/// Integrate the modulus square of one component's initial data over
/// [a, b], splitting at profile support endpoints first so that features
/// much narrower than the interval cannot slip between the sample points
/// of the adaptive rule.
pub fn integrate_component_modsq(
    profiles: &[ProfileSpec],
    component: Component,
    a: f64,
    b: f64,
    tol: f64,
) -> f64 {
    if a >= b {
        return if a == b { 0.0 } else { -integrate_component_modsq(profiles, component, b, a, tol) };
    }
    let f = component_closure(profiles, component);
    let g = move |x: f64| f(x).norm_sqr();
    let mut cuts: Vec<f64> = vec![a, b];
    for p in profiles.iter().filter(|p| p.component == component) {
        if let Some((lo, hi)) = p.effective_support() {
            for v in [lo, hi, 0.5 * (lo + hi)] {
                if v > a && v < b {
                    cuts.push(v);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            acc += adaptive_simpson(&g, w[0], w[1], tol);
        }
    }
    acc
}

/// Closed-form massless Thirring solution sampled on `grid` at time `t`.
pub fn thirring_m0_exact(
    profiles: &[ProfileSpec],
    params: &ModelParams,
    t: f64,
    grid: Grid,
) -> Result<SpinorField> {
    if params.preset != Preset::Thirring {
        return Err(Error::UnsupportedOracle(
            "closed form exists for the thirring preset only".into(),
        ));
    }
    if params.mass != 0.0 {
        return Err(Error::UnsupportedOracle("closed form requires m = 0".into()));
    }
    let alpha = params.coupling();
    let u0 = component_closure(profiles, Component::U);
    let v0 = component_closure(profiles, Component::V);

    let mut field = SpinorField::zero(grid);
    field.t = t;
    for j in 0..grid.n_cells {
        let x = grid.x(j);
        let phase_u =
            -0.5 * alpha * integrate_component_modsq(profiles, Component::V, x - t, x + t, 1e-12);
        let phase_v =
            -0.5 * alpha * integrate_component_modsq(profiles, Component::U, x - t, x + t, 1e-12);
        field.u[j] = u0(x - t) * Complex64::from_polar(1.0, phase_u);
        field.v[j] = v0(x + t) * Complex64::from_polar(1.0, phase_v);
    }
    Ok(field)
}

/// Tiny-step RK4 integration of the phase ODE along each characteristic,
/// used to validate [`thirring_m0_exact`] before it backs anything else.
///
/// Along the right-moving characteristic ending at (t, x) the phase obeys
/// d(phi)/ds = -a |v0(x - t + 2s)|^2, a linear scalar ODE; same on the
/// left with u0.  `dt_sub` is the RK4 step (1e-5 for the validation gate).
pub fn characteristic_reference(
    profiles: &[ProfileSpec],
    params: &ModelParams,
    t: f64,
    grid: Grid,
    dt_sub: f64,
) -> Result<SpinorField> {
    if params.preset != Preset::Thirring || params.mass != 0.0 {
        return Err(Error::UnsupportedOracle("reference requires massless thirring".into()));
    }
    let alpha = params.coupling();
    let u0 = component_closure(profiles, Component::U);
    let v0 = component_closure(profiles, Component::V);

    let integrate = |coef: &dyn Fn(f64) -> f64| -> f64 {
        // RK4 on y' = g(s) reduces to Simpson over each substep.
        let n = (t / dt_sub).ceil().max(1.0) as usize;
        let h = t / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let s0 = k as f64 * h;
            acc += h / 6.0 * (coef(s0) + 4.0 * coef(s0 + 0.5 * h) + coef(s0 + h));
        }
        acc
    };

    let mut field = SpinorField::zero(grid);
    field.t = t;
    for j in 0..grid.n_cells {
        let x = grid.x(j);
        let gu = |s: f64| v0(x - t + 2.0 * s).norm_sqr();
        let gv = |s: f64| u0(x + t - 2.0 * s).norm_sqr();
        field.u[j] = u0(x - t) * Complex64::from_polar(1.0, -alpha * integrate(&gu));
        field.v[j] = v0(x + t) * Complex64::from_polar(1.0, -alpha * integrate(&gv));
    }
    Ok(field)
}

/// Literal double sum for the ordered interaction functional, strict
/// inequality x < y (the diagonal cell is excluded).
pub fn brute_force_q0(field: &SpinorField) -> Result<f64> {
    let n = field.n_cells();
    if n > BRUTE_FORCE_GUARD {
        return Err(Error::SizeGuard { n, guard: BRUTE_FORCE_GUARD });
    }
    let dx2 = field.grid.dx * field.grid.dx;
    let mut acc = 0.0;
    for j in 0..n {
        let uj = field.u[j].norm_sqr();
        for k in (j + 1)..n {
            acc += uj * field.v[k].norm_sqr();
        }
    }
    Ok(acc * dx2)
}

/// Literal double sum for the pair interaction functional, same diagonal
/// convention as [`brute_force_q0`].
pub fn brute_force_q1(a: &SpinorField, b: &SpinorField) -> Result<f64> {
    if a.grid != b.grid || a.t != b.t {
        return Err(Error::GridMismatch);
    }
    let n = a.n_cells();
    if n > BRUTE_FORCE_GUARD {
        return Err(Error::SizeGuard { n, guard: BRUTE_FORCE_GUARD });
    }
    let dx2 = a.grid.dx * a.grid.dx;
    let mut acc = 0.0;
    for j in 0..n {
        let uu = (a.u[j] - b.u[j]).norm_sqr();
        let bu = a.u[j].norm_sqr() + b.u[j].norm_sqr();
        for k in (j + 1)..n {
            let av = a.v[k].norm_sqr() + b.v[k].norm_sqr();
            let vv = (a.v[k] - b.v[k]).norm_sqr();
            acc += uu * av + bu * vv;
        }
    }
    Ok(acc * dx2)
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RefinementRow {
    pub level: usize,
    pub n_cells: usize,
    pub l2_error: Option<f64>,
    pub observed_order: Option<f64>,
}

/// The problem a refinement study repeats across resolutions.
#[derive(Debug, Clone)]
pub struct RefinementProblem {
    pub params: ModelParams,
    pub base_grid: Grid,
    pub scheme: SchemeConfig,
    pub profiles: Vec<ProfileSpec>,
}

/// Run the same problem at n_cells x {1, 2, 4, ...} and measure L2 errors
/// at t_final: against the closed-form solution when it applies (massless
/// Thirring), otherwise by self-convergence between consecutive levels
/// (values restricted by two-cell averaging, since cell centers do not
/// nest).  Error-to-finest would bias the last observed order to
/// log2(5) for a second-order scheme; consecutive differences keep every
/// order estimate centered on the true one.
pub fn refinement_study(problem: &RefinementProblem, levels: usize) -> Result<Vec<RefinementRow>> {
    if levels < 3 {
        return Err(Error::InvalidExperiment(format!(
            "refinement study needs at least 3 levels, got {levels}"
        )));
    }
    let oracle_backed = problem.params.preset == Preset::Thirring && problem.params.mass == 0.0;

    let mut finals: Vec<SpinorField> = Vec::with_capacity(levels);
    for level in 0..levels {
        let n = problem.base_grid.n_cells << level;
        let grid = Grid::new(problem.base_grid.x_min, problem.base_grid.x_max, n)?;
        let init = SpinorField::build_initial(grid, &problem.profiles, problem.scheme.t_final)?;
        // Only the final snapshot is needed.
        let scheme = SchemeConfig { diagnostics_stride: usize::MAX, ..problem.scheme };
        let traj = run_trajectory(&init, &problem.params, &scheme)?;
        finals.push(traj.snapshots.last().unwrap().clone());
    }

    let mut errors: Vec<Option<f64>> = vec![None; levels];
    if oracle_backed {
        for (level, field) in finals.iter().enumerate() {
            let exact =
                thirring_m0_exact(&problem.profiles, &problem.params, problem.scheme.t_final, field.grid)?;
            errors[level] = Some(field.l2_distance(&exact)?);
        }
    } else {
        for level in 0..levels - 1 {
            let restricted = restrict_to(&finals[level + 1], finals[level].grid);
            errors[level] = Some(finals[level].l2_distance(&restricted)?);
        }
    }

    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let order = match (errors.get(level.wrapping_sub(1)).copied().flatten(), errors[level]) {
            (Some(prev), Some(here)) if here > 0.0 => Some((prev / here).log2()),
            _ => None,
        };
        rows.push(RefinementRow {
            level,
            n_cells: problem.base_grid.n_cells << level,
            l2_error: errors[level],
            observed_order: order,
        });
    }
    Ok(rows)
}

/// Average a finer nested field down to `coarse` (second-order restriction:
/// each coarse center sits midway between two fine centers).
fn restrict_to(fine: &SpinorField, coarse: Grid) -> SpinorField {
    let ratio = fine.grid.n_cells / coarse.n_cells;
    let mut out = SpinorField::zero(coarse);
    out.t = fine.t;
    for j in 0..coarse.n_cells {
        let e = ratio * j + ratio / 2;
        out.u[j] = (fine.u[e - 1] + fine.u[e]).scale(0.5);
        out.v[j] = (fine.v[e - 1] + fine.v[e]).scale(0.5);
    }
    out
}
