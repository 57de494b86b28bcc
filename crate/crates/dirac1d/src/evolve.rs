//! Characteristic split-step time integrator.
//!
//! The step is locked to CFL = 1 (dt = dx), which makes the free-streaming
//! part an exact grid shift: u rides right-moving characteristics, v
//! left-moving ones, and one step moves each by exactly one cell.  The
//! mass coupling and the preset nonlinearities are solved pointwise in
//! closed form, so every substep is unitary on (|u|^2 + |v|^2) and the
//! discrete charge is conserved to rounding.
//!
//! One Strang step is the palindrome
//!
//! ```text
//! mass(dt/2) -> nonlinear(dt/2) -> shift(dt) -> nonlinear(dt/2) -> mass(dt/2)
//! ```
//!
//! (mass before nonlinearity in the leading half-step; the trailing
//! half-step mirrors it, which is what keeps the composition second order
//! when m > 0).  Lie mode applies mass(dt), nonlinear(dt), shift(dt) for
//! order comparisons.
//!
//! Running a trajectory only records snapshots; the functional diagnostics
//! that accompany them live in [`crate::functionals`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::model::{ModelParams, Preset};

/// Field magnitude allowed at the domain ends before a shift counts as the
/// light cone reaching the boundary.
pub const BOUNDARY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstepOrder {
    Strang,
    Lie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearIntegrator {
    ExactPreset,
    Rk4,
}

/// Everything the stepper needs besides the field itself.  dt is not a
/// field: it is always the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub t_final: f64,
    pub substep_order: SubstepOrder,
    pub nonlinear_integrator: NonlinearIntegrator,
    pub diagnostics_stride: usize,
}

impl SchemeConfig {
    pub fn validate(&self, dx: f64) -> Result<usize> {
        if self.diagnostics_stride == 0 {
            return Err(Error::Config {
                key: "scheme.diagnostics_stride".into(),
                reason: "stride must be at least 1".into(),
            });
        }
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(Error::Config {
                key: "scheme.t_final".into(),
                reason: format!("t_final must be a nonnegative finite number, got {}", self.t_final),
            });
        }
        let steps = (self.t_final / dx).round();
        if (self.t_final - steps * dx).abs() > 1e-9 * dx.max(self.t_final) {
            return Err(Error::Config {
                key: "scheme.t_final".into(),
                reason: format!(
                    "t_final = {} is not an integer multiple of dt = dx = {}",
                    self.t_final, dx
                ),
            });
        }
        Ok(steps as usize)
    }
}

/// Forward or time-reversed stepping.  The reverse of the palindromic step
/// is the same palindrome with negated rotation angles and the shifts
/// exchanged, so reversal is exact for the closed-form substeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDirection {
    Forward,
    Reversed,
}

/// Shift u one cell right and v one cell left, injecting zeros at the
/// inflow ends.  This solves the m = 0, N = 0 system exactly over dt = dx.
/// Errors if any end cell carries mass, i.e. the support has reached the
/// boundary and samples would be created or destroyed.
pub fn transport_shift(field: &mut SpinorField, direction: TimeDirection, step: usize) -> Result<()> {
    let n = field.n_cells();
    let ends = [field.u[0], field.u[n - 1], field.v[0], field.v[n - 1]];
    if ends.iter().any(|z| z.norm() >= BOUNDARY_TOL) {
        return Err(Error::LightConeOverflow { step, t: field.t });
    }
    match direction {
        TimeDirection::Forward => {
            field.u.rotate_right(1);
            field.u[0] = Complex64::ZERO;
            field.v.rotate_left(1);
            field.v[n - 1] = Complex64::ZERO;
        }
        TimeDirection::Reversed => {
            field.u.rotate_left(1);
            field.u[n - 1] = Complex64::ZERO;
            field.v.rotate_right(1);
            field.v[0] = Complex64::ZERO;
        }
    }
    Ok(())
}

/// Pointwise exact solve of i u_t = -m v, i v_t = -m u over `dt`:
/// a rotation, so |u|^2 + |v|^2 is preserved at every cell.
pub fn mass_rotation(field: &mut SpinorField, m: f64, dt: f64) {
    if m == 0.0 || dt == 0.0 {
        return;
    }
    let (s, c) = (m * dt).sin_cos();
    let is = Complex64::new(0.0, s);
    for (u, v) in field.u.iter_mut().zip(field.v.iter_mut()) {
        let u0 = *u;
        let v0 = *v;
        *u = u0.scale(c) + is * v0;
        *v = v0.scale(c) + is * u0;
    }
}

/// Pointwise solve of i u_t = N1(u, v), i v_t = N2(u, v) over `dt`.
///
/// Exact mode uses the closed-form flows: the Thirring flow freezes both
/// moduli and rotates the phases; the Gross-Neveu flow freezes
/// rho = conj(u) v + u conj(v) and rotates the pair.  RK4 mode takes one
/// classical step of the pointwise ODE and works for any model.
pub fn nonlinear_substep(
    field: &mut SpinorField,
    params: &ModelParams,
    mode: NonlinearIntegrator,
    dt: f64,
) -> Result<()> {
    if dt == 0.0 {
        return Ok(());
    }
    match mode {
        NonlinearIntegrator::ExactPreset => match params.preset {
            Preset::Thirring => {
                let a = params.coupling();
                for (u, v) in field.u.iter_mut().zip(field.v.iter_mut()) {
                    let pu = Complex64::from_polar(1.0, -a * v.norm_sqr() * dt);
                    let pv = Complex64::from_polar(1.0, -a * u.norm_sqr() * dt);
                    *u *= pu;
                    *v *= pv;
                }
                Ok(())
            }
            Preset::GrossNeveu => {
                let a = params.coupling();
                for (u, v) in field.u.iter_mut().zip(field.v.iter_mut()) {
                    let rho = 2.0 * (u.conj() * *v).re;
                    let (s, c) = (2.0 * a * rho * dt).sin_cos();
                    let is = Complex64::new(0.0, s);
                    let u0 = *u;
                    let v0 = *v;
                    *u = u0.scale(c) - is * v0;
                    *v = v0.scale(c) - is * u0;
                }
                Ok(())
            }
            Preset::Custom => Err(Error::ExactSubstepUnavailable),
        },
        NonlinearIntegrator::Rk4 => {
            let f = |u: Complex64, v: Complex64| -> (Complex64, Complex64) {
                let (n1, n2) = params.eval_n(u, v);
                (-Complex64::i() * n1, -Complex64::i() * n2)
            };
            for (u, v) in field.u.iter_mut().zip(field.v.iter_mut()) {
                let (k1u, k1v) = f(*u, *v);
                let (k2u, k2v) = f(*u + k1u.scale(dt / 2.0), *v + k1v.scale(dt / 2.0));
                let (k3u, k3v) = f(*u + k2u.scale(dt / 2.0), *v + k2v.scale(dt / 2.0));
                let (k4u, k4v) = f(*u + k3u.scale(dt), *v + k3v.scale(dt));
                *u += (k1u + (k2u + k3u).scale(2.0) + k4u).scale(dt / 6.0);
                *v += (k1v + (k2v + k3v).scale(2.0) + k4v).scale(dt / 6.0);
            }
            Ok(())
        }
    }
}

/// Advance one full step of dt = dx.
pub fn step(
    field: &mut SpinorField,
    params: &ModelParams,
    scheme: &SchemeConfig,
    step_index: usize,
) -> Result<()> {
    step_directed(field, params, scheme, step_index, TimeDirection::Forward)
}

pub fn step_directed(
    field: &mut SpinorField,
    params: &ModelParams,
    scheme: &SchemeConfig,
    step_index: usize,
    direction: TimeDirection,
) -> Result<()> {
    let dx = field.grid.dx;
    let (dt, t_inc) = match direction {
        TimeDirection::Forward => (dx, dx),
        TimeDirection::Reversed => (-dx, -dx),
    };
    match scheme.substep_order {
        SubstepOrder::Strang => {
            let h = dt / 2.0;
            mass_rotation(field, params.mass, h);
            nonlinear_substep(field, params, scheme.nonlinear_integrator, h)?;
            transport_shift(field, direction, step_index)?;
            nonlinear_substep(field, params, scheme.nonlinear_integrator, h)?;
            mass_rotation(field, params.mass, h);
        }
        SubstepOrder::Lie => {
            mass_rotation(field, params.mass, dt);
            nonlinear_substep(field, params, scheme.nonlinear_integrator, dt)?;
            transport_shift(field, direction, step_index)?;
        }
    }
    field.t += t_inc;
    Ok(())
}

/// Snapshots of one run at the diagnostics stride (step 0 and the final
/// step always included).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<SpinorField>,
    /// Step index of each snapshot.
    pub steps: Vec<usize>,
    pub dt: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|f| f.t).collect()
    }
}

/// Evolve `init` to t_final, keeping a snapshot every
/// `diagnostics_stride` steps.  Aborts (never clamps) on the first
/// non-finite sample and on light-cone overflow.
pub fn run_trajectory(
    init: &SpinorField,
    params: &ModelParams,
    scheme: &SchemeConfig,
) -> Result<Trajectory> {
    let n_steps = scheme.validate(init.grid.dx)?;
    if !init.is_finite() {
        return Err(Error::NonFinite { step: 0, t: init.t });
    }
    let mut field = init.clone();
    let mut traj = Trajectory {
        snapshots: vec![field.clone()],
        steps: vec![0],
        dt: init.grid.dx,
    };
    for k in 1..=n_steps {
        step(&mut field, params, scheme, k)?;
        if !field.is_finite() {
            return Err(Error::NonFinite { step: k, t: field.t });
        }
        if k % scheme.diagnostics_stride == 0 || k == n_steps {
            traj.snapshots.push(field.clone());
            traj.steps.push(k);
        }
    }
    Ok(traj)
}
