//! Uniform grid, complex spinor fields, initial-data profiles and the
//! discrete norms used everywhere downstream.
//!
//! The continuum problem lives on the whole line with compactly supported
//! data; here the line is truncated to [x_min, x_max] and the run contract
//! is that the light cone of the initial support never reaches the ends.
//! Values beyond the ends are identically zero, which the transport step
//! realizes by injecting zeros at the inflow cells.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centered mesh on [x_min, x_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Grid> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(Error::Config {
                key: "scheme.x_min".into(),
                reason: format!("needs x_min < x_max, got [{x_min}, {x_max}]"),
            });
        }
        if n_cells < 8 {
            return Err(Error::Config {
                key: "scheme.n_cells".into(),
                reason: format!("needs n_cells >= 8, got {n_cells}"),
            });
        }
        let dx = (x_max - x_min) / n_cells as f64;
        Ok(Grid { x_min, x_max, n_cells, dx })
    }

    /// Center of cell j.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|j| self.x(j))
    }
}

/// Which spinor component a profile feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian,
    SmoothBump,
    Zero,
}

/// One additive contribution to the initial data of one component.
///
/// * `gaussian`:    a exp(-((x-c)/w)^2) e^{i theta}
/// * `smooth_bump`: a exp(1 - 1/(1 - s^2)) e^{i theta} for s = (x-c)/w inside
///   |s| < 1, exactly zero outside (peak value a at the center)
/// * `zero`:        0
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub component: Component,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn default_width() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.width.is_finite() || self.width <= 0.0 {
            return Err(Error::Config {
                key: "profiles.width".into(),
                reason: format!("width must be positive, got {}", self.width),
            });
        }
        for (k, v) in [
            ("profiles.center", self.center),
            ("profiles.amplitude", self.amplitude),
            ("profiles.phase", self.phase),
        ] {
            if !v.is_finite() {
                return Err(Error::Config { key: k.into(), reason: "must be finite".into() });
            }
        }
        Ok(())
    }

    /// Complex value at x.
    pub fn eval(&self, x: f64) -> Complex64 {
        let s = (x - self.center) / self.width;
        let modulus = match self.kind {
            ProfileKind::Zero => 0.0,
            ProfileKind::Gaussian => self.amplitude * (-s * s).exp(),
            ProfileKind::SmoothBump => {
                if s.abs() < 1.0 {
                    self.amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            }
        };
        Complex64::from_polar(1.0, self.phase).scale(modulus)
    }

    /// Interval outside of which the profile magnitude stays below 1e-16
    /// (two decades under the transport boundary gate): exact support for
    /// bumps, the absolute tail cutoff for gaussians, empty for zero.
    pub fn effective_support(&self) -> Option<(f64, f64)> {
        const CUTOFF: f64 = 1e-16;
        if self.amplitude.abs() <= CUTOFF {
            return None;
        }
        match self.kind {
            ProfileKind::Zero => None,
            ProfileKind::SmoothBump => Some((self.center - self.width, self.center + self.width)),
            ProfileKind::Gaussian => {
                let r = (self.amplitude.abs() / CUTOFF).ln().max(0.0).sqrt();
                Some((self.center - r * self.width, self.center + r * self.width))
            }
        }
    }
}

/// The complex pair (u, v) sampled at cell centers at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Grid,
    pub t: f64,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

/// Discrete norms of a snapshot: total charge, sup of the pointwise
/// modulus square, and the H1 seminorm (centered differences inside,
/// one-sided at the ends).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub charge: f64,
    pub linf_sq: f64,
    pub h1_semi: f64,
}

impl SpinorField {
    pub fn zero(grid: Grid) -> SpinorField {
        SpinorField {
            grid,
            t: 0.0,
            u: vec![Complex64::ZERO; grid.n_cells],
            v: vec![Complex64::ZERO; grid.n_cells],
        }
    }

    /// Sample the given profiles at cell centers; t starts at 0.
    ///
    /// `horizon` is the run length the field must survive: every profile's
    /// effective support needs at least that margin to both domain ends so
    /// the light cone stays interior.
    pub fn build_initial(grid: Grid, profiles: &[ProfileSpec], horizon: f64) -> Result<SpinorField> {
        for p in profiles {
            p.validate()?;
            if let Some((lo, hi)) = p.effective_support() {
                if lo - horizon < grid.x_min || hi + horizon > grid.x_max {
                    return Err(Error::DomainTooSmall {
                        lo,
                        hi,
                        margin: horizon,
                        x_min: grid.x_min,
                        x_max: grid.x_max,
                    });
                }
            }
        }
        let mut field = SpinorField::zero(grid);
        for p in profiles {
            let target = match p.component {
                Component::U => &mut field.u,
                Component::V => &mut field.v,
            };
            for (j, slot) in target.iter_mut().enumerate() {
                *slot += p.eval(grid.x(j));
            }
        }
        Ok(field)
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.grid.n_cells
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(self.v.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Charge, sup modulus square, H1 seminorm.
    pub fn norms(&self) -> Norms {
        let dx = self.grid.dx;
        let mut charge = 0.0;
        let mut linf_sq: f64 = 0.0;
        for (u, v) in self.u.iter().zip(&self.v) {
            let m = u.norm_sqr() + v.norm_sqr();
            charge += m;
            linf_sq = linf_sq.max(m);
        }
        charge *= dx;

        let n = self.n_cells();
        let mut h1 = 0.0;
        let diff = |w: &[Complex64], j: usize| -> f64 {
            let d = if j == 0 {
                w[1] - w[0]
            } else if j == n - 1 {
                w[n - 1] - w[n - 2]
            } else {
                (w[j + 1] - w[j - 1]).scale(0.5)
            };
            d.norm_sqr()
        };
        for j in 0..n {
            h1 += diff(&self.u, j) + diff(&self.v, j);
        }
        h1 *= dx / (dx * dx);

        Norms { charge, linf_sq, h1_semi: h1 }
    }

    /// L2 distance between two snapshots on the same grid.
    pub fn l2_distance(&self, other: &SpinorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut acc = 0.0;
        for j in 0..self.n_cells() {
            acc += (self.u[j] - other.u[j]).norm_sqr() + (self.v[j] - other.v[j]).norm_sqr();
        }
        Ok((acc * self.grid.dx).sqrt())
    }
}
