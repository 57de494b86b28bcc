//! Error taxonomy for the laboratory.
//!
//! Variants are grouped by how the CLI maps them to exit codes:
//! configuration problems (exit 3) versus numerical aborts (exit 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("model rejected: sampled null-structure residual {max_rel:.3e} exceeds {limit:.1e} (seed {seed})")]
    ModelRejected { max_rel: f64, limit: f64, seed: u64 },

    #[error("numerical degeneracy while sampling model constants: non-finite ratio encountered")]
    DegenerateConstants,

    #[error("exact nonlinear substep is only available for the thirring and gross_neveu presets")]
    ExactSubstepUnavailable,

    #[error("domain too small: profile support [{lo}, {hi}] needs margin {margin} inside [{x_min}, {x_max}]")]
    DomainTooSmall { lo: f64, hi: f64, margin: f64, x_min: f64, x_max: f64 },

    #[error("light cone reached the domain boundary at step {step} (t = {t})")]
    LightConeOverflow { step: usize, t: f64 },

    #[error("non-finite field sample at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("fields live on different grids or times and cannot be paired")]
    GridMismatch,

    #[error("backward cone of (x0 = {x0}, t0 = {t0}) leaves the computational domain")]
    ConeOutsideDomain { x0: f64, t0: f64 },

    #[error("test function support must lie strictly inside the space-time domain")]
    TestSupportOutsideDomain,

    #[error("oracle unsupported here: {0}")]
    UnsupportedOracle(String),

    #[error("brute-force kernel refused: n_cells = {n} exceeds the quadratic-cost guard {guard}")]
    SizeGuard { n: usize, guard: usize },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code class used by the CLI: 3 for configuration-shaped errors,
    /// 4 for aborts raised while a run was in flight.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::ModelRejected { .. }
            | Error::DegenerateConstants
            | Error::ExactSubstepUnavailable
            | Error::DomainTooSmall { .. }
            | Error::InvalidExperiment(_)
            | Error::UnsupportedOracle(_)
            | Error::SizeGuard { .. } => 3,
            Error::LightConeOverflow { .. }
            | Error::NonFinite { .. }
            | Error::GridMismatch
            | Error::ConeOutsideDomain { .. }
            | Error::TestSupportOutsideDomain => 4,
            Error::Io(_) => 4,
        }
    }
}
