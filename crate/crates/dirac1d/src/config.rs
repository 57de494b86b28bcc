//! TOML run configuration: flat sections, typed scalars, unknown keys
//! rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{NonlinearIntegrator, SchemeConfig, SubstepOrder};
use crate::field::{Grid, ProfileSpec};
use crate::model::{ModelParams, Preset};
use crate::stability::TestFunction;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Thirring,
    GrossNeveu,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomCoefficients {
    pub alpha1: [f64; 2],
    pub alpha2: [f64; 2],
    pub alpha3: [f64; 2],
    pub alpha4: [f64; 2],
    pub alpha5: [f64; 2],
    pub beta1: [f64; 2],
    pub beta2: [f64; 2],
    pub beta3: [f64; 2],
    pub beta4: [f64; 2],
    pub beta5: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub preset: PresetName,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub custom: Option<CustomCoefficients>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeBlock {
    pub n_cells: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub t_final: f64,
    #[serde(default = "default_substep")]
    pub substep_order: SubstepOrder,
    #[serde(default)]
    pub nonlinear_integrator: Option<NonlinearIntegrator>,
    #[serde(default = "default_stride")]
    pub diagnostics_stride: usize,
}

fn default_substep() -> SubstepOrder {
    SubstepOrder::Strang
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Validate,
    Run,
    Pair,
    Cauchy,
    Oracle,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExperimentKind::Validate => "validate",
            ExperimentKind::Run => "run",
            ExperimentKind::Pair => "pair",
            ExperimentKind::Cauchy => "cauchy",
            ExperimentKind::Oracle => "oracle",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub kind: ExperimentKind,
    /// Perturbation profile for pair and cauchy experiments; its amplitude
    /// is the epsilon of the experiment.
    #[serde(default)]
    pub perturbation: Option<ProfileSpec>,
    /// Number of members of a cauchy family (excluding the limit member).
    #[serde(default = "default_members")]
    pub members: usize,
    /// Per-member amplitude factor of the cauchy family.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Levels of an oracle refinement study.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Weak-form test function for cauchy experiments.
    #[serde(default)]
    pub test_function: Option<TestFunction>,
}

fn default_members() -> usize {
    6
}

fn default_ratio() -> f64 {
    0.5
}

fn default_levels() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_outdir")]
    pub directory: String,
    #[serde(default)]
    pub write_snapshots: bool,
}

fn default_outdir() -> String {
    "out".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: default_outdir(), write_snapshots: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityBlock {
    #[serde(default = "default_streaming")]
    pub streaming: bool,
}

fn default_streaming() -> bool {
    true
}

impl Default for StabilityBlock {
    fn default() -> Self {
        StabilityBlock { streaming: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub model: ModelBlock,
    pub scheme: SchemeBlock,
    #[serde(default)]
    pub profiles: Vec<ProfileSpec>,
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub stability: StabilityBlock,
}

fn default_seed() -> u64 {
    42
}

impl RunConfig {
    /// Parse and validate.  Unknown keys, type mismatches and range
    /// violations all surface as configuration errors naming the key
    /// (the parser's own messages carry line numbers).
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            key: "<config>".into(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.mass < 0.0 || !m.mass.is_finite() {
            return Err(Error::Config {
                key: "model.mass".into(),
                reason: format!("mass must be a nonnegative finite number, got {}", m.mass),
            });
        }
        if !m.alpha.is_finite() {
            return Err(Error::Config {
                key: "model.alpha".into(),
                reason: "alpha must be finite".into(),
            });
        }
        match (m.preset, &m.custom) {
            (PresetName::Custom, None) => {
                return Err(Error::Config {
                    key: "model.custom".into(),
                    reason: "preset \"custom\" requires a [model.custom] coefficient block".into(),
                })
            }
            (PresetName::Custom, Some(_)) => {}
            (_, Some(_)) => {
                return Err(Error::Config {
                    key: "model.custom".into(),
                    reason: "coefficient block is only valid for preset \"custom\"".into(),
                })
            }
            (_, None) => {}
        }

        let s = &self.scheme;
        let grid = Grid::new(s.x_min, s.x_max, s.n_cells)?;
        let scheme = self.scheme_config()?;
        scheme.validate(grid.dx)?;

        if self.integrator() == NonlinearIntegrator::ExactPreset
            && m.preset == PresetName::Custom
        {
            return Err(Error::Config {
                key: "scheme.nonlinear_integrator".into(),
                reason: "exact_preset integration is unavailable for custom models; use rk4".into(),
            });
        }

        for p in &self.profiles {
            p.validate()?;
        }

        let e = &self.experiment;
        match e.kind {
            ExperimentKind::Pair => {
                if e.perturbation.is_none() {
                    return Err(Error::Config {
                        key: "experiment.perturbation".into(),
                        reason: "pair experiments need a perturbation profile".into(),
                    });
                }
            }
            ExperimentKind::Cauchy => {
                if e.perturbation.is_none() {
                    return Err(Error::Config {
                        key: "experiment.perturbation".into(),
                        reason: "cauchy experiments need a perturbation profile".into(),
                    });
                }
                if e.members < 2 {
                    return Err(Error::Config {
                        key: "experiment.members".into(),
                        reason: format!("needs at least 2 members, got {}", e.members),
                    });
                }
                if !(e.ratio > 0.0 && e.ratio < 1.0) {
                    return Err(Error::Config {
                        key: "experiment.ratio".into(),
                        reason: format!("ratio must lie strictly in (0, 1), got {}", e.ratio),
                    });
                }
            }
            ExperimentKind::Oracle => {
                if e.levels < 3 {
                    return Err(Error::Config {
                        key: "experiment.levels".into(),
                        reason: format!("refinement needs at least 3 levels, got {}", e.levels),
                    });
                }
            }
            ExperimentKind::Run | ExperimentKind::Validate => {}
        }
        if let Some(p) = &e.perturbation {
            p.validate()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.scheme.x_min, self.scheme.x_max, self.scheme.n_cells)
    }

    /// Default integrator: exact for presets, RK4 for custom models.
    pub fn integrator(&self) -> NonlinearIntegrator {
        self.scheme.nonlinear_integrator.unwrap_or(match self.model.preset {
            PresetName::Custom => NonlinearIntegrator::Rk4,
            _ => NonlinearIntegrator::ExactPreset,
        })
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        Ok(SchemeConfig {
            t_final: self.scheme.t_final,
            substep_order: self.scheme.substep_order,
            nonlinear_integrator: self.integrator(),
            diagnostics_stride: self.scheme.diagnostics_stride,
        })
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        match self.model.preset {
            PresetName::Thirring => {
                ModelParams::preset(Preset::Thirring, self.model.alpha, self.model.mass)
            }
            PresetName::GrossNeveu => {
                ModelParams::preset(Preset::GrossNeveu, self.model.alpha, self.model.mass)
            }
            PresetName::Custom => {
                let c = self.model.custom.as_ref().expect("validated");
                let z = |p: [f64; 2]| Complex64::new(p[0], p[1]);
                ModelParams::custom(
                    [z(c.alpha1), z(c.alpha2), z(c.alpha3), z(c.alpha4), z(c.alpha5)],
                    [z(c.beta1), z(c.beta2), z(c.beta3), z(c.beta4), z(c.beta5)],
                    self.model.mass,
                )
            }
        }
    }
}
