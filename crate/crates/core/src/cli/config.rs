//! JSON experiment configuration.
//!
//! The schema is versioned through `schema_version`. Unknown fields are
//! rejected, optional sections fall back to the defaults below, and
//! [`ExperimentConfig::to_canonical_json`] emits every field explicitly so
//! that a printed config re-parses to the same experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::EconomicParams;
use crate::error::{Error, Result};
use crate::fbs::{FbsConfig, InitialGuess};
use crate::integrate::TimeGrid;
use crate::model::{ControlBounds, EpidemicParams, SvirState};
use crate::scenarios::{presets, Problem, Strategy, SweepParam};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub epidemic: EpidemicSection,
    pub economic: EconomicParams,
    pub bounds: ControlBounds,
    pub grid: GridSection,
    pub initial_state: SvirState,
    #[serde(default)]
    pub fbs: FbsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpidemicSection {
    pub beta0: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub epsilon: f64,
    pub mu: f64,
    /// Vaccination rate for the reproduction number and equilibria;
    /// defaults to `bounds.u1_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// Horizon plus exactly one of `step` or `n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuessKind {
    #[default]
    Zero,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbsSection {
    pub smoothing_c: f64,
    pub max_iterations: usize,
    pub initial_guess: InitialGuessKind,
    pub rel_tol: f64,
}

impl Default for FbsSection {
    fn default() -> Self {
        let d = FbsConfig::default();
        FbsSection {
            smoothing_c: d.smoothing_c,
            max_iterations: d.max_iterations,
            initial_guess: InitialGuessKind::Zero,
            rel_tol: d.rel_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: String,
    pub values: Vec<f64>,
}

/// Named presets shipped with the crate.
pub const PRESETS: [(&str, &str); 3] = [
    ("baseline", include_str!("../../presets/baseline.json")),
    (
        "baseline-exp",
        include_str!("../../presets/baseline_exp.json"),
    ),
    ("endemic", include_str!("../../presets/endemic.json")),
];

fn prefixed(section: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { field, reason } if !field.contains('.') => {
            Error::InvalidParameter {
                field: format!("{section}.{field}"),
                reason,
            }
        }
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        cfg.problem()?;
        cfg.fbs_config()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::invalid(
                "preset",
                format!("unknown preset `{name}`, expected one of {names:?}"),
            )
        })?;
        Self::from_json(text)
    }

    pub fn from_problem(problem: &Problem, fbs: &FbsConfig) -> Self {
        let p = problem.params;
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            epidemic: EpidemicSection {
                beta0: p.beta0,
                gamma: p.gamma,
                gamma1: p.gamma1,
                epsilon: p.epsilon,
                mu: p.mu,
                alpha: (p.alpha != problem.bounds.u1_max).then_some(p.alpha),
            },
            economic: problem.econ,
            bounds: problem.bounds,
            grid: GridSection {
                t_end: problem.grid.t_end(),
                step: None,
                n_steps: Some(problem.grid.n_steps()),
            },
            initial_state: problem.x0,
            fbs: FbsSection {
                smoothing_c: fbs.smoothing_c,
                max_iterations: fbs.max_iterations,
                initial_guess: match fbs.initial {
                    InitialGuess::Full => InitialGuessKind::Full,
                    _ => InitialGuessKind::Zero,
                },
                rel_tol: fbs.rel_tol,
            },
            strategy: None,
            sweep: None,
            output_dir: None,
        }
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn problem(&self) -> Result<Problem> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        let bounds = self.bounds;
        bounds.validate().map_err(|e| prefixed("bounds", e))?;
        let e = self.epidemic;
        let params = EpidemicParams {
            beta0: e.beta0,
            gamma: e.gamma,
            gamma1: e.gamma1,
            epsilon: e.epsilon,
            mu: e.mu,
            alpha: e.alpha.unwrap_or(bounds.u1_max),
        };
        params.validate().map_err(|err| prefixed("epidemic", err))?;
        self.economic.validate()?;
        let grid = match (self.grid.step, self.grid.n_steps) {
            (Some(step), None) => TimeGrid::with_step(self.grid.t_end, step)?,
            (None, Some(n)) => TimeGrid::new(self.grid.t_end, n)?,
            _ => {
                return Err(Error::invalid(
                    "grid",
                    "give exactly one of `step` or `n_steps`",
                ))
            }
        };
        let x0 = self.initial_state;
        x0.validate()?;
        Ok(Problem {
            params,
            econ: self.economic,
            bounds,
            grid,
            x0,
        })
    }

    pub fn fbs_config(&self) -> Result<FbsConfig> {
        let cfg = FbsConfig {
            smoothing_c: self.fbs.smoothing_c,
            max_iterations: self.fbs.max_iterations,
            initial: match self.fbs.initial_guess {
                InitialGuessKind::Zero => InitialGuess::Zero,
                InitialGuessKind::Full => InitialGuess::Full,
            },
            rel_tol: self.fbs.rel_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_spec(&self) -> Result<Option<(SweepParam, Vec<f64>)>> {
        self.sweep
            .as_ref()
            .map(|s| Ok((s.param.parse()?, s.values.clone())))
            .transpose()
    }
}

pub fn builtin_problem(name: &str) -> Option<Problem> {
    match name {
        "baseline" => Some(presets::baseline_quadratic()),
        "baseline-exp" => Some(presets::baseline_exponential()),
        "endemic" => Some(presets::endemic()),
        _ => None,
    }
}
