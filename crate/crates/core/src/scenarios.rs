//! Benchmark strategies, four-way cost tables and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjoint::{cost_functional, CostBreakdown};
use crate::control::{EconomicParams, SocialCostModel};
use crate::error::{Error, Result};
use crate::fbs::{fbs_solve, simulate, FbsConfig, FbsReport};
use crate::integrate::{ControlPath, TimeGrid, Trajectory};
use crate::model::{r0_continuous, Control, ControlBounds, EpidemicParams, SvirState};

/// Everything needed to pose one optimal control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub params: EpidemicParams,
    pub econ: EconomicParams,
    pub bounds: ControlBounds,
    pub grid: TimeGrid,
    pub x0: SvirState,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.econ.validate()?;
        self.bounds.validate()?;
        self.x0.validate()
    }

    /// Reproduction number at the constant vaccination rate `params.alpha`.
    pub fn r0(&self) -> f64 {
        r0_continuous(&self.params)
    }

    pub fn solve(&self, cfg: &FbsConfig) -> Result<FbsReport> {
        fbs_solve(
            &self.params,
            &self.econ,
            &self.bounds,
            &self.grid,
            &self.x0,
            cfg,
        )
    }
}

pub mod presets {
    //! Parameter sets of the two reference experiments.

    use super::*;

    pub fn baseline_params() -> EpidemicParams {
        EpidemicParams {
            beta0: 0.22,
            gamma: 0.0795,
            gamma1: 0.0714,
            epsilon: 0.078,
            mu: 2.5e-5,
            alpha: 0.006,
        }
    }

    pub fn endemic_params() -> EpidemicParams {
        EpidemicParams {
            beta0: 0.4,
            gamma: 0.002,
            gamma1: 0.009,
            epsilon: 0.4,
            mu: 2.0e-4,
            alpha: 0.8,
        }
    }

    pub const DEFAULT_STEP: f64 = 0.1;

    pub fn baseline_quadratic() -> Problem {
        baseline(SocialCostModel::Quadratic { b: 0.04 })
    }

    pub fn baseline_exponential() -> Problem {
        baseline(SocialCostModel::Exponential { k: 0.03922 })
    }

    fn baseline(social_cost: SocialCostModel) -> Problem {
        Problem {
            params: baseline_params(),
            econ: EconomicParams {
                c1: 1.0,
                c2: 0.02,
                social_cost,
            },
            bounds: ControlBounds {
                u0_max: 1.0,
                u1_max: 0.006,
            },
            grid: TimeGrid::with_step(360.0, DEFAULT_STEP).expect("valid grid"),
            x0: SvirState {
                s: 0.84,
                v: 0.0,
                i: 0.04,
                r: 0.12,
            },
        }
    }

    /// The initial state is inferred from the benchmark costs: `I(0) = 0.1`
    /// reproduces the full-control infection cost in closed form and
    /// `S(0) = 0.85` the no-control total.
    pub fn endemic() -> Problem {
        Problem {
            params: endemic_params(),
            econ: EconomicParams {
                c1: 0.1,
                c2: 1.0,
                social_cost: SocialCostModel::Quadratic { b: 0.12 },
            },
            bounds: ControlBounds {
                u0_max: 1.0,
                u1_max: 0.8,
            },
            grid: TimeGrid::with_step(720.0, DEFAULT_STEP).expect("valid grid"),
            x0: SvirState {
                s: 0.85,
                v: 0.0,
                i: 0.1,
                r: 0.05,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// `u = (0, 0)`
    #[serde(rename = "none")]
    NoControlNoVax,
    /// `u = (0, u1_max)`
    #[serde(rename = "vax")]
    VaxOnly,
    /// `u = (u0_max, u1_max)`
    #[serde(rename = "full")]
    FullControl,
    /// Forward-backward sweep solution.
    #[serde(rename = "optimal")]
    Optimal,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::NoControlNoVax,
        Strategy::VaxOnly,
        Strategy::FullControl,
        Strategy::Optimal,
    ];

    pub fn short_name(&self) -> &'static str {
        match self {
            Strategy::NoControlNoVax => "none",
            Strategy::VaxOnly => "vax",
            Strategy::FullControl => "full",
            Strategy::Optimal => "optimal",
        }
    }

    pub fn constant_control(&self, bounds: &ControlBounds) -> Option<Control> {
        match self {
            Strategy::NoControlNoVax => Some(Control::ZERO),
            Strategy::VaxOnly => Some(Control::new(0.0, bounds.u1_max)),
            Strategy::FullControl => Some(bounds.full()),
            Strategy::Optimal => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.short_name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "strategy",
                    format!("unknown strategy `{s}`, expected none|vax|full|optimal"),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub strategy: Strategy,
    pub controls: ControlPath,
    pub trajectory: Trajectory,
    pub cost: CostBreakdown,
    pub final_state: SvirState,
    pub r0: f64,
    /// Present for [`Strategy::Optimal`].
    pub fbs: Option<FbsReport>,
}

pub fn run_strategy(
    strategy: Strategy,
    problem: &Problem,
    cfg: &FbsConfig,
) -> Result<ScenarioResult> {
    problem.validate()?;
    let (controls, trajectory, cost, fbs) = match strategy.constant_control(&problem.bounds) {
        Some(u) => {
            let controls = ControlPath::constant(problem.grid, problem.bounds, u)?;
            let trajectory = simulate(&problem.params, &problem.x0, &controls)?;
            let cost = cost_functional(&trajectory, &controls, &problem.econ)?;
            (controls, trajectory, cost, None)
        }
        None => {
            let report = problem.solve(cfg)?;
            (
                report.best_controls.clone(),
                report.best_trajectory.clone(),
                report.best_cost,
                Some(report),
            )
        }
    };
    Ok(ScenarioResult {
        strategy,
        final_state: trajectory.final_state(),
        controls,
        trajectory,
        cost,
        r0: problem.r0(),
        fbs,
    })
}

/// All four strategies, in the order none, vax, full, optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub rows: Vec<ScenarioResult>,
}

impl CostTable {
    pub fn row(&self, strategy: Strategy) -> &ScenarioResult {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy)
            .expect("table holds every strategy")
    }
}

pub fn cost_table(problem: &Problem, cfg: &FbsConfig) -> Result<CostTable> {
    let rows = Strategy::ALL
        .par_iter()
        .map(|s| run_strategy(*s, problem, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(CostTable { rows })
}

/// Problem parameters that a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    C1,
    C2,
    B,
    K,
    U0Max,
    U1Max,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::C1 => "c1",
            SweepParam::C2 => "c2",
            SweepParam::B => "b",
            SweepParam::K => "k",
            SweepParam::U0Max => "u0_max",
            SweepParam::U1Max => "u1_max",
        }
    }

    /// Copy of `base` with this parameter set to `value`, validated.
    pub fn apply(&self, base: &Problem, value: f64) -> Result<Problem> {
        let mut p = base.clone();
        match (self, &mut p.econ.social_cost) {
            (SweepParam::C1, _) => p.econ.c1 = value,
            (SweepParam::C2, _) => p.econ.c2 = value,
            (SweepParam::B, SocialCostModel::Quadratic { b }) => *b = value,
            (SweepParam::K, SocialCostModel::Exponential { k }) => *k = value,
            (SweepParam::U0Max, _) => p.bounds.u0_max = value,
            (SweepParam::U1Max, _) => p.bounds.u1_max = value,
            (param, model) => {
                return Err(Error::invalid(
                    "sweep.param",
                    format!(
                        "`{}` does not apply to the {} social cost",
                        param.name(),
                        model.name()
                    ),
                ))
            }
        }
        p.validate()?;
        Ok(p)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepParam::C1,
            SweepParam::C2,
            SweepParam::B,
            SweepParam::K,
            SweepParam::U0Max,
            SweepParam::U1Max,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| {
            Error::invalid(
                "sweep.param",
                format!("unknown parameter `{s}`, expected one of c1, c2, b, k, u0_max, u1_max"),
            )
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<FbsReport>,
}

/// Independent solves per value, in input order. A failing value does not abort the others.
pub fn sweep(
    param: SweepParam,
    values: &[f64],
    base: &Problem,
    cfg: &FbsConfig,
) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            outcome: param.apply(base, value).and_then(|p| p.solve(cfg)),
        })
        .collect()
}
