//! Forward-backward sweep for the two-control SVIR problem.
//!
//! Each iteration integrates the state forward under the current control,
//! the costate backward, evaluates the pointwise optimal control, and
//! blends it with the current one:
//!
//! ```text
//! u_{n+1} = (1 - c^n) * u_new + c^n * u_n
//! ```
//!
//! The sweep stops on the first increase of the cost functional, on a
//! relative change below `rel_tol`, or at `max_iterations`. The best
//! iterate seen is returned, not the last.

use serde::{Deserialize, Serialize};

use crate::adjoint::{cost_functional, solve_costate, CostBreakdown};
use crate::control::{optimal_control, EconomicParams};
use crate::error::{Error, NumericalFailure, Result};
use crate::integrate::{rk4_forward, ControlPath, CostatePath, TimeGrid, Trajectory};
use crate::model::{svir_field, Control, ControlBounds, EpidemicParams, SvirState};

/// Starting control of the sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    /// Both controls at their upper bounds.
    Full,
    Path(ControlPath),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbsConfig {
    pub smoothing_c: f64,
    pub max_iterations: usize,
    pub initial: InitialGuess,
    pub rel_tol: f64,
}

impl Default for FbsConfig {
    fn default() -> Self {
        FbsConfig {
            smoothing_c: 0.99,
            max_iterations: 500,
            initial: InitialGuess::Zero,
            rel_tol: 1e-9,
        }
    }
}

impl FbsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.smoothing_c) {
            return Err(Error::invalid(
                "fbs.smoothing_c",
                format!("must lie in [0, 1), got {}", self.smoothing_c),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("fbs.max_iterations", "must be positive"));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(Error::invalid(
                "fbs.rel_tol",
                format!("must be nonnegative, got {}", self.rel_tol),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The last iterate cost more than its predecessor.
    CostIncrease,
    /// Relative change of the cost fell below `rel_tol`.
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbsReport {
    /// Number of control updates performed.
    pub iterations_run: usize,
    /// Cost of the initial guess followed by the cost after each update.
    pub cost_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub best_iteration: usize,
    pub best_controls: ControlPath,
    pub best_trajectory: Trajectory,
    pub best_costate: CostatePath,
    pub best_cost: CostBreakdown,
}

/// Forward state solve under a control path.
pub fn simulate(p: &EpidemicParams, x0: &SvirState, controls: &ControlPath) -> Result<Trajectory> {
    rk4_forward(|x, u| svir_field(x, u, p), x0, controls)
}

fn initial_path(cfg: &FbsConfig, grid: TimeGrid, bounds: ControlBounds) -> Result<ControlPath> {
    match &cfg.initial {
        InitialGuess::Zero => ControlPath::constant(grid, bounds, Control::ZERO),
        InitialGuess::Full => ControlPath::constant(grid, bounds, bounds.full()),
        InitialGuess::Path(path) => {
            if *path.grid() != grid || *path.bounds() != bounds {
                return Err(Error::precondition(
                    "initial control path does not match the problem grid and bounds",
                ));
            }
            Ok(path.clone())
        }
    }
}

fn tag_iteration(err: Error, iteration: usize) -> Error {
    match err {
        Error::Numerical(f) => Error::Numerical(f.at_iteration(iteration)),
        other => other,
    }
}

pub fn fbs_solve(
    p: &EpidemicParams,
    econ: &EconomicParams,
    bounds: &ControlBounds,
    grid: &TimeGrid,
    x0: &SvirState,
    cfg: &FbsConfig,
) -> Result<FbsReport> {
    p.validate()?;
    econ.validate()?;
    bounds.validate()?;
    x0.validate()?;
    cfg.validate()?;

    let mut controls = initial_path(cfg, *grid, *bounds)?;
    let mut traj = simulate(p, x0, &controls).map_err(|e| tag_iteration(e, 0))?;
    let mut cost = cost_functional(&traj, &controls, econ)?;
    if !cost.total.is_finite() {
        return Err(NumericalFailure::NonFiniteCost { iteration: 0 }.into());
    }

    let mut trace = vec![cost.total];
    let mut best = (0, controls.clone(), traj.clone(), cost);
    let mut stop_reason = StopReason::MaxIterations;
    let mut iterations_run = 0;
    // c^0 = 1 leaves the control unchanged, so the first effective update uses c^1
    let mut weight = 1.0;

    for n in 1..=cfg.max_iterations {
        let costate = solve_costate(&traj, &controls, p, econ).map_err(|e| tag_iteration(e, n))?;
        weight *= cfg.smoothing_c;
        let samples: Vec<Control> = controls
            .samples()
            .iter()
            .zip(&traj.states)
            .zip(&costate.samples)
            .map(|((u_old, x), lam)| {
                let u_new = optimal_control(x, lam, p, econ, bounds);
                bounds.clamp(u_new.lerp(*u_old, weight))
            })
            .collect();
        controls = ControlPath::new(*grid, *bounds, samples)?;
        traj = simulate(p, x0, &controls).map_err(|e| tag_iteration(e, n))?;
        let next = cost_functional(&traj, &controls, econ)?;
        if !next.total.is_finite() {
            return Err(NumericalFailure::NonFiniteCost { iteration: n }.into());
        }
        iterations_run = n;
        trace.push(next.total);
        if next.total < best.3.total {
            best = (n, controls.clone(), traj.clone(), next);
        }

        let prev = cost.total;
        cost = next;
        if next.total > prev {
            stop_reason = StopReason::CostIncrease;
            break;
        }
        if (next.total - prev).abs() / prev.abs().max(1.0) < cfg.rel_tol {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let (best_iteration, best_controls, best_trajectory, best_cost) = best;
    let best_costate = solve_costate(&best_trajectory, &best_controls, p, econ)?;
    Ok(FbsReport {
        iterations_run,
        cost_trace: trace,
        stop_reason,
        best_iteration,
        best_controls,
        best_trajectory,
        best_costate,
        best_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::SocialCostModel;
    use crate::scenarios::presets;

    fn short_problem(
        c1: f64,
    ) -> (
        EpidemicParams,
        EconomicParams,
        ControlBounds,
        TimeGrid,
        SvirState,
    ) {
        let p = presets::baseline_params();
        let econ = EconomicParams {
            c1,
            c2: 0.02,
            social_cost: SocialCostModel::Quadratic { b: 0.04 },
        };
        let bounds = ControlBounds::new(1.0, 0.006).unwrap();
        let grid = TimeGrid::new(60.0, 300).unwrap();
        let x0 = SvirState::new(0.84, 0.0, 0.04, 0.12).unwrap();
        (p, econ, bounds, grid, x0)
    }

    #[test]
    fn config_validation() {
        let bad = FbsConfig {
            smoothing_c: 1.0,
            ..FbsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = FbsConfig {
            max_iterations: 0,
            ..FbsConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_infection_cost_drives_controls_to_zero() {
        for social_cost in [
            SocialCostModel::Quadratic { b: 0.04 },
            SocialCostModel::Exponential { k: 0.03922 },
        ] {
            let (p, mut econ, bounds, grid, x0) = short_problem(1.0);
            // c1 must be positive for validation; a vanishing weight exercises the limit
            econ.c1 = 1e-300;
            econ.social_cost = social_cost;
            let report = fbs_solve(&p, &econ, &bounds, &grid, &x0, &FbsConfig::default()).unwrap();
            assert!(report.best_cost.total < 1e-10, "{:?}", report.best_cost);
            assert!(report
                .best_controls
                .samples()
                .iter()
                .all(|u| u.u0 < 1e-6 && u.u1 < 1e-6));
        }
    }

    #[test]
    fn trace_decreases_until_witness() {
        let (p, econ, bounds, grid, x0) = short_problem(1.0);
        let report = fbs_solve(&p, &econ, &bounds, &grid, &x0, &FbsConfig::default()).unwrap();
        let t = &report.cost_trace;
        let upto = if report.stop_reason == StopReason::CostIncrease {
            t.len() - 1
        } else {
            t.len()
        };
        assert!(t[..upto].windows(2).all(|w| w[1] < w[0]));
        let min = t.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(report.best_cost.total, min);
        assert_eq!(
            report.best_costate.samples.last().unwrap(),
            &crate::adjoint::Costate::ZERO
        );
    }

    #[test]
    fn mismatched_initial_path_is_rejected() {
        let (p, econ, bounds, grid, x0) = short_problem(1.0);
        let other = TimeGrid::new(60.0, 100).unwrap();
        let cfg = FbsConfig {
            initial: InitialGuess::Path(
                ControlPath::constant(other, bounds, Control::ZERO).unwrap(),
            ),
            ..FbsConfig::default()
        };
        assert!(matches!(
            fbs_solve(&p, &econ, &bounds, &grid, &x0, &cfg),
            Err(Error::Precondition(_))
        ));
    }
}
