//! Running cost, Hamiltonian, costate dynamics and the cost functional.
//!
//! The costate equations are the negative state-gradient of the
//! Hamiltonian, with zero terminal values since the objective has no
//! terminal term.

use serde::{Deserialize, Serialize};

use crate::control::{switching_k, transmission_rate, EconomicParams};
use crate::error::{Error, Result};
use crate::integrate::{rk4_backward, trapezoid, ControlPath, CostatePath, Trajectory};
use crate::model::{svir_field, Control, EpidemicParams, SvirState};

/// Shadow prices of S, V and I.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Costate {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl Costate {
    pub const ZERO: Costate = Costate {
        l1: 0.0,
        l2: 0.0,
        l3: 0.0,
    };

    pub fn new(l1: f64, l2: f64, l3: f64) -> Self {
        Costate { l1, l2, l3 }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Costate::new(a[0], a[1], a[2])
    }
}

/// Objective split into its three running-cost terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub social: f64,
    pub infection: f64,
    pub vaccination: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(social: f64, infection: f64, vaccination: f64) -> Self {
        CostBreakdown {
            social,
            infection,
            vaccination,
            total: social + infection + vaccination,
        }
    }

    /// Shares of `[social, infection, vaccination]` in percent of the total.
    pub fn percentages(&self) -> [f64; 3] {
        if self.total == 0.0 {
            return [0.0; 3];
        }
        [self.social, self.infection, self.vaccination].map(|c| 100.0 * c / self.total)
    }
}

pub fn running_cost(x: &SvirState, u: Control, econ: &EconomicParams) -> f64 {
    econ.social_cost.cost(u.u0) + econ.c1 * x.i + econ.c2 * u.u1 * u.u1 * x.s
}

pub fn hamiltonian(
    x: &SvirState,
    lambda: &Costate,
    u: Control,
    p: &EpidemicParams,
    econ: &EconomicParams,
) -> f64 {
    let d = svir_field(x, u, p);
    running_cost(x, u, econ) + lambda.l1 * d.ds + lambda.l2 * d.dv + lambda.l3 * d.di
}

/// `(dH/du0, dH/du1)` at the given point.
pub fn hamiltonian_control_gradient(
    x: &SvirState,
    lambda: &Costate,
    u: Control,
    p: &EpidemicParams,
    econ: &EconomicParams,
) -> Control {
    let du0 = econ.social_cost.derivative(u.u0) - p.beta0 * x.i * switching_k(x, lambda, p.epsilon);
    let du1 = x.s * (2.0 * econ.c2 * u.u1 - lambda.l1 + lambda.l2);
    Control::new(du0, du1)
}

/// Costate derivative `-(dH/dS, dH/dV, dH/dI)`.
pub fn costate_rhs(
    x: &SvirState,
    lambda: &Costate,
    u: Control,
    p: &EpidemicParams,
    econ: &EconomicParams,
) -> Costate {
    let beta = transmission_rate(p.beta0, u.u0);
    let beta_v = p.epsilon * beta;
    let Costate { l1, l2, l3 } = *lambda;
    Costate {
        l1: (beta * x.i + u.u1 + p.mu) * l1 - u.u1 * l2 - beta * x.i * l3 - econ.c2 * u.u1 * u.u1,
        l2: (beta_v * x.i + p.gamma1 + p.mu) * l2 - beta_v * x.i * l3,
        l3: beta * x.s * l1 + beta_v * x.v * l2
            - (beta * x.s + beta_v * x.v - p.gamma - p.mu) * l3
            - econ.c1,
    }
}

/// Costate path for a given trajectory and control, from zero terminal values.
pub fn solve_costate(
    traj: &Trajectory,
    controls: &ControlPath,
    p: &EpidemicParams,
    econ: &EconomicParams,
) -> Result<CostatePath> {
    rk4_backward(
        |x, l, u| costate_rhs(x, l, u, p, econ),
        Costate::ZERO,
        traj,
        controls,
    )
}

/// Trapezoid evaluation of the objective and its three components.
pub fn cost_functional(
    traj: &Trajectory,
    controls: &ControlPath,
    econ: &EconomicParams,
) -> Result<CostBreakdown> {
    let grid = &traj.grid;
    if grid != controls.grid() || traj.states.len() != grid.n_nodes() {
        return Err(Error::precondition(
            "trajectory and controls are on different grids",
        ));
    }
    let us = controls.samples();
    let social: Vec<f64> = us.iter().map(|u| econ.social_cost.cost(u.u0)).collect();
    let infection: Vec<f64> = traj.states.iter().map(|x| econ.c1 * x.i).collect();
    let vaccination: Vec<f64> = traj
        .states
        .iter()
        .zip(us)
        .map(|(x, u)| econ.c2 * u.u1 * u.u1 * x.s)
        .collect();
    Ok(CostBreakdown::new(
        trapezoid(grid, &social)?,
        trapezoid(grid, &infection)?,
        trapezoid(grid, &vaccination)?,
    ))
}

/// Adjoint estimate of `dJ/du_k` for every control node `k`.
///
/// Each node carries the trapezoid weight of its hat function, so the
/// estimate is `w_k * dH/du(t_k)`.
pub fn cost_gradient(
    traj: &Trajectory,
    costate: &CostatePath,
    controls: &ControlPath,
    p: &EpidemicParams,
    econ: &EconomicParams,
) -> Result<Vec<Control>> {
    let grid = &traj.grid;
    if grid != controls.grid() || grid != &costate.grid {
        return Err(Error::precondition(
            "gradient inputs are on different grids",
        ));
    }
    let h = grid.step();
    let last = grid.n_steps();
    Ok((0..grid.n_nodes())
        .map(|k| {
            let w = if k == 0 || k == last { 0.5 * h } else { h };
            let g = hamiltonian_control_gradient(
                &traj.states[k],
                &costate.samples[k],
                controls.samples()[k],
                p,
                econ,
            );
            Control::new(w * g.u0, w * g.u1)
        })
        .collect())
}
