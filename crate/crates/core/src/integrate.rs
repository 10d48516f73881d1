//! Fixed-step classical RK4 on a uniform grid, forward for the state and
//! backward for the costate, plus composite trapezoidal quadrature.
//!
//! State, costate, control and quadrature all live on the same
//! [`TimeGrid`]. Controls are linearly interpolated between nodes, so the
//! RK4 half-step evaluations see the midpoint average of adjacent samples.

use serde::{Deserialize, Serialize};

use crate::adjoint::Costate;
use crate::error::{Error, NumericalFailure, Result};
use crate::model::{Control, ControlBounds, StateDerivative, SvirState, STATE_TOLERANCE};

/// Uniform grid `t_i = i * t_end / n_steps`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::invalid(
                "grid.t_end",
                format!("must be positive, got {t_end}"),
            ));
        }
        if n_steps < 2 {
            return Err(Error::invalid(
                "grid.n_steps",
                format!("need at least 2 steps, got {n_steps}"),
            ));
        }
        Ok(TimeGrid { t_end, n_steps })
    }

    /// Grid with step as close as possible to `step`; the horizon is kept exact.
    pub fn with_step(t_end: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(
                "grid.step",
                format!("must be positive, got {step}"),
            ));
        }
        let n = (t_end / step).round();
        if !(n.is_finite() && n >= 2.0) {
            return Err(Error::invalid(
                "grid.step",
                format!("step {step} gives fewer than 2 steps over {t_end}"),
            ));
        }
        Self::new(t_end, n as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_end
        } else {
            i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|i| self.node(i))
    }
}

/// State at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<SvirState>,
}

impl Trajectory {
    pub fn final_state(&self) -> SvirState {
        *self
            .states
            .last()
            .expect("trajectory has at least one node")
    }

    /// Largest deviation of `S + V + I + R` from one over all nodes.
    pub fn max_conservation_error(&self) -> f64 {
        self.states
            .iter()
            .map(|x| (x.total() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_compartment(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|x| x.to_array())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Control samples, one per grid node, all inside `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    grid: TimeGrid,
    bounds: ControlBounds,
    samples: Vec<Control>,
}

impl ControlPath {
    pub fn new(grid: TimeGrid, bounds: ControlBounds, samples: Vec<Control>) -> Result<Self> {
        if samples.len() != grid.n_nodes() {
            return Err(Error::precondition(format!(
                "control path has {} samples for {} nodes",
                samples.len(),
                grid.n_nodes()
            )));
        }
        if let Some((i, u)) = samples
            .iter()
            .enumerate()
            .find(|(_, u)| !bounds.contains(**u))
        {
            return Err(Error::precondition(format!(
                "control sample {i} = ({}, {}) outside bounds",
                u.u0, u.u1
            )));
        }
        Ok(ControlPath {
            grid,
            bounds,
            samples,
        })
    }

    pub fn constant(grid: TimeGrid, bounds: ControlBounds, u: Control) -> Result<Self> {
        Self::new(grid, bounds, vec![u; grid.n_nodes()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn bounds(&self) -> &ControlBounds {
        &self.bounds
    }

    pub fn samples(&self) -> &[Control] {
        &self.samples
    }

    /// Fraction of nodes where `u1` sits at its upper bound, within a relative `tol`.
    pub fn fraction_u1_at_bound(&self, tol: f64) -> f64 {
        let cut = self.bounds.u1_max * (1.0 - tol);
        let pinned = self.samples.iter().filter(|u| u.u1 >= cut).count();
        pinned as f64 / self.samples.len() as f64
    }

    // midpoint of the linear interpolant on step i
    fn midpoint(&self, i: usize) -> Control {
        self.samples[i].lerp(self.samples[i + 1], 0.5)
    }
}

/// Linear interpolation of the control path at time `t`, clamped to the bounds.
pub fn interp_control(path: &ControlPath, t: f64) -> Result<Control> {
    let grid = path.grid;
    if !(0.0..=grid.t_end).contains(&t) {
        return Err(Error::precondition(format!(
            "t = {t} outside [0, {}]",
            grid.t_end
        )));
    }
    let h = grid.step();
    let pos = t / h;
    let i = (pos.floor() as usize).min(grid.n_steps - 1);
    let frac = pos - i as f64;
    let u = if frac <= 0.0 {
        path.samples[i]
    } else if frac >= 1.0 {
        path.samples[i + 1]
    } else {
        path.samples[i].lerp(path.samples[i + 1], frac)
    };
    Ok(path.bounds.clamp(u))
}

/// Where within a step an RK4 stage evaluates the vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Start,
    Mid,
    End,
}

/// One classical RK4 step with the vector field indexed by stage. `h` may be negative.
pub fn rk4_staged<const N: usize, F>(f: F, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(Stage, &[f64; N]) -> [f64; N],
{
    let shift = |k: &[f64; N], a: f64| -> [f64; N] { std::array::from_fn(|j| y[j] + a * k[j]) };
    let k1 = f(Stage::Start, y);
    let k2 = f(Stage::Mid, &shift(&k1, 0.5 * h));
    let k3 = f(Stage::Mid, &shift(&k2, 0.5 * h));
    let k4 = f(Stage::End, &shift(&k3, h));
    std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
}

/// One classical RK4 step of `y' = f(t, y)`. A negative `h` steps backward.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    rk4_staged(
        |stage, y| {
            let at = match stage {
                Stage::Start => t,
                Stage::Mid => t + 0.5 * h,
                Stage::End => t + h,
            };
            f(at, y)
        },
        y,
        h,
    )
}

/// Integrates `y' = f(t, y)` over the grid from `y(0) = y0`, returning every node.
pub fn integrate_forward<const N: usize, F>(f: F, y0: [f64; N], grid: &TimeGrid) -> Vec<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = grid.step();
    let mut out = Vec::with_capacity(grid.n_nodes());
    out.push(y0);
    for i in 0..grid.n_steps {
        let next = rk4_step(&f, grid.node(i), &out[i], h);
        out.push(next);
    }
    out
}

/// Integrates `y' = f(t, y)` from `y(T) = y_end` down to `t = 0`, returning every node.
pub fn integrate_backward<const N: usize, F>(
    f: F,
    y_end: [f64; N],
    grid: &TimeGrid,
) -> Vec<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = grid.step();
    let mut out = vec![[0.0; N]; grid.n_nodes()];
    out[grid.n_steps] = y_end;
    for i in (1..=grid.n_steps).rev() {
        out[i - 1] = rk4_step(&f, grid.node(i), &out[i], -h);
    }
    out
}

/// Forward RK4 of the state under a control path.
///
/// Compartments in `(-1e-9, 0)` after a step are set to zero; anything
/// lower aborts with the offending node.
pub fn rk4_forward<F>(rhs: F, x0: &SvirState, controls: &ControlPath) -> Result<Trajectory>
where
    F: Fn(&SvirState, Control) -> StateDerivative,
{
    let grid = controls.grid;
    let h = grid.step();
    let mut states = Vec::with_capacity(grid.n_nodes());
    states.push(*x0);
    for i in 0..grid.n_steps {
        let f = |stage: Stage, y: &[f64; 4]| {
            let u = match stage {
                Stage::Start => controls.samples[i],
                Stage::Mid => controls.midpoint(i),
                Stage::End => controls.samples[i + 1],
            };
            rhs(&SvirState::from_array(*y), u).to_array()
        };
        let mut next = rk4_staged(f, &states[i].to_array(), h);
        for (c, value) in next.iter_mut().enumerate() {
            if !value.is_finite() {
                return Err(NumericalFailure::NonFinite { node: i + 1 }.into());
            }
            if *value < 0.0 {
                if *value > -STATE_TOLERANCE {
                    *value = 0.0;
                } else {
                    return Err(NumericalFailure::NegativeCompartment {
                        node: i + 1,
                        compartment: SvirState::LABELS[c],
                        value: *value,
                    }
                    .into());
                }
            }
        }
        states.push(SvirState::from_array(next));
    }
    Ok(Trajectory { grid, states })
}

/// Costate samples at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct CostatePath {
    pub grid: TimeGrid,
    pub samples: Vec<Costate>,
}

/// Backward RK4 of the costate from `terminal` at `T` down to `0`.
///
/// The stage at `t_i - h/2` uses the average of the adjacent state and
/// control samples.
pub fn rk4_backward<F>(
    adjoint_rhs: F,
    terminal: Costate,
    traj: &Trajectory,
    controls: &ControlPath,
) -> Result<CostatePath>
where
    F: Fn(&SvirState, &Costate, Control) -> Costate,
{
    let grid = traj.grid;
    if grid != controls.grid || traj.states.len() != grid.n_nodes() {
        return Err(Error::precondition(
            "trajectory and controls are on different grids",
        ));
    }
    let h = grid.step();
    let mut samples = vec![terminal; grid.n_nodes()];
    for i in (1..=grid.n_steps).rev() {
        let (x_hi, x_lo) = (traj.states[i].to_array(), traj.states[i - 1].to_array());
        let x_mid = SvirState::from_array(std::array::from_fn(|j| 0.5 * (x_hi[j] + x_lo[j])));
        let f = |stage: Stage, y: &[f64; 3]| {
            let (x, u) = match stage {
                Stage::Start => (traj.states[i], controls.samples[i]),
                Stage::Mid => (x_mid, controls.midpoint(i - 1)),
                Stage::End => (traj.states[i - 1], controls.samples[i - 1]),
            };
            adjoint_rhs(&x, &Costate::from_array(*y), u).to_array()
        };
        let prev = rk4_staged(f, &samples[i].to_array(), -h);
        if prev.iter().any(|v| !v.is_finite()) {
            return Err(NumericalFailure::NonFinite { node: i - 1 }.into());
        }
        samples[i - 1] = Costate::from_array(prev);
    }
    Ok(CostatePath { grid, samples })
}

/// Composite trapezoid rule over the grid.
pub fn trapezoid(grid: &TimeGrid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.n_nodes() {
        return Err(Error::precondition(format!(
            "{} values for {} grid nodes",
            values.len(),
            grid.n_nodes()
        )));
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    let ends = 0.5 * (values[0] + values[values.len() - 1]);
    Ok(grid.step() * (inner + ends))
}
