//! Test oracles shared by the integration and acceptance suites.

#![allow(dead_code)]

use rand::{rngs::StdRng, seq::index, SeedableRng};
use svir_core::adjoint::{cost_functional, cost_gradient, costate_rhs, running_cost, Costate};
use svir_core::fbs::simulate;
use svir_core::integrate::{rk4_backward, trapezoid, ControlPath, CostatePath, Trajectory};
use svir_core::model::Control;
use svir_core::scenarios::Problem;

/// A smooth interior control that is far from stationary on the baseline.
pub fn wobbly_controls(problem: &Problem) -> ControlPath {
    let samples = problem
        .grid
        .nodes()
        .map(|t| {
            Control::new(
                0.3 + 0.2 * (t / 40.0).sin(),
                0.003 + 0.001 * (t / 50.0).cos(),
            )
        })
        .collect();
    ControlPath::new(problem.grid, problem.bounds, samples).unwrap()
}

pub fn total_cost(problem: &Problem, controls: &ControlPath) -> f64 {
    let traj = simulate(&problem.params, &problem.x0, controls).unwrap();
    cost_functional(&traj, controls, &problem.econ)
        .unwrap()
        .total
}

pub fn random_nodes(n_nodes: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut nodes = index::sample(&mut rng, n_nodes, count).into_vec();
    nodes.sort_unstable();
    nodes
}

#[derive(Debug, Clone, Copy)]
pub struct GradientSample {
    pub node: usize,
    /// 0 for `u0`, 1 for `u1`
    pub component: usize,
    pub adjoint: f64,
    pub finite_difference: f64,
}

impl GradientSample {
    pub fn rel_error(&self) -> f64 {
        (self.adjoint - self.finite_difference).abs() / self.finite_difference.abs().max(1e-300)
    }
}

/// Central differences of the discrete objective against the adjoint gradient
/// built from `costate`, at the given nodes and for both controls.
pub fn gradient_check(
    problem: &Problem,
    controls: &ControlPath,
    traj: &Trajectory,
    costate: &CostatePath,
    nodes: &[usize],
    delta: f64,
) -> Vec<GradientSample> {
    let grad = cost_gradient(traj, costate, controls, &problem.params, &problem.econ).unwrap();
    let mut out = Vec::new();
    for &k in nodes {
        for component in 0..2 {
            let bumped = |d: f64| {
                let mut samples = controls.samples().to_vec();
                match component {
                    0 => samples[k].u0 += d,
                    _ => samples[k].u1 += d,
                }
                let path = ControlPath::new(problem.grid, problem.bounds, samples).unwrap();
                let traj = simulate(&problem.params, &problem.x0, &path).unwrap();
                (path, traj)
            };
            let (up, x_up) = bumped(delta);
            let (down, x_down) = bumped(-delta);
            // difference the running costs node by node before integrating, so
            // the O(delta) change is not lost against the O(1) total
            let diffs: Vec<f64> = (0..problem.grid.n_nodes())
                .map(|i| {
                    running_cost(&x_up.states[i], up.samples()[i], &problem.econ)
                        - running_cost(&x_down.states[i], down.samples()[i], &problem.econ)
                })
                .collect();
            let fd = trapezoid(&problem.grid, &diffs).unwrap() / (2.0 * delta);
            let adjoint = if component == 0 {
                grad[k].u0
            } else {
                grad[k].u1
            };
            out.push(GradientSample {
                node: k,
                component,
                adjoint,
                finite_difference: fd,
            });
        }
    }
    out
}

/// Costate under the adjoint system with the extra `-u1 * l2` term in the
/// infected equation, as an alternative to compare against.
pub fn costate_with_extra_term(
    problem: &Problem,
    traj: &Trajectory,
    controls: &ControlPath,
) -> CostatePath {
    rk4_backward(
        |x, l, u| {
            let mut d = costate_rhs(x, l, u, &problem.params, &problem.econ);
            d.l3 -= u.u1 * l.l2;
            d
        },
        Costate::ZERO,
        traj,
        controls,
    )
    .unwrap()
}
