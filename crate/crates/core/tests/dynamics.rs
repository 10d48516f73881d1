mod common;

use svir_core::adjoint::{costate_rhs, solve_costate, Costate};
use svir_core::fbs::simulate;
use svir_core::integrate::{rk4_staged, ControlPath, Stage, TimeGrid};
use svir_core::model::{endemic_equilibrium, Control};
use svir_core::scenarios::{presets, Strategy};

#[test]
fn strategies_conserve_population_and_stay_nonnegative() {
    for problem in [presets::baseline_quadratic(), presets::endemic()] {
        for strategy in Strategy::ALL {
            let Some(u) = strategy.constant_control(&problem.bounds) else {
                continue;
            };
            let controls = ControlPath::constant(problem.grid, problem.bounds, u).unwrap();
            let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
            assert!(traj.max_conservation_error() < 1e-12, "{strategy}");
            assert!(traj.min_compartment() >= 0.0, "{strategy}");
        }
    }
}

#[test]
fn uncontrolled_baseline_has_a_single_outbreak() {
    let problem = presets::baseline_quadratic();
    let controls = ControlPath::constant(problem.grid, problem.bounds, Control::ZERO).unwrap();
    let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
    let infected: Vec<f64> = traj.states.iter().map(|x| x.i).collect();
    let (peak, &peak_value) = infected
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    // beta0 * S(0) / (gamma + mu) > 1, so I grows before it burns out
    assert!(peak > 0 && peak_value > problem.x0.i);
    assert!(infected[..=peak].windows(2).all(|w| w[1] >= w[0]));
    assert!(infected[peak..].windows(2).all(|w| w[1] <= w[0]));
    assert!(traj.final_state().i < 1e-6);
}

#[test]
fn endemic_trajectory_settles_on_endemic_equilibrium() {
    let problem = presets::endemic();
    let grid = TimeGrid::with_step(14_400.0, 0.1).unwrap();
    // constant vaccination at the rate alpha is the uncontrolled model
    let u = Control::new(0.0, problem.params.alpha);
    let controls = ControlPath::constant(grid, problem.bounds, u).unwrap();
    let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
    let ee = endemic_equilibrium(&problem.params)
        .unwrap()
        .expect("R0 > 1");
    let end = traj.final_state();
    for (a, b) in end.to_array().iter().zip(ee.to_array()) {
        assert!((a - b).abs() < 1e-6, "{end:?} vs {ee:?}");
    }
}

fn reversal_residual(t_end: f64) -> f64 {
    let mut problem = presets::baseline_quadratic();
    problem.grid = TimeGrid::with_step(t_end, 0.1).unwrap();
    let controls = common::wobbly_controls(&problem);
    let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
    let costate = solve_costate(&traj, &controls, &problem.params, &problem.econ).unwrap();

    // forward RK4 from lambda(0) through the same stage samples
    let h = problem.grid.step();
    let mut lam = costate.samples[0].to_array();
    for i in 0..problem.grid.n_steps() {
        let (lo, hi) = (traj.states[i], traj.states[i + 1]);
        let mid = svir_core::model::SvirState {
            s: 0.5 * (lo.s + hi.s),
            v: 0.5 * (lo.v + hi.v),
            i: 0.5 * (lo.i + hi.i),
            r: 0.5 * (lo.r + hi.r),
        };
        let (u_lo, u_hi) = (controls.samples()[i], controls.samples()[i + 1]);
        let f = |stage: Stage, y: &[f64; 3]| {
            let (x, u) = match stage {
                Stage::Start => (lo, u_lo),
                Stage::Mid => (mid, u_lo.lerp(u_hi, 0.5)),
                Stage::End => (hi, u_hi),
            };
            costate_rhs(
                &x,
                &Costate::from_array(*y),
                u,
                &problem.params,
                &problem.econ,
            )
            .to_array()
        };
        lam = rk4_staged(f, &lam, h);
    }
    lam.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[test]
fn costate_integration_is_reversible() {
    // the costate system expands forward in time (lambda2 grows like
    // exp((gamma1 + mu) t)), so the replay horizon is kept short enough that
    // the amplified truncation error stays well under the tolerance
    let residual = reversal_residual(120.0);
    assert!(residual < 1e-8, "{residual:e}");
}

#[test]
fn perfect_vaccine_decouples_vaccinated_costate() {
    let mut problem = presets::baseline_quadratic();
    problem.params.epsilon = 0.0;
    let controls = common::wobbly_controls(&problem);
    let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
    let costate = solve_costate(&traj, &controls, &problem.params, &problem.econ).unwrap();
    assert!(costate.samples.iter().all(|l| l.l2 == 0.0));
    assert!(costate.samples[0].l3 > 0.0);
}

#[test]
fn adjoint_gradient_matches_finite_differences() {
    let problem = presets::baseline_quadratic();
    let controls = common::wobbly_controls(&problem);
    let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
    let costate = solve_costate(&traj, &controls, &problem.params, &problem.econ).unwrap();
    let nodes = common::random_nodes(problem.grid.n_nodes(), 10, 7);
    for s in common::gradient_check(&problem, &controls, &traj, &costate, &nodes, 1e-6) {
        assert!(s.rel_error() <= 1e-3, "{s:?}");
    }
}

#[test]
fn extra_infected_costate_term_breaks_the_gradient() {
    let problem = presets::baseline_quadratic();
    let controls = common::wobbly_controls(&problem);
    let traj = simulate(&problem.params, &problem.x0, &controls).unwrap();
    let costate = common::costate_with_extra_term(&problem, &traj, &controls);
    let nodes = common::random_nodes(problem.grid.n_nodes(), 20, 2024);
    let worst = common::gradient_check(&problem, &controls, &traj, &costate, &nodes, 1e-6)
        .iter()
        .map(|s| s.rel_error())
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "worst relative error {worst}");
}
