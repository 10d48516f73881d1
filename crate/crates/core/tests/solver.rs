use svir_core::control::{optimal_u0, switching_k, SocialCostModel};
use svir_core::fbs::{fbs_solve, FbsConfig, InitialGuess, StopReason};
use svir_core::scenarios::{cost_table, presets, sweep, Strategy, SweepParam};

const PINNED_TOL: f64 = 1e-3;

#[test]
fn repeated_solves_are_bit_identical() {
    let problem = presets::baseline_quadratic();
    let a = problem.solve(&FbsConfig::default()).unwrap();
    let b = problem.solve(&FbsConfig::default()).unwrap();
    assert_eq!(a, b);
    let ta = cost_table(&problem, &FbsConfig::default()).unwrap();
    let tb = cost_table(&problem, &FbsConfig::default()).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn optimal_strategy_beats_every_benchmark() {
    for problem in [
        presets::baseline_quadratic(),
        presets::baseline_exponential(),
        presets::endemic(),
    ] {
        let table = cost_table(&problem, &FbsConfig::default()).unwrap();
        let optimal = table.row(Strategy::Optimal).cost.total;
        for s in [
            Strategy::NoControlNoVax,
            Strategy::VaxOnly,
            Strategy::FullControl,
        ] {
            assert!(optimal < table.row(s).cost.total, "{s}: {optimal}");
        }
        let order: Vec<Strategy> = table.rows.iter().map(|r| r.strategy).collect();
        assert_eq!(order, Strategy::ALL);
        for row in &table.rows {
            let sum: f64 = row.cost.percentages().iter().sum();
            assert!((sum - 100.0).abs() < 0.01, "{}: {sum}", row.strategy);
        }
    }
}

#[test]
fn optimal_controls_stay_admissible() {
    let problem = presets::endemic();
    let report = problem.solve(&FbsConfig::default()).unwrap();
    assert!(report
        .best_controls
        .samples()
        .iter()
        .all(|u| problem.bounds.contains(*u)));
    assert!(report.best_trajectory.max_conservation_error() < 1e-9);
    assert!(report.best_trajectory.min_compartment() > -1e-9);
}

#[test]
fn starting_point_does_not_change_the_optimum() {
    let problem = presets::baseline_quadratic();
    let zero = problem.solve(&FbsConfig::default()).unwrap();
    let full = problem
        .solve(&FbsConfig {
            initial: InitialGuess::Full,
            ..FbsConfig::default()
        })
        .unwrap();
    let rel = (zero.best_cost.total - full.best_cost.total).abs() / zero.best_cost.total;
    assert!(
        rel < 0.01,
        "{} vs {}",
        zero.best_cost.total,
        full.best_cost.total
    );
}

#[test]
fn warm_start_from_optimum_does_not_regress() {
    let problem = presets::baseline_quadratic();
    let first = problem.solve(&FbsConfig::default()).unwrap();
    let cfg = FbsConfig {
        initial: InitialGuess::Path(first.best_controls.clone()),
        ..FbsConfig::default()
    };
    let again = problem.solve(&cfg).unwrap();
    assert_eq!(again.cost_trace[0], first.best_cost.total);
    assert!(again.best_cost.total <= first.best_cost.total);
}

#[test]
fn iteration_budget_is_respected() {
    let problem = presets::baseline_quadratic();
    let cfg = FbsConfig {
        max_iterations: 3,
        ..FbsConfig::default()
    };
    let report = problem.solve(&cfg).unwrap();
    assert_eq!(report.stop_reason, StopReason::MaxIterations);
    assert_eq!(report.iterations_run, 3);
    assert_eq!(report.cost_trace.len(), 4);
}

#[test]
fn cheaper_vaccination_saturates_more_often() {
    let base = presets::baseline_quadratic();
    let points = sweep(
        SweepParam::C2,
        &[0.2, 0.02, 0.002],
        &base,
        &FbsConfig::default(),
    );
    let pinned: Vec<f64> = points
        .iter()
        .map(|p| {
            p.outcome
                .as_ref()
                .unwrap()
                .best_controls
                .fraction_u1_at_bound(PINNED_TOL)
        })
        .collect();
    assert!(pinned.windows(2).all(|w| w[1] >= w[0]), "{pinned:?}");
    assert!(pinned[2] > pinned[0]);
}

#[test]
fn single_value_sweep_matches_direct_solve() {
    let base = presets::baseline_quadratic();
    let cfg = FbsConfig::default();
    let points = sweep(SweepParam::C2, &[0.05], &base, &cfg);
    let mut econ = base.econ;
    econ.c2 = 0.05;
    let direct = fbs_solve(
        &base.params,
        &econ,
        &base.bounds,
        &base.grid,
        &base.x0,
        &cfg,
    )
    .unwrap();
    assert_eq!(points[0].outcome.as_ref().unwrap(), &direct);
}

#[test]
fn extreme_social_cost_weights_reach_the_limits() {
    let base = presets::baseline_quadratic();
    let points = sweep(SweepParam::B, &[1e-8, 1e8], &base, &FbsConfig::default());

    let cheap = points[0].outcome.as_ref().unwrap();
    let model = SocialCostModel::Quadratic { b: 1e-8 };
    let x = &cheap.best_trajectory.states;
    let lam = &cheap.best_costate.samples;
    let p = &base.params;
    let mut active = 0;
    for k in 0..x.len() {
        let drive = p.beta0 * x[k].i * switching_k(&x[k], &lam[k], p.epsilon);
        // the interior value drive / (2b) exceeds the bound by a wide margin
        if drive > 1e-6 {
            active += 1;
            assert_eq!(
                optimal_u0(&model, &x[k], &lam[k], p, &base.bounds),
                base.bounds.u0_max
            );
        }
    }
    let pinned = cheap
        .best_controls
        .samples()
        .iter()
        .filter(|u| u.u0 >= 0.999)
        .count();
    assert!(active > 0);
    assert!(
        2 * pinned > x.len(),
        "{pinned} of {} nodes at the bound",
        x.len()
    );

    let dear = points[1].outcome.as_ref().unwrap();
    assert!(dear.best_controls.samples().iter().all(|u| u.u0 <= 1e-6));
}

#[test]
fn sweep_rejects_parameter_of_the_other_cost_model() {
    let base = presets::baseline_exponential();
    assert!(matches!(
        base.econ.social_cost,
        SocialCostModel::Exponential { .. }
    ));
    let points = sweep(SweepParam::B, &[0.1], &base, &FbsConfig::default());
    assert!(points[0].outcome.is_err());
}
