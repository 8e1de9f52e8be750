use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use smoothcal::dynamics::{
    eps_nash_check, run_continuous_dynamic, run_exhaustive_search, run_smooth_calibrated_learning,
    tune_dynamic_parameters, ContinuousConfig, ContinuousGame, DynamicConfig, FiniteGame,
};
use smoothcal::geometry::nu;

/// Largest gain over a 1001-point grid of own mixed strategies in a 2×2 game.
fn grid_gap(game: &FiniteGame, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let own = game.expected_payoff(i, x);
        let mut best = f64::NEG_INFINITY;
        for k in 0..=1000 {
            let p = k as f64 / 1000.0;
            let mut y = x.to_vec();
            y[2 * i] = p;
            y[2 * i + 1] = 1.0 - p;
            best = best.max(game.expected_payoff(i, &y));
        }
        worst = worst.max(best - own);
    }
    worst
}

#[test]
fn nash_check_examples() {
    let pd = FiniteGame::prisoners_dilemma();
    assert!(eps_nash_check(&pd, &pd.embed(&[1, 1]), 0.0).unwrap().is_member);
    assert!(!eps_nash_check(&pd, &pd.embed(&[0, 0]), 0.0).unwrap().is_member);

    let mp = FiniteGame::matching_pennies();
    assert_eq!(eps_nash_check(&mp, &[0.5, 0.5, 0.5, 0.5], 0.0).unwrap().worst_gap, 0.0);
    let off = eps_nash_check(&mp, &[0.6, 0.4, 0.5, 0.5], 0.1).unwrap();
    assert_abs_diff_eq!(off.gaps[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(off.gaps[1], 0.2, epsilon = 1e-12);
    assert!(!off.is_member);
    assert!(eps_nash_check(&mp, &[0.5, 0.5, 0.5], 0.1).is_err());
}

#[test]
fn schedule_identities_and_closed_form() {
    let s = tune_dynamic_parameters(0.1, 2, 2, 1.0);
    let (e5, e3) = s.identity_errors();
    assert!(e5 <= 1e-12 && e3 <= 1e-12);
    assert_relative_eq!(s.eps5, 0.3, max_relative = 1e-12);
    let h = tune_dynamic_parameters(0.5, 2, 2, 1.0);
    assert_relative_eq!(h.l_g, nu(2) * (2f64.sqrt() * 2.0).powi(3), max_relative = 1e-12);
    assert_relative_eq!(nu(2), 2f64.sqrt().powi(3) * 4f64.powi(4) * 6f64.powi(3), max_relative = 1e-12);
}

#[test]
fn exhaustive_search_locks_on_equilibria() {
    let pd = FiniteGame::prisoners_dilemma();
    let grid = pd.profile_grid(1);
    let run = run_exhaustive_search(&pd, &grid, 0.0, grid.len() + 2, 1).unwrap();
    assert_eq!(run.profile, Some(pd.embed(&[1, 1])));

    let mp = FiniteGame::matching_pennies();
    let grid = mp.profile_grid(4);
    let run = run_exhaustive_search(&mp, &grid, 0.0, grid.len() + 2, 1).unwrap();
    assert_eq!(run.profile, Some(vec![0.5, 0.5, 0.5, 0.5]));
    let last = run.steps.last().unwrap();
    assert!(last.locked);

    let pure = mp.profile_grid(1);
    assert!(run_exhaustive_search(&mp, &pure, 0.1, 50, 1).is_err());
}

#[test]
fn dominant_action_is_always_played_after_burn_in() {
    let game = FiniteGame::dominant(2);
    let config = DynamicConfig::desk(&game, 1500, 4);
    let run = run_smooth_calibrated_learning(&game, &config).unwrap();
    assert_eq!(run.fraction_in_ne(0.3, 200), 1.0);
    assert!(run.replay_checks >= 1);
}

#[test]
fn coordination_run_is_reproducible_and_consistent() {
    let game = FiniteGame::coordination();
    let config = DynamicConfig::desk(&game, 2000, 7);
    let a = run_smooth_calibrated_learning(&game, &config).unwrap();
    let b = run_smooth_calibrated_learning(&game, &config).unwrap();
    assert_eq!(a.steps, b.steps);
    let mut prev = 0.0;
    for (eps, frac) in &a.ne_fraction {
        assert!(*frac >= prev, "fraction drops at ε = {eps}");
        assert_eq!(*frac, a.fraction_in_ne(*eps, 0));
        prev = *frac;
    }
    for (threshold, above, ratio) in &a.diagnostics.markov {
        assert!(above <= ratio, "Markov bound fails at {threshold}");
    }
    let d = &a.diagnostics;
    assert!(d.behavior_forecast_gap <= d.behavior_forecast_bound + 1e-12);
    for s in &a.steps {
        assert_eq!(s.a.iter().sum::<f64>(), 2.0);
        assert_abs_diff_eq!(s.x.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
    }
}

#[test]
fn continuous_examples() {
    let zero = ContinuousGame::zero(2);
    let run = run_continuous_dynamic(&zero, &ContinuousConfig::desk(&zero, 300)).unwrap();
    assert_eq!(run.pne_fraction(0.0, 0), 1.0);

    let quad = ContinuousGame::quadratic(0.3);
    let run = run_continuous_dynamic(&quad, &ContinuousConfig::desk(&quad, 500)).unwrap();
    assert!(run.warnings.is_empty());
    assert!(run.actions.iter().all(|a| (a[0] - 0.3).abs() <= 0.01));
    assert_eq!(run.pne_fraction(0.1, 0), 1.0);

    let team = ContinuousGame::team();
    let run = run_continuous_dynamic(&team, &ContinuousConfig::desk(&team, 2000)).unwrap();
    assert!(run.pne_fraction(0.1, 500) >= 0.9, "{}", run.pne_fraction(0.1, 500));
}

#[test]
fn game_files_are_validated() {
    let text = r#"{"name":"g","players":2,"actions":[2,2],"payoffs":[[1,0,0,1],[1,0,0,1]]}"#;
    assert_eq!(FiniteGame::from_json(text).unwrap().payoffs, FiniteGame::coordination().payoffs);
    assert!(FiniteGame::from_json(r#"{"players":2,"actions":[2,2],"payoffs":[[1,0,0],[1,0,0,1]]}"#).is_err());
    assert!(FiniteGame::from_json(r#"{"players":1,"actions":[2],"payoffs":[[1,0]],"extra":1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_deviations_match_mixed_grid(
        payoffs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 2),
        p in 0.0f64..1.0,
        q in 0.0f64..1.0,
    ) {
        let game = FiniteGame::new("random", vec![2, 2], payoffs).unwrap();
        let x = [p, 1.0 - p, q, 1.0 - q];
        let check = eps_nash_check(&game, &x, 0.0).unwrap();
        let grid = grid_gap(&game, &x);
        assert_abs_diff_eq!(check.worst_gap, grid, epsilon = 1e-9);
        prop_assert_eq!(check.is_member, check.worst_gap <= 0.0);
    }

    #[test]
    fn schedule_identities_hold(eps in 0.01f64..1.0, n in 1usize..4, m in 1usize..5, u in 0.5f64..5.0) {
        let (e5, e3) = tune_dynamic_parameters(eps, n, m, u).identity_errors();
        prop_assert!(e5 <= 1e-12 && e3 <= 1e-12);
    }
}
