use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use smoothcal::forecaster::{
    eval_h, fixed_point, next_forecast, observe, ActionSet, ForecasterConfig, ForecasterSettings, HMap, RecallWindow,
    WeakForecaster,
};
use smoothcal::geometry::ConvexDomain;

fn scalar_config(recall: usize, lambda: f64) -> ForecasterConfig {
    let mut s = ForecasterSettings::desk_unit_interval();
    s.net_radius = 0.6;
    s.lambda = lambda;
    s.recall = recall;
    ForecasterConfig::build(s).unwrap()
}

fn square_config(recall: usize) -> ForecasterConfig {
    let mut s = ForecasterSettings::desk(ConvexDomain::unit_box(2), ActionSet::Domain);
    s.net_radius = 0.3;
    s.lambda = 0.9;
    s.recall = recall;
    s.grid_radius = Some(0.01);
    ForecasterConfig::build(s).unwrap()
}

/// `H(c)` assembled densely and solved with nalgebra.
fn oracle_h(config: &ForecasterConfig, window: &RecallWindow, c: &[f64]) -> Vec<f64> {
    let d = config.basis_len();
    let m = config.dim();
    let p: Vec<f64> = c.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let f = DVector::from_vec(config.basis().eval(&p).unwrap());
    let mut z = DMatrix::<f64>::identity(d, d) + &f * f.transpose();
    let mut v = vec![DVector::<f64>::zeros(d); m];
    for (age, e) in window.entries().iter().rev().enumerate() {
        let w = config.lambda().powi(age as i32 + 1);
        let x = DVector::from_column_slice(&e.x);
        z += &x * x.transpose() * w;
        for j in 0..m {
            v[j] += &x * (w * e.a[j]);
        }
    }
    let lu = z.lu();
    v.iter().map(|vj| lu.solve(vj).unwrap().dot(&f)).collect()
}

fn filled(config: &ForecasterConfig, history: &[(Vec<f64>, Vec<f64>)]) -> RecallWindow {
    let mut w = RecallWindow::new(config.recall());
    for (c, a) in history {
        observe(config, &mut w, c, a).unwrap();
    }
    w
}

#[test]
fn empty_window_forecasts_the_origin() {
    let config = scalar_config(10, 0.9);
    let w = RecallWindow::new(10);
    assert_eq!(eval_h(&config, &w, &[0.7]).unwrap(), vec![0.0]);
    let f = next_forecast(&config, &w).unwrap();
    assert_eq!(f.b, vec![0.0]);
    assert_eq!(f.c, vec![0.0]);
}

#[test]
fn scalar_window_matches_hand_formula() {
    let config = scalar_config(2, 0.5);
    assert_eq!(config.basis_len(), 2);
    let w = filled(&config, &[(vec![0.5], vec![1.0])]);
    // Basis (c, 1): Z = I + ½ x₁x₁' + F F', v = ½ x₁ with x₁ = (½, 1).
    for c in [0.0, 0.2, 0.5, 0.9, 1.0] {
        let x1 = [0.5, 1.0];
        let f = [c, 1.0];
        let z = [
            [1.0 + 0.5 * x1[0] * x1[0] + f[0] * f[0], 0.5 * x1[0] * x1[1] + f[0] * f[1]],
            [0.5 * x1[1] * x1[0] + f[1] * f[0], 1.0 + 0.5 * x1[1] * x1[1] + f[1] * f[1]],
        ];
        let v = [0.5 * x1[0], 0.5 * x1[1]];
        let det = z[0][0] * z[1][1] - z[0][1] * z[1][0];
        let theta = [(z[1][1] * v[0] - z[0][1] * v[1]) / det, (z[0][0] * v[1] - z[1][0] * v[0]) / det];
        let want = theta[0] * f[0] + theta[1] * f[1];
        assert_abs_diff_eq!(eval_h(&config, &w, &[c]).unwrap()[0], want, epsilon = 1e-14);
    }
}

#[test]
fn scalar_fixed_point_matches_bisection() {
    let config = scalar_config(2, 0.5);
    let w = filled(&config, &[(vec![0.5], vec![1.0])]);
    let g = |b: f64| eval_h(&config, &w, &[b]).unwrap()[0] - b;
    let k = config.derived().k_bound;
    let (mut lo, mut hi) = (-k, k);
    assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fp = fixed_point(&config, &w).unwrap();
    assert_abs_diff_eq!(fp.b[0], lo, epsilon = 1e-8);
    assert!(fp.residual <= 1e-8);
}

#[test]
fn clamped_then_snapped() {
    let config = scalar_config(10, 0.9);
    let grid = config.grid();
    assert_eq!(grid.snap(&[1.0]), vec![1.0]);
    let mut far = vec![1.2];
    ConvexDomain::unit_box(1).project_in_place(&mut far);
    assert_eq!(grid.snap(&far), vec![1.0]);
}

#[test]
fn forecasts_depend_on_the_window_only() {
    let config = scalar_config(3, 0.9);
    let tail = [(vec![0.25], vec![1.0]), (vec![0.75], vec![0.0])];
    let mut early = vec![(vec![0.5], vec![1.0]), (vec![0.1], vec![0.0]), (vec![0.9], vec![1.0])];
    early.extend(tail.iter().cloned());
    let mut late = vec![(vec![0.0], vec![0.0])];
    late.extend(tail.iter().cloned());
    let (a, b) = (filled(&config, &early), filled(&config, &late));
    assert_eq!(a.len(), 2);
    assert_eq!(next_forecast(&config, &a).unwrap(), next_forecast(&config, &b).unwrap());
}

#[test]
fn recall_two_keeps_one_pair() {
    let config = scalar_config(2, 0.9);
    let mut w = RecallWindow::new(2);
    for i in 0..5 {
        observe(&config, &mut w, &[i as f64 / 4.0], &[1.0]).unwrap();
        assert_eq!(w.len(), 1);
    }
    let e = &w.entries()[0];
    assert_eq!(e.x, config.basis().eval(&e.c).unwrap());
    assert!(observe(&config, &mut w, &[0.5], &[0.5]).is_err());
}

#[test]
fn every_period_solves_to_tolerance_on_the_grid() {
    let mut f = WeakForecaster::from_settings(ForecasterSettings::desk_unit_interval()).unwrap();
    let grid = f.config().grid_points();
    for t in 0..5000 {
        let fc = f.forecast().unwrap();
        assert!(fc.residual <= 1e-8, "period {t}: residual {}", fc.residual);
        assert!(grid.contains(&fc.c));
        let a = if fc.c[0] < 0.5 { 1.0 } else { 0.0 };
        f.observe(&fc.c, &[a]).unwrap();
    }
    let restored = WeakForecaster::from_json(&f.to_json()).unwrap();
    assert_eq!(restored.peek().unwrap(), f.peek().unwrap());
}

fn history_strategy() -> impl Strategy<Value = Vec<(Vec<f64>, Vec<f64>)>> {
    let pair = (prop::collection::vec(0u8..=50, 2), prop::collection::vec(0.0f64..1.0, 2))
        .prop_map(|(c, a)| (c.iter().map(|v| f64::from(*v) / 50.0).collect(), a));
    prop::collection::vec(pair, 0..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direct_h_matches_dense_oracle(history in history_strategy(), c in prop::collection::vec(-0.5f64..1.5, 2)) {
        let config = square_config(25);
        let w = filled(&config, &history);
        let got = eval_h(&config, &w, &c).unwrap();
        let want = oracle_h(&config, &w, &c);
        for (u, v) in got.iter().zip(&want) {
            assert_abs_diff_eq!(*u, *v, epsilon = 1e-10);
        }
    }

    #[test]
    fn fast_h_matches_direct_h(history in history_strategy(), c in prop::collection::vec(-0.5f64..1.5, 2)) {
        let config = square_config(25);
        let w = filled(&config, &history);
        let mut fast = HMap::new(&config, &w);
        let got = fast.eval(&c);
        let want = eval_h(&config, &w, &c).unwrap();
        let k = config.derived().k_bound;
        for (u, v) in got.iter().zip(&want) {
            assert_abs_diff_eq!(*u, *v, epsilon = 1e-10);
            prop_assert!(u.abs() <= k);
        }
    }

    #[test]
    fn fixed_points_have_small_residuals(history in history_strategy()) {
        let config = square_config(25);
        let w = filled(&config, &history);
        let fp = fixed_point(&config, &w).unwrap();
        let h = eval_h(&config, &w, &fp.b).unwrap();
        let r = h.iter().zip(&fp.b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-3);
        assert_abs_diff_eq!(r, fp.residual, epsilon = 1e-9);
    }
}
