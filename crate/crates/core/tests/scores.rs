use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use smoothcal::geometry::ConvexDomain;
use smoothcal::linalg::dist;
use smoothcal::scores::{
    averaging_bound, calibration_score, gamma, indicator_sup_bound, smoothed_score, smoothed_scores, weak_score,
    SmoothedVariant, SmoothingKernel, Transcript, WeightFunction,
};

/// `K_T` straight from the definition, grouping by exact equality.
fn naive_k(pairs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let total = pairs.len() as f64;
    let mut acc = 0.0;
    for (c, _) in pairs {
        let same: Vec<&Vec<f64>> = pairs.iter().filter(|(d, _)| d == c).map(|(_, a)| a).collect();
        let abar: Vec<f64> = (0..c.len()).map(|i| same.iter().map(|a| a[i]).sum::<f64>() / same.len() as f64).collect();
        acc += dist(&abar, c);
    }
    acc / total
}

/// Smoothed scores summed period by period.
fn naive_smoothed(pairs: &[(Vec<f64>, Vec<f64>)], kernel: SmoothingKernel) -> (f64, f64) {
    let m = pairs[0].0.len();
    let (mut both, mut action) = (0.0, 0.0);
    for (ct, _) in pairs {
        let mut w = 0.0;
        let (mut a, mut c) = (vec![0.0; m], vec![0.0; m]);
        for (cs, as_) in pairs {
            let lam = kernel.eval(cs, ct);
            w += lam;
            for i in 0..m {
                a[i] += lam * as_[i];
                c[i] += lam * cs[i];
            }
        }
        for i in 0..m {
            a[i] /= w;
            c[i] /= w;
        }
        both += dist(&a, &c);
        action += dist(&a, ct);
    }
    let t = pairs.len() as f64;
    (both / t, action / t)
}

type Pairs = Vec<(Vec<f64>, Vec<f64>)>;

fn transcript_strategy() -> impl Strategy<Value = (usize, Pairs)> {
    (1usize..3).prop_flat_map(|m| {
        let point = prop::collection::vec(0u8..=20, m).prop_map(|v| v.iter().map(|x| f64::from(*x) / 20.0).collect::<Vec<f64>>());
        let action = prop::collection::vec(prop::bool::ANY, m).prop_map(|v| v.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect::<Vec<f64>>());
        (Just(m), prop::collection::vec((point, action), 1..60))
    })
}

#[test]
fn rainy_days_example() {
    let mut pairs = Vec::new();
    pairs.extend((0..200).map(|i| (0.3001, if i < 10 { 1.0 } else { 0.0 })));
    pairs.extend((0..100).map(|i| (0.2999, if i < 80 { 1.0 } else { 0.0 })));
    let t = Transcript::from_scalars(ConvexDomain::unit_box(1), &pairs).unwrap();
    let k = calibration_score(&t).unwrap();
    assert_abs_diff_eq!(k, (200.0 / 300.0) * 0.2501 + (100.0 / 300.0) * 0.5001, epsilon = 1e-12);
    assert_abs_diff_eq!(k, 0.3334, epsilon = 1e-4);
}

#[test]
fn single_entry_scores() {
    let t = Transcript::from_scalars(ConvexDomain::unit_box(1), &[(0.4, 1.0)]).unwrap();
    assert_abs_diff_eq!(weak_score(&t, &WeightFunction::coordinate(0)).unwrap(), 0.24, epsilon = 1e-15);
    let h = Transcript::from_scalars(ConvexDomain::unit_box(1), &[(0.5, 1.0)]).unwrap();
    let (sup, k) = indicator_sup_bound(&h).unwrap();
    assert_eq!((sup, k), (0.5, 0.5));
}

#[test]
fn constant_play_is_calibrated() {
    let pairs = vec![(0.3, 0.3); 50];
    let t = Transcript::from_scalars(ConvexDomain::unit_box(1), &pairs).unwrap();
    assert_abs_diff_eq!(calibration_score(&t).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn empty_and_outside_transcripts_are_rejected() {
    let d = ConvexDomain::unit_box(1);
    assert!(calibration_score(&Transcript::new(d.clone())).is_err());
    assert!(Transcript::from_scalars(d, &[(1.2, 0.0)]).is_err());
}

#[test]
fn kernel_constants() {
    assert_eq!(SmoothingKernel::tent(0.25).lipschitz(), 4.0);
    assert_abs_diff_eq!(SmoothingKernel::tent(0.1).eval(&[0.3], &[0.35]), 0.5, epsilon = 1e-15);
    assert_eq!(SmoothingKernel::Indicator.eval(&[0.3], &[0.3 + 1e-16]), 0.0);
    assert_abs_diff_eq!(gamma(1, 1.0), 2.0 * 4.0, epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_score_matches_definition((m, pairs) in transcript_strategy()) {
        let t = Transcript::from_pairs(ConvexDomain::unit_box(m), &pairs).unwrap();
        assert_abs_diff_eq!(calibration_score(&t).unwrap(), naive_k(&pairs), epsilon = 1e-12);
    }

    #[test]
    fn smoothed_scores_match_definition((m, pairs) in transcript_strategy(), delta in 0.02f64..0.5, gaussian in prop::bool::ANY) {
        let kernel = if gaussian { SmoothingKernel::gaussian(delta) } else { SmoothingKernel::tent(delta) };
        let t = Transcript::from_pairs(ConvexDomain::unit_box(m), &pairs).unwrap();
        let (both, action) = smoothed_scores(&t, kernel).unwrap();
        let (nb, na) = naive_smoothed(&pairs, kernel);
        assert_abs_diff_eq!(both, nb, epsilon = 1e-10);
        assert_abs_diff_eq!(action, na, epsilon = 1e-10);
        prop_assert_eq!(both, smoothed_score(&t, kernel, SmoothedVariant::BothSmoothed).unwrap());
    }

    #[test]
    fn indicator_reduces_bitwise((m, pairs) in transcript_strategy()) {
        let t = Transcript::from_pairs(ConvexDomain::unit_box(m), &pairs).unwrap();
        let k = calibration_score(&t).unwrap();
        for v in [SmoothedVariant::BothSmoothed, SmoothedVariant::ActionOnly] {
            prop_assert_eq!(smoothed_score(&t, SmoothingKernel::Indicator, v).unwrap().to_bits(), k.to_bits());
        }
    }

    #[test]
    fn kernels_are_normalized_and_lipschitz(
        x in prop::collection::vec(0.0f64..1.0, 2),
        y in prop::collection::vec(0.0f64..1.0, 2),
        c in prop::collection::vec(0.0f64..1.0, 2),
        delta in 0.01f64..1.0,
    ) {
        for k in [SmoothingKernel::tent(delta), SmoothingKernel::gaussian(delta)] {
            prop_assert_eq!(k.eval(&c, &c), 1.0);
            let (u, v) = (k.eval(&x, &c), k.eval(&y, &c));
            prop_assert!((0.0..=1.0).contains(&u));
            prop_assert!((u - v).abs() <= k.lipschitz() * dist(&x, &y) + 1e-12);
        }
    }

    #[test]
    fn smoothing_is_bounded_by_the_exact_score((m, pairs) in transcript_strategy(), delta in 0.05f64..0.5) {
        let domain = ConvexDomain::unit_box(m);
        let t = Transcript::from_pairs(domain.clone(), &pairs).unwrap();
        let kernel = SmoothingKernel::tent(delta);
        let smooth = smoothed_score(&t, kernel, SmoothedVariant::BothSmoothed).unwrap();
        let k = calibration_score(&t).unwrap();
        let bound = gamma(m, domain.diameter()) * kernel.lipschitz().powf(m as f64 / 2.0) * k.sqrt();
        prop_assert!(smooth <= bound * (1.0 + 1e-12));
        let (sup, k2) = indicator_sup_bound(&t).unwrap();
        prop_assert_eq!(k, k2);
        prop_assert!(k <= 2.0 * m as f64 * sup * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn averaging_lemma_holds(
        (m, pairs) in transcript_strategy(),
        residuals in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 60),
        delta in 0.05f64..0.5,
    ) {
        let forecasts: Vec<Vec<f64>> = pairs.iter().map(|(c, _)| c.clone()).collect();
        let b: Vec<Vec<f64>> = residuals[..forecasts.len()].iter().map(|r| r[..m].to_vec()).collect();
        let bound = averaging_bound(&forecasts, &b, SmoothingKernel::tent(delta), ConvexDomain::unit_box(m).diameter()).unwrap();
        prop_assert!(bound.holds());
        prop_assert!(bound.lhs <= bound.rhs_exact * (1.0 + 1e-12));
    }

    #[test]
    fn weak_score_is_the_weighted_residual((m, pairs) in transcript_strategy(), j in 0usize..2) {
        let t = Transcript::from_pairs(ConvexDomain::unit_box(m), &pairs).unwrap();
        let w = WeightFunction::coordinate(j.min(m - 1));
        let mut s = vec![0.0; m];
        for (c, a) in &pairs {
            let wc = c[j.min(m - 1)];
            for i in 0..m {
                s[i] += wc * (a[i] - c[i]);
            }
        }
        let want = s.iter().map(|v| v * v).sum::<f64>().sqrt() / pairs.len() as f64;
        assert_abs_diff_eq!(weak_score(&t, &w).unwrap(), want, epsilon = 1e-12);
    }
}
