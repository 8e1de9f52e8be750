use approx::assert_abs_diff_eq;

use smoothcal::forecaster::{ActionSet, ForecasterSettings, WeakForecaster};
use smoothcal::game::{fixed_point_fraction, play, Adversary, AdversaryKind, Forecaster, ReactionMap};
use smoothcal::geometry::ConvexDomain;
use smoothcal::scores::{calibration_score, smoothed_score, SmoothedVariant, SmoothingKernel, WeightFunction};

fn weak() -> Forecaster {
    Forecaster::weak(WeakForecaster::from_settings(ForecasterSettings::desk_unit_interval()).unwrap())
}

fn weak_on_domain() -> Forecaster {
    let s = ForecasterSettings::desk(ConvexDomain::unit_box(1), ActionSet::Domain);
    Forecaster::weak(WeakForecaster::from_settings(s).unwrap())
}

#[test]
fn alternating_against_threshold_hand_trace() {
    let f = Forecaster::alternating(ConvexDomain::unit_box(1), vec![0.5001], vec![0.4999]);
    let adv = Adversary::leaky(AdversaryKind::Threshold { cut: 0.5 });
    let run = play(&f, &adv, &ActionSet::binary(), 4, 0).unwrap();
    let t = &run.transcript;
    let cs: Vec<f64> = (0..4).map(|i| t.forecast(i)[0]).collect();
    let as_: Vec<f64> = (0..4).map(|i| t.action(i)[0]).collect();
    assert_eq!(cs, vec![0.5001, 0.4999, 0.5001, 0.4999]);
    assert_eq!(as_, vec![0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn alternation_is_smoothly_calibrated_only() {
    let f = Forecaster::alternating(ConvexDomain::unit_box(1), vec![0.5001], vec![0.4999]);
    let adv = Adversary::leaky(AdversaryKind::Threshold { cut: 0.5 });
    let run = play(&f, &adv, &ActionSet::binary(), 1000, 0).unwrap();
    let k = calibration_score(&run.transcript).unwrap();
    let kl = smoothed_score(&run.transcript, SmoothingKernel::tent(0.01), SmoothedVariant::BothSmoothed).unwrap();
    assert_abs_diff_eq!(k, 0.5, epsilon = 1e-3);
    assert!(kl <= 0.01, "{kl}");
}

#[test]
fn constant_players_are_calibrated() {
    let f = Forecaster::constant(ConvexDomain::unit_box(1), vec![0.3]);
    let adv = Adversary::standard(AdversaryKind::Constant { a: vec![0.3] });
    let run = play(&f, &adv, &ActionSet::Domain, 25, 0).unwrap();
    assert_abs_diff_eq!(calibration_score(&run.transcript).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn bad_periods_and_actions_are_reported() {
    let f = Forecaster::constant(ConvexDomain::unit_box(1), vec![0.3]);
    let adv = Adversary::standard(AdversaryKind::Constant { a: vec![0.5] });
    assert!(play(&f, &adv, &ActionSet::binary(), 0, 0).is_err());
    let err = play(&f, &adv, &ActionSet::binary(), 5, 0).unwrap_err();
    assert!(err.to_string().contains('1'), "{err}");
}

#[test]
fn leaking_the_forecast_changes_nothing() {
    let targets = vec![WeightFunction::constant(1.0), WeightFunction::coordinate(0), WeightFunction::half_space(0, 0.5)];
    let cases = [
        (weak(), AdversaryKind::Threshold { cut: 0.5 }, ActionSet::binary()),
        (weak(), AdversaryKind::SimulatingBestResponse { targets }, ActionSet::binary()),
        (weak_on_domain(), AdversaryKind::Reaction { g: ReactionMap::flip() }, ActionSet::Domain),
    ];
    for (f, kind, actions) in cases {
        let a = play(&f, &Adversary::standard(kind.clone()), &actions, 400, 5).unwrap();
        let b = play(&f, &Adversary::leaky(kind.clone()), &actions, 400, 5).unwrap();
        assert_eq!(a.transcript, b.transcript, "{}", kind.name());
    }
}

#[test]
fn seeded_random_adversary_replays() {
    let adv = Adversary::standard(AdversaryKind::SeededRandom { salt: 3 });
    let a = play(&weak(), &adv, &ActionSet::binary(), 300, 9).unwrap();
    let b = play(&weak(), &adv, &ActionSet::binary(), 300, 9).unwrap();
    let c = play(&weak(), &adv, &ActionSet::binary(), 300, 10).unwrap();
    assert_eq!(a.transcript, b.transcript);
    assert_ne!(a.transcript, c.transcript);
}

#[test]
fn identity_reaction_is_always_fixed() {
    let adv = Adversary::leaky(AdversaryKind::Reaction { g: ReactionMap::identity() });
    let run = play(&weak_on_domain(), &adv, &ActionSet::Domain, 200, 0).unwrap();
    assert_eq!(fixed_point_fraction(&run.transcript, &|c: &[f64]| c.to_vec(), 0.0), 1.0);
}

#[test]
fn constant_reaction_pulls_forecasts_in() {
    let g = ReactionMap::constant(vec![0.7]);
    let adv = Adversary::leaky(AdversaryKind::Reaction { g: g.clone() });
    let run = play(&weak_on_domain(), &adv, &ActionSet::Domain, 3000, 0).unwrap();
    let tail = run.transcript.slice(1000, 3000);
    assert!(fixed_point_fraction(&tail, &|c: &[f64]| g.eval(c), 0.1) >= 0.9);
}

#[test]
fn flip_reaction_concentrates_at_one_half() {
    let g = ReactionMap::flip();
    let adv = Adversary::leaky(AdversaryKind::Reaction { g: g.clone() });
    let run = play(&weak_on_domain(), &adv, &ActionSet::Domain, 3000, 0).unwrap();
    let tail = run.transcript.slice(1000, 3000);
    let mean = tail.iter().map(|(c, _)| c[0]).sum::<f64>() / tail.len() as f64;
    assert_abs_diff_eq!(mean, 0.5, epsilon = 0.05);
    assert!(fixed_point_fraction(&tail, &|c: &[f64]| g.eval(c), 0.1) >= 0.8);
}
