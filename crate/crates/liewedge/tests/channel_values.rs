use approx::{assert_abs_diff_eq, assert_relative_eq};

use liewedge::channels::r3::example3_coefficients;
use liewedge::channels::{build_system, depolarizing_weights, flip_weights, ChannelName, ChannelSpec};
use liewedge::lindblad::propagator;

#[test]
fn flip_weights_at_unit_decay() {
    let (q, r) = flip_weights(0.5, 1.0);
    assert_relative_eq!(q, 0.6839397205857212, max_relative = 1e-15);
    assert_abs_diff_eq!(q + r, 1.0, epsilon = 1e-15);
}

#[test]
fn depolarizing_weights_frozen() {
    let w = depolarizing_weights([0.1, 0.3, 0.5], 0.5);
    let want = [
        0.6671151615617219,
        0.05754932049688896,
        0.1072906564852914,
        0.16804486145609784,
    ];
    for (a, b) in w.iter().zip(want) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
    }
    assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
}

#[test]
fn third_example_at_quarter_turn() {
    let c = example3_coefficients(1.0, std::f64::consts::FRAC_PI_2);
    let want = [1.0, 0.0, 0.0, 1.0, 10.0 / 12.0];
    for (a, b) in c.iter().zip(want) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
    }
}

#[test]
fn phase_flip_decays_coherences() {
    let (g, t) = (0.35, 1.7);
    let sys = build_system(&ChannelSpec::new(ChannelName::PhaseFlip).with_rates(vec![g])).unwrap();
    let u = vec![0.0; sys.num_controls()];
    let c = propagator(&sys, &u, t).unwrap().coherence().unwrap();
    let e = (-2.0 * g * t).exp();
    for (i, want) in [e, e, 1.0].into_iter().enumerate() {
        assert_abs_diff_eq!(c.get(i, i).re, want, epsilon = 1e-13);
    }
}
