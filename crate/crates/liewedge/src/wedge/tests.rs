use super::*;
use crate::channels::r3::{self, example3_cone_point, example3_delta, gamma0, h, p};
use crate::channels::Axis::{X, Y, Z};
use crate::channels::{build_system, example1, example2, example3, sigma_hat, ChannelName, ChannelSpec};
use crate::matcore::orthonormal_span;
use proptest::prelude::*;
use rand::Rng;
use std::sync::OnceLock;

fn opts() -> SaturateOptions {
    SaturateOptions::default()
}

fn example1_saturated() -> &'static Saturation {
    static S: OnceLock<Saturation> = OnceLock::new();
    S.get_or_init(|| saturate(&initial_wedge(&example1(3.0, 2.0, 1.0)), &opts()).unwrap())
}

fn ice() -> &'static Saturation {
    static S: OnceLock<Saturation> = OnceLock::new();
    S.get_or_init(|| saturate(&initial_wedge(&example2(1.0)), &opts()).unwrap())
}

#[test]
fn initial_wedge_of_example1() {
    let w = initial_wedge(&example1(3.0, 2.0, 1.0));
    assert_eq!(w.edge.dim(), 2);
    assert!(w.edge.contains(&h(X), 1e-12).unwrap());
    assert!(w.edge.contains(&h(Y), 1e-12).unwrap());
    assert_eq!(w.cone.len(), 1);
    let g = &h(Z) + &gamma0([3.0, 2.0, 1.0]);
    assert!(w.cone.contains(&g, CONE_TOL));
}

#[test]
fn initial_wedge_of_example2() {
    let w = initial_wedge(&example2(1.0));
    assert_eq!(w.edge.dim(), 1);
    assert!(w.edge.contains(&h(Y), 1e-12).unwrap());
}

#[test]
fn zero_drift_gives_empty_cone() {
    let sys = crate::channels::r3_system(None, &[X], [0.0; 3]).unwrap();
    assert!(initial_wedge(&sys).cone.is_empty());
}

#[test]
fn example1_edge_is_so3_and_cone_pointed() {
    let s = example1_saturated();
    assert!(s.converged);
    assert_eq!(s.wedge.edge.dim(), 3);
    assert!(s.wedge.cone.is_pointed(CONE_TOL));
    // the seed loses its edge component: only Γ₀ survives
    let g0 = gamma0([3.0, 2.0, 1.0]);
    assert!(s.wedge.cone.contains(&g0, CONE_TOL));
    // span of the orbit of a generic diagonal: all symmetric matrices
    assert_eq!(s.wedge.cone_span_dim(), 6);
    assert_eq!(s.wedge.dim(), 9);
}

#[test]
fn example1_cone_agrees_with_majorization() {
    let s = example1_saturated();
    let gamma = [3.0, 2.0, 1.0];
    let mut rng = task_rng(11, 0);
    let mut disagree = 0;
    for _ in 0..200 {
        let a: Vec<f64> = (0..9).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let m = Mat::from_real(3, 3, &a);
        let mut sym = (&m + &m.transpose()).scale(0.5);
        // shift toward the cone so both verdicts occur
        sym.axpy(rng.random_range(0.0..6.0), &Mat::identity(3));
        let by_cone = s.wedge.cone.contains(&sym, CONE_TOL);
        let by_major = majorization_cone_contains(&sym, &gamma, 1e-9).unwrap();
        if by_cone != by_major {
            disagree += 1;
        }
    }
    assert_eq!(disagree, 0);
}

#[test]
fn example1_wedge_is_ad_invariant() {
    let s = example1_saturated();
    let w = &s.wedge;
    let mut rng = task_rng(5, 0);
    for _ in 0..20 {
        let a = random_edge_element(&w.edge, &mut rng, 1.5);
        let u = expm(&a);
        for g in w.cone.generators().iter().step_by(37) {
            let c = &(&u * g) * &u.transpose();
            assert!(w.cone.contains(&c, CONE_TOL));
        }
    }
}

#[test]
fn example2_cone_is_the_ice_cone() {
    let s = ice();
    assert!(s.converged);
    let w = &s.wedge;
    assert_eq!(w.edge.dim(), 1);
    assert_eq!(w.dim(), 4);
    let coords = orthonormal_span(&[h(X), h(Z), gamma0([1.0, 0.0, 1.0])], 1e-12);
    for g in w.cone.generators() {
        assert!(g.inner(&h(Y)).abs() <= 1e-12);
        assert!(coords.residual(g) <= 1e-12);
        // (sinθ, cosθ, 1) up to scale
        let x = g.inner(&h(X)) / 2.0;
        let z = g.inner(&h(Z)) / 2.0;
        let t = g.inner(&gamma0([1.0, 0.0, 1.0])) / 2.0;
        assert!((x * x + z * z - t * t).abs() <= 1e-12);
        assert!(t > 0.0);
    }
    assert!(w.cone.contains(&r3::example2_cone_point(1.0, 0.0), CONE_TOL));
    assert!(w.cone.contains(&gamma0([1.0, 0.0, 1.0]), CONE_TOL));
    assert!(!w.cone.contains(&h(X), CONE_TOL));
    assert!(w.cone.is_pointed(CONE_TOL));
}

#[test]
fn example3_cone_span_is_five() {
    let s = saturate(&initial_wedge(&example3(1.0)), &opts()).unwrap();
    assert!(s.converged);
    assert_eq!(s.wedge.cone_span_dim(), 5);
    let target = orthonormal_span(&[h(X), h(Z), p(Y), example3_delta(), gamma0([1.0, 1.0, 2.0])], 1e-12);
    for g in s.wedge.cone.generators() {
        assert!(target.residual(g) <= 1e-10);
    }
    for k in 0..12 {
        let th = k as f64 * 0.5;
        assert!(s.wedge.cone.contains(&example3_cone_point(1.0, th), CONE_TOL));
    }
}

#[test]
fn zero_relaxation_grows_the_edge() {
    let s = saturate(&initial_wedge(&example2(0.0)), &opts()).unwrap();
    assert!(s.converged);
    assert_eq!(s.wedge.edge.dim(), 3);
    assert!(s.wedge.cone.is_empty());
}

#[test]
fn sequential_and_parallel_agree() {
    let mut o = opts();
    o.exec = Exec::Sequential;
    let a = saturate(&initial_wedge(&example2(1.0)), &o).unwrap();
    o.exec = Exec::Parallel;
    let b = saturate(&initial_wedge(&example2(1.0)), &o).unwrap();
    assert_eq!(a.generator_counts, b.generator_counts);
    assert_eq!(a.edge_dims, b.edge_dims);
}

#[test]
fn dual_cone_examples() {
    assert!(dual_cone_contains([1.0, 0.0, 0.0], &Mat::identity(3), 1e-12).unwrap());
    let s = Mat::diag_real(&[5.0, 1.0, -1.0]);
    assert!(dual_cone_contains([1.0, 1.0, 0.0], &s, 1e-12).unwrap());
    assert!(dual_cone_value([1.0, 1.0, 0.0], &s).unwrap().abs() < 1e-12);
    assert!(!dual_cone_contains([1.0, 0.0, 0.0], &Mat::diag_real(&[1.0, 1.0, -0.1]), 1e-12).unwrap());
    assert!(dual_cone_contains([1.0, 2.0, 0.0], &s, 1e-12).is_err());
    let ns = Mat::from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(dual_cone_contains([1.0, 0.0, 0.0], &ns, 1e-12).is_err());
}

#[test]
fn majorization_examples() {
    let (a, b, c) = (3.0, 2.0, 1.0);
    let g = [a, b, c];
    assert!(majorized(&Mat::diag_real(&[b, a, c]), &g, 1e-12).unwrap());
    assert!(majorized(&Mat::diag_real(&[(a + b) / 2.0, (a + b) / 2.0, c]), &g, 1e-12).unwrap());
    assert!(!majorized(&Mat::diag_real(&[a + 1.0, b, c - 1.0]), &g, 1e-12).unwrap());
    assert!(!majorized(&Mat::diag_real(&[a, b, c + 1.0]), &g, 1e-12).unwrap());
    assert!(majorization_cone_contains(&Mat::diag_real(&[2.0 * b, 2.0 * a, 2.0 * c]), &g, 1e-12).unwrap());
    assert!(!majorization_cone_contains(&Mat::diag_real(&[-1.0, 0.0, 0.0]), &g, 1e-12).unwrap());
}

#[test]
fn orbit_min_matches_eigenvalue_formula() {
    let s = Mat::diag_real(&[2.0, -1.0, 0.5]);
    let m = orbit_min(&s, [3.0, 2.0, 1.0], 2000, 1).unwrap();
    // von Neumann: pair largest of Γ with smallest of S
    let exact = -3.0 + 2.0 * 0.5 + 1.0 * 2.0;
    assert!((m - exact).abs() < 1e-9, "{m} vs {exact}");
}

#[test]
fn random_rotation_is_orthogonal() {
    let mut rng = task_rng(3, 0);
    let r = random_rotation(&mut rng);
    assert!((&r * &r.transpose()).approx_eq(&Mat::identity(3), 1e-12));
    let u = haar_unitary(4, &mut rng);
    assert!((&u * &u.adjoint()).approx_eq(&Mat::identity(4), 1e-12));
}

fn qubit_full_control() -> ControlSystem {
    let spec = ChannelSpec::new(ChannelName::Depolarizing).with_rates(vec![0.0, 0.0, 1.0]);
    let spec = spec.with_controls(vec![crate::channels::Label::One(X), crate::channels::Label::One(Y)]);
    let spec = spec.with_drift(Some(crate::channels::Label::One(Z)));
    build_system(&spec).unwrap()
}

#[test]
fn qubit_outer_conditions() {
    let sys = qubit_full_control();
    let s = saturate(&initial_wedge(&sys), &opts()).unwrap();
    assert!(s.converged);
    assert_eq!(s.wedge.edge.dim(), 3);
    let gl = sys.dissipator();
    // 2γσ̂_z² for a pure z dephasing at unit rate
    let sz = sigma_hat(Z);
    assert!(gl.approx_eq(&(&sz * &sz).scale(2.0), 1e-12));
    let rep = outer_wedge_check(&s.wedge.cone, &gl, 2, 100, 9).unwrap();
    assert!(rep.gamma_in_cone);
    assert!(rep.bracket_skew_residual <= 1e-10, "{rep:?}");
    assert!(rep.bracket_adhat_residual <= 1e-10, "{rep:?}");
    assert!(rep.span_residual <= 1e-10, "{rep:?}");
    assert!(rep.ad_invariance_residual <= 1e-10, "{rep:?}");

    let g = globality_check(&s.wedge, &sys).unwrap();
    assert!(g.holds, "{g:?}");
    assert!(corollary2_check(&s.wedge, &s.wedge.edge, 50, 2).unwrap());
}

#[test]
fn corollary2_detects_an_oversized_outer_edge() {
    let s = ice();
    let edge_y = orthonormal_span(&[h(Y)], 1e-12);
    assert!(corollary2_check(&s.wedge, &edge_y, 50, 1).unwrap());
    let bigger = orthonormal_span(&[h(X), h(Y), h(Z)], 1e-12);
    // H_x, H_z lie in span(inner) but not in the inner wedge
    assert!(corollary2_check(&s.wedge, &bigger, 50, 1).unwrap());
    let with_gamma = orthonormal_span(&[h(Y), gamma0([1.0, 0.0, 1.0])], 1e-12);
    assert!(!corollary2_check(&s.wedge, &with_gamma, 50, 1).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_cone_agrees_with_orbit_minimum(v in prop::collection::vec(-2.0f64..2.0, 6)) {
        let s = Mat::from_real(3, 3, &[v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5]]);
        for g in [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [3.0, 2.0, 1.0]] {
            let val = dual_cone_value(g, &s).unwrap();
            let m = orbit_min(&s, g, 500, 4).unwrap();
            prop_assert!((val - m).abs() <= 1e-8, "{} vs {}", val, m);
        }
    }

    #[test]
    fn majorized_sets_lie_in_the_cone(theta in 0.0f64..6.3, phi in 0.0f64..6.3, w in 0.0f64..1.0) {
        let g = [3.0, 2.0, 1.0];
        let r = expm(&(&h(X).scale(theta) + &h(Z).scale(phi)));
        let m = &(&r * &gamma0(g)) * &r.transpose();
        let avg = (&m.scale(w) + &gamma0(g).scale(1.0 - w)).scale(2.5);
        prop_assert!(majorization_cone_contains(&avg, &g, 1e-9).unwrap());
    }

    #[test]
    fn ice_cone_conjugates_stay_in_the_cone(theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
        let s = ice();
        let u = expm(&h(Y).scale(phi));
        let x = &(&u * &r3::example2_cone_point(1.0, theta)) * &u.transpose();
        prop_assert!(s.wedge.cone.contains(&x, CONE_TOL));
        prop_assert!(s.wedge.contains(&-&x, CONE_TOL));
    }
}
