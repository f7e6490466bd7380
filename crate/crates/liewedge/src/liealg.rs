//! Lie closures, Cartan splitting and the controllability conditions (H), (WH), (A).

use crate::error::{Error, Result};
use crate::lindblad::{affine_rep, ControlSystem};
use crate::matcore::{comm, orthonormal_span, Mat, Subspace, RANK_TOL};

/// Default bound on bracket depth.
pub const MAX_DEPTH: usize = 64;

/// Smallest bracket-closed subspace containing `gens`.
///
/// Breadth first: each level brackets the generators with the elements added at
/// the previous level and keeps the pivoted Gram–Schmidt residuals. Right-normed
/// brackets of generators span the generated algebra, so bracketing against the
/// generators alone is sufficient.
pub fn lie_closure(gens: &[Mat], tol: f64, max_depth: usize) -> Result<Subspace> {
    for g in gens {
        g.require_square("lie_closure")?;
    }
    let mut s = orthonormal_span(gens, tol);
    let base: Vec<Mat> = s.basis().to_vec();
    let mut frontier = base.clone();
    let mut depth = 0;
    while !frontier.is_empty() && s.dim() < s.ambient_dim() {
        if depth == max_depth {
            return Err(Error::MaxDepth { depth });
        }
        let cands: Vec<Mat> = base
            .iter()
            .flat_map(|g| frontier.iter().map(move |f| comm(g, f)))
            .collect();
        frontier = s.extend(&cands);
        depth += 1;
    }
    Ok(s)
}

/// Split A into its skew (𝔨) and Hermitian (𝔭) parts.
pub fn cartan_split(a: &Mat) -> Result<(Mat, Mat)> {
    a.require_square("cartan_split")?;
    let adj = a.adjoint();
    Ok(((a - &adj).scale(0.5), (a + &adj).scale(0.5)))
}

/// Membership of A in S with the relative residual test.
pub fn subspace_contains(s: &Subspace, a: &Mat, tol: f64) -> Result<bool> {
    s.contains(a, tol)
}

/// Dimensions of 𝔨_c ⊆ 𝔨_d ⊆ 𝔰 and the verdicts of the three conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub dim_kc: usize,
    pub dim_kd: usize,
    pub dim_s: usize,
    pub dim_target_k: usize,
    pub dim_target_s: usize,
    pub holds_h: bool,
    pub holds_wh: bool,
    pub holds_a: bool,
}

/// Closures computed in the real coherence-vector representation.
///
/// (WH) is the exclusive reading: 𝔨_d is full while 𝔨_c is not. Non-unital
/// systems are represented affinely, and the target of (A) grows to the
/// trace-preserving affine maps, (N²−1)·N².
pub fn check_conditions(sys: &ControlSystem) -> Result<ConditionReport> {
    let unital = sys.is_unital();
    let rep = |g: &Mat| if unital { sys.to_coherence(g) } else { affine_rep(g) };
    let ctrl: Vec<Mat> = sys.control_generators().iter().map(rep).collect::<Result<_>>()?;
    let ham = rep(&sys.hamiltonian_drift_generator())?;
    let full = rep(&sys.drift_generator())?;
    let n = sys.hilbert_dim();
    let target_k = n * n - 1;
    let target_s = if unital { target_k * target_k } else { target_k * n * n };

    let mut with_ham = ctrl.clone();
    with_ham.push(ham);
    let mut with_full = ctrl.clone();
    with_full.push(full);

    let closure = |g: &[Mat]| -> Result<usize> {
        if g.is_empty() {
            Ok(0)
        } else {
            lie_closure(g, RANK_TOL, MAX_DEPTH).map(|s| s.dim())
        }
    };
    let dim_kc = closure(&ctrl)?;
    let dim_kd = closure(&with_ham)?;
    let dim_s = closure(&with_full)?;
    let holds_h = dim_kc == target_k;
    Ok(ConditionReport {
        dim_kc,
        dim_kd,
        dim_s,
        dim_target_k: target_k,
        dim_target_s: target_s,
        holds_h,
        holds_wh: dim_kd == target_k && !holds_h,
        holds_a: dim_s == target_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::r3::{e, h, p};
    use crate::channels::Axis::{X, Y, Z};
    use crate::channels::{example1, example2};
    use crate::lindblad::{ad_hat, ControlSystem, Rep};
    use crate::matcore::{kron, Field};
    use proptest::prelude::*;

    #[test]
    fn so3_from_two_rotations() {
        assert_eq!(lie_closure(&[h(X), h(Y)], RANK_TOL, MAX_DEPTH).unwrap().dim(), 3);
    }

    #[test]
    fn single_generator() {
        let a = h(X) + e(0);
        assert_eq!(lie_closure(&[a], RANK_TOL, MAX_DEPTH).unwrap().dim(), 1);
    }

    #[test]
    fn depth_guard() {
        let err = lie_closure(&[h(X), h(Y)], RANK_TOL, 0).unwrap_err();
        assert_eq!(err, Error::MaxDepth { depth: 0 });
    }

    #[test]
    fn cartan_of_drift() {
        let g0 = Mat::diag_real(&[1.0, 0.0, 1.0]);
        let (k, q) = cartan_split(&(h(Z) + g0.clone())).unwrap();
        assert_eq!(k, h(Z));
        assert_eq!(q, g0);
        let (k2, q2) = cartan_split(&h(Y)).unwrap();
        assert_eq!(k2, h(Y));
        assert_eq!(q2.max_abs(), 0.0);
    }

    #[test]
    fn example1_condition_h() {
        let r = check_conditions(&example1(1.0, 1.0, 0.0)).unwrap();
        assert!(r.holds_h);
        assert!(!r.holds_wh);
    }

    #[test]
    fn example2_condition_wh() {
        let r = check_conditions(&example2(1.0)).unwrap();
        assert_eq!(r.dim_kc, 1);
        assert_eq!(r.dim_kd, 3);
        assert!(r.holds_wh);
        assert!(!r.holds_h);
    }

    #[test]
    fn example1_generic_accessible() {
        let r = check_conditions(&example1(3.0, 2.0, 1.0)).unwrap();
        assert_eq!(r.dim_s, 9);
        assert!(r.holds_a);
    }

    #[test]
    fn complement_of_so3() {
        let so3 = lie_closure(&[h(X), h(Y)], RANK_TOL, MAX_DEPTH).unwrap();
        assert_eq!(so3.orthocomplement().dim(), 6);
        assert!(subspace_contains(&so3, &(h(X) + h(Y).scale(2.0)), 1e-12).unwrap());
        assert!(!subspace_contains(&so3, &p(X), 1e-12).unwrap());
    }

    fn herm2(v: [f64; 4]) -> Mat {
        use crate::matcore::C64;
        Mat::from_complex(
            2,
            2,
            vec![
                C64::new(v[0], 0.0),
                C64::new(v[1], v[2]),
                C64::new(v[1], -v[2]),
                C64::new(v[3], 0.0),
            ],
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn closure_is_bracket_closed(a in prop::array::uniform9(-1.0f64..1.0),
                                     b in prop::array::uniform9(-1.0f64..1.0)) {
            let s = lie_closure(&[Mat::from_real(3, 3, &a), Mat::from_real(3, 3, &b)],
                                RANK_TOL, MAX_DEPTH).unwrap();
            for x in s.basis() {
                for y in s.basis() {
                    prop_assert!(s.residual(&comm(x, y)) < 1e-8);
                }
            }
        }

        #[test]
        fn closure_is_monotone(a in prop::array::uniform9(-1.0f64..1.0),
                               b in prop::array::uniform9(-1.0f64..1.0)) {
            let ma = Mat::from_real(3, 3, &a);
            let one = lie_closure(std::slice::from_ref(&ma), RANK_TOL, MAX_DEPTH).unwrap().dim();
            let two = lie_closure(&[ma, Mat::from_real(3, 3, &b)], RANK_TOL, MAX_DEPTH).unwrap().dim();
            prop_assert!(two >= one);
        }

        #[test]
        fn two_generic_qubit_controls_give_h(x in prop::array::uniform4(-1.0f64..1.0),
                                             y in prop::array::uniform4(-1.0f64..1.0)) {
            let hx = herm2(x);
            let hy = herm2(y);
            // traceless parts must be independent for a generic pair
            let tl = |m: &Mat| m - &Mat::identity(2).scale(m.trace().re / 2.0);
            prop_assume!(crate::matcore::orthonormal_span(&[tl(&hx), tl(&hy)], 1e-3).dim() == 2);
            let sys = ControlSystem::quantum(Rep::Qubit, Mat::zeros(2, 2), vec![hx, hy], vec![]).unwrap();
            prop_assert!(check_conditions(&sys).unwrap().holds_h);
        }

        #[test]
        fn cartan_parts_orthogonal(a in prop::array::uniform9(-2.0f64..2.0)) {
            let m = Mat::from_real(3, 3, &a);
            let (k, q) = cartan_split(&m).unwrap();
            prop_assert!(k.inner(&q).abs() < 1e-12);
            prop_assert!((&k + &q).approx_eq(&m, 1e-15));
            let (kk, kq) = cartan_split(&k).unwrap();
            prop_assert!(kk.approx_eq(&k, 0.0) && kq.max_abs() < 1e-15);
        }
    }

    #[test]
    fn ad_hat_closure_of_two_qubit_locals_is_six() {
        use crate::channels::pauli;
        let i2 = Mat::identity(2);
        let gens: Vec<Mat> = [X, Y]
            .iter()
            .flat_map(|&a| {
                [
                    ad_hat(&kron(&pauli(a), &i2).scale(0.5)).unwrap().times_i(),
                    ad_hat(&kron(&i2, &pauli(a)).scale(0.5)).unwrap().times_i(),
                ]
            })
            .collect();
        let s = lie_closure(&gens, RANK_TOL, MAX_DEPTH).unwrap();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.field(), Field::Complex);
    }

    #[test]
    fn non_unital_systems_use_the_affine_target() {
        use crate::channels::pauli;
        let mut lower = Mat::zeros(2, 2);
        lower.set(0, 1, crate::matcore::ONE);
        let sys = ControlSystem::quantum(
            Rep::Qubit,
            pauli(Z).scale(0.5),
            vec![pauli(X).scale(0.5), pauli(Y).scale(0.5)],
            vec![(lower, 0.3)],
        )
        .unwrap();
        assert!(!sys.is_unital());
        let r = check_conditions(&sys).unwrap();
        assert_eq!((r.dim_kc, r.dim_target_k, r.dim_target_s), (3, 3, 12));
        assert!(r.holds_h);
        assert_eq!(r.dim_s, 12);
        assert!(r.holds_a);
    }
}
