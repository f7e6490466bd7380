use super::mat::{Mat, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Hermitian tolerance for accepting eigensolver input, relative to max |S_ij|.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigen-decomposition of a real symmetric or complex Hermitian matrix.
///
/// Cyclic Jacobi sweeps; each complex pivot is first rotated to a real entry by
/// a diagonal phase and then annihilated by a real plane rotation. Returns
/// eigenvalues in descending order and eigenvectors as the columns of `V`,
/// so `S = V·diag(λ)·V†`.
pub fn eig_sym(s: &Mat) -> Result<(Vec<f64>, Mat)> {
    s.require_square("eig_sym")?;
    let n = s.rows();
    let scale = s.max_abs();
    let defect = s.hermitian_defect();
    if defect > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian {
            what: "eig_sym input",
            deviation: defect,
        });
    }
    // symmetrize so rounding in the input cannot bias the sweep
    let mut a: Vec<C64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (s.get(i, j) + s.get(j, i).conj()) * 0.5
        })
        .collect();
    let mut v: Vec<C64> = Mat::identity(n).data().to_vec();
    if n == 0 {
        return Ok((vec![], Mat::zeros(0, 0)));
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * total.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                // U acts on columns p,q: U = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let upp = C64::new(c, 0.0);
                let upq = C64::new(sn, 0.0);
                let uqp = phase.conj() * (-sn);
                let uqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * upp + akq * uqp;
                    a[k * n + q] = akp * upq + akq * uqq;
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * upp + vkq * uqp;
                    v[k * n + q] = vkp * upq + vkq * uqq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = upp.conj() * apk + uqp.conj() * aqk;
                    a[q * n + k] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].re.total_cmp(&a[x * n + x].re));
    let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let vecs = Mat::from_fn(n, n, |r, c| v[r * n + order[c]]);
    let vecs = if s.is_real() { vecs.chop_imag(0.0) } else { vecs };
    Ok((vals, vecs))
}

/// Eigenvalues only, descending.
pub fn eigvals_sym(s: &Mat) -> Result<Vec<f64>> {
    eig_sym(s).map(|(l, _)| l)
}

/// Rebuild V·diag(λ)·V†.
pub fn reconstruct(vals: &[f64], vecs: &Mat) -> Mat {
    let n = vals.len();
    let d = Mat::from_fn(n, n, |i, j| if i == j { ONE * vals[i] } else { ZERO });
    &(vecs * &d) * &vecs.adjoint()
}
