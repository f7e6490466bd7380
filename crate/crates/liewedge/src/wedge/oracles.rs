use rand::Rng;
use rand_distr::StandardNormal;

use super::cone::{ascend, Cone};
use super::Wedge;
use crate::error::{invalid, Result};
use crate::liealg::cartan_split;
use crate::lindblad::{ad_hat, coherence_basis, coherence_rep, ControlSystem};
use crate::matcore::{comm, eigvals_sym, kron, Mat, Subspace, C64, RANK_TOL};
use crate::par::task_rng;

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_gamma(gamma: [f64; 3]) -> Result<()> {
    let [a, b, c] = gamma;
    if !(a >= b && b >= c && c >= 0.0) {
        return invalid(format!("relaxation rates must satisfy a >= b >= c >= 0, got {gamma:?}"));
    }
    Ok(())
}

/// c·λ₁(S) + b·λ₂(S) + a·λ₃(S) with λ descending.
pub fn dual_cone_value(gamma: [f64; 3], s: &Mat) -> Result<f64> {
    check_gamma(gamma)?;
    if s.shape() != (3, 3) {
        return invalid("dual cone test needs a 3x3 matrix");
    }
    let l = eigvals_sym(s)?;
    let [a, b, c] = gamma;
    Ok(c * l[0] + b * l[1] + a * l[2])
}

/// S lies in the dual of ℝ₀⁺ conv 𝒪_{SO(3)}(diag(a,b,c)).
pub fn dual_cone_contains(gamma: [f64; 3], s: &Mat, tol: f64) -> Result<bool> {
    Ok(dual_cone_value(gamma, s)? >= -tol)
}

/// Eigenvalues of S are majorized by `gamma`.
pub fn majorized(s: &Mat, gamma: &[f64], tol: f64) -> Result<bool> {
    if s.rows() != gamma.len() {
        return invalid("majorized: size mismatch");
    }
    let ls = eigvals_sym(s)?;
    let g = sorted_desc(gamma.to_vec());
    let tol = tol * g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let (mut ps, mut pg) = (0.0, 0.0);
    for k in 0..g.len() {
        ps += ls[k];
        pg += g[k];
        if k + 1 < g.len() && ps > pg + tol {
            return Ok(false);
        }
    }
    Ok((ps - pg).abs() <= tol)
}

/// S ∈ ℝ₀⁺·{T | T ≺ diag(gamma)}, the majorization hull up to scale.
pub fn majorization_cone_contains(s: &Mat, gamma: &[f64], tol: f64) -> Result<bool> {
    let tg: f64 = gamma.iter().sum();
    if tg <= 0.0 {
        return invalid("majorization cone needs a positive trace");
    }
    let ts = s.trace().re;
    let scale = s.norm().max(1.0);
    if ts.abs() <= tol * scale {
        return Ok(s.norm() <= tol * scale);
    }
    if ts < 0.0 {
        return Ok(false);
    }
    majorized(&s.scale(tg / ts), gamma, tol)
}

type R3 = [[f64; 3]; 3];

fn quat_rotation(q: [f64; 4]) -> R3 {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn haar_r3(rng: &mut impl Rng) -> R3 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    quat_rotation(q)
}

fn r3_to_mat(r: &R3) -> Mat {
    Mat::from_fn(3, 3, |i, j| C64::new(r[i][j], 0.0))
}

/// Haar-random element of SO(3).
pub fn random_rotation(rng: &mut impl Rng) -> Mat {
    r3_to_mat(&haar_r3(rng))
}

/// Haar-random unitary of size n (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> Mat {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for _ in 0..2 {
            for q in &cols {
                let s: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= s * y;
                }
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        cols.push(v);
    }
    Mat::from_fn(n, n, |i, j| cols[j][i])
}

fn orbit_value(s: &Mat, gamma: &[f64; 3], r: &R3) -> f64 {
    let mut v = 0.0;
    for (k, g) in gamma.iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                v += g * r[i][k] * s.get(i, j).re * r[j][k];
            }
        }
    }
    v
}

/// min over rotations Θ of ⟨S, Θ diag(gamma) Θᵀ⟩: Monte-Carlo over `samples`
/// Haar rotations, then gradient polish of the five best.
pub fn orbit_min(s: &Mat, gamma: [f64; 3], samples: usize, seed: u64) -> Result<f64> {
    if s.shape() != (3, 3) {
        return invalid("orbit_min needs a 3x3 matrix");
    }
    let mut rng = task_rng(seed, 0);
    let mut best: Vec<(f64, R3)> = Vec::with_capacity(samples);
    for _ in 0..samples.max(1) {
        let r = haar_r3(&mut rng);
        best.push((orbit_value(s, &gamma, &r), r));
    }
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    let g0 = Mat::diag_real(&gamma);
    let edge: Vec<Mat> = [(2, 1), (0, 2), (1, 0)]
        .iter()
        .map(|&(i, j)| {
            let mut h = Mat::zeros(3, 3);
            h.set(i, j, C64::new(1.0 / 2f64.sqrt(), 0.0));
            h.set(j, i, C64::new(-1.0 / 2f64.sqrt(), 0.0));
            h
        })
        .collect();
    let neg = s.scale(-1.0);
    let mut m = best[0].0;
    for (_, r) in best.iter().take(5) {
        let rm = r3_to_mat(r);
        let start = &(&rm * &g0) * &rm.transpose();
        let g = ascend(&edge, &start, &neg);
        m = m.min(g.inner(s));
    }
    Ok(m)
}

/// Worst-case residuals of the four outer-approximation conditions.
#[derive(Clone, Debug)]
pub struct OuterReport {
    /// (1) Γ_L in the cone.
    pub gamma_in_cone: bool,
    pub gamma_residual: f64,
    /// (2) symmetric part of [g₁,g₂] in the coherence representation.
    pub bracket_skew_residual: f64,
    /// (2) distance of [g₁,g₂] from the span of i·ad_hat(H).
    pub bracket_adhat_residual: f64,
    /// (3) relative distance of [g, i·ad_hat(H)] from span(cone).
    pub span_residual: f64,
    /// (4) membership residual of Û g Û†.
    pub ad_invariance_residual: f64,
    pub pairs: usize,
    pub unitaries: usize,
}

impl OuterReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.gamma_in_cone
            && self.bracket_skew_residual <= tol
            && self.bracket_adhat_residual <= tol
            && self.span_residual <= tol
            && self.ad_invariance_residual <= tol
    }
}

fn adhat_span(n: usize) -> Result<Subspace> {
    let mut gens = vec![];
    for b in coherence_basis(n)? {
        gens.push(ad_hat(&b)?.times_i());
    }
    let mut s = Subspace::empty((n * n, n * n), crate::matcore::Field::Complex, RANK_TOL);
    s.extend(&gens);
    Ok(s)
}

fn random_traceless_hermitian(n: usize, rng: &mut impl Rng) -> Result<Mat> {
    let basis = coherence_basis(n)?;
    let mut h = Mat::zeros(n, n);
    for b in &basis {
        let x: f64 = rng.sample(StandardNormal);
        h.axpy(x, b);
    }
    Ok(h)
}

/// Sampled check of the outer-approximation conditions for a superoperator cone.
pub fn outer_wedge_check(cone: &Cone, gamma_l: &Mat, n: usize, samples: usize, seed: u64) -> Result<OuterReport> {
    if cone.shape() != (n * n, n * n) || gamma_l.shape() != cone.shape() {
        return invalid("outer_wedge_check: cone and Γ_L must act on N×N operators");
    }
    if cone.is_empty() {
        return invalid("outer_wedge_check: empty cone");
    }
    let gens = cone.generators();
    let mut rng = task_rng(seed, 0);
    let gm = cone.membership(gamma_l, 1e-10);

    let adh = adhat_span(n)?;
    let span = cone.span();
    let (mut skew, mut adr, mut spr, mut inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let g1 = &gens[rng.random_range(0..gens.len())];
        let g2 = &gens[rng.random_range(0..gens.len())];
        let c = comm(g1, g2);
        let (_, p) = cartan_split(&coherence_rep(&c)?)?;
        skew = skew.max(p.norm());
        adr = adr.max(adh.residual(&c));

        let h = random_traceless_hermitian(n, &mut rng)?;
        let a = ad_hat(&h)?.times_i();
        let c = comm(g1, &a);
        let cn = c.norm();
        if cn > 1e-300 {
            spr = spr.max(span.residual(&c) / cn);
        }

        let u = haar_unitary(n, &mut rng);
        let uh = kron(&u.conj(), &u);
        let x = &(&uh * g1) * &uh.adjoint();
        inv = inv.max(cone.membership(&x, 1e-10).residual);
    }
    Ok(OuterReport {
        gamma_in_cone: gm.member,
        gamma_residual: gm.residual,
        bracket_skew_residual: skew,
        bracket_adhat_residual: adr,
        span_residual: spr,
        ad_invariance_residual: inv,
        pairs: samples,
        unitaries: samples,
    })
}

/// Ingredients of the globality argument via the candidate function φ(X) = −⟨X,X⟩.
#[derive(Clone, Debug)]
pub struct GlobalityReport {
    pub edge_contains_controls: bool,
    pub unital: bool,
    /// Smallest eigenvalue of the symmetric (𝔭) part of any cone generator in
    /// the coherence representation; φ is monotone when this is ≥ 0.
    pub min_p_eig: f64,
    pub holds: bool,
}

pub fn globality_check(w: &Wedge, sys: &ControlSystem) -> Result<GlobalityReport> {
    let mut edge_ok = true;
    for g in sys.control_generators() {
        edge_ok &= w.edge.contains(&g, 1e-8)?;
    }
    let unital = sys.is_unital();
    let mut min_eig = f64::INFINITY;
    if unital {
        for g in w.cone.generators() {
            let (_, p) = cartan_split(&sys.to_coherence(g)?)?;
            let l = eigvals_sym(&p)?;
            min_eig = min_eig.min(*l.last().unwrap_or(&0.0));
        }
    }
    if w.cone.is_empty() {
        min_eig = 0.0;
    }
    Ok(GlobalityReport {
        edge_contains_controls: edge_ok,
        unital,
        min_p_eig: min_eig,
        holds: edge_ok && unital && min_eig >= -1e-10,
    })
}

/// E(inner) = E(outer) ∩ inner, tested as: the inner edge lies in the outer edge
/// and no direction of E(outer) ∩ span(inner) outside E(inner) belongs to the
/// inner wedge (both signs and `samples` random combinations are tried).
pub fn corollary2_check(inner: &Wedge, outer_edge: &Subspace, samples: usize, seed: u64) -> Result<bool> {
    for b in inner.edge.basis() {
        if !outer_edge.contains(b, 1e-8)? {
            return Ok(false);
        }
    }
    let span = inner.edge.sum(&inner.cone.span());
    let cap = outer_edge.intersection(&span);
    let mut excess = Subspace::empty(cap.shape(), cap.field(), RANK_TOL);
    let rest: Vec<Mat> = cap.basis().iter().map(|b| inner.edge.reject(b)).collect();
    excess.extend(&rest);
    if excess.dim() == 0 {
        return Ok(true);
    }
    let mut dirs: Vec<Mat> = vec![];
    for b in excess.basis() {
        dirs.push(b.clone());
        dirs.push(-b);
    }
    let mut rng = task_rng(seed, 0);
    for _ in 0..samples {
        let c: Vec<f64> = (0..excess.dim()).map(|_| rng.sample(StandardNormal)).collect();
        dirs.push(excess.from_coords(&c));
    }
    Ok(!dirs.iter().any(|d| inner.contains(d, 1e-8)))
}
