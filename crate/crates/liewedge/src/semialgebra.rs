//! Truncated BCH products, tangent spaces of wedges and the semialgebra tests.
//!
//! All wedges here are taken with positive orientation, edge ⊕ cone. Since
//! (−A)⋆(−B) = −(B⋆A), a wedge is a semialgebra iff its negative is.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::r3::{gamma0, h, p};
use crate::channels::{r3_system, Axis};
use crate::error::{invalid, Error, Result};
use crate::matcore::{comm, eigvals_sym, orthonormal_span, Mat, Subspace, RANK_TOL};
use crate::par::{task_rng, Exec};
use crate::wedge::{dual_cone_value, initial_wedge, saturate, SaturateOptions, Wedge, CONE_TOL};

pub const MAX_BCH_ORDER: usize = 4;
/// Default scale of the probe pair.
pub const PROBE_T: f64 = 1e-2;
/// Witness threshold on the offending component, measured per t².
pub const PROBE_TOL: f64 = 1e-4;
/// Relative tolerance for tangent-space containment tests.
pub const TANGENT_TOL: f64 = 1e-8;

/// Baker–Campbell–Hausdorff series of log(e^A e^B) truncated at `order` (1 to 4).
pub fn bch(a: &Mat, b: &Mat, order: usize) -> Result<Mat> {
    if order == 0 || order > MAX_BCH_ORDER {
        return invalid(format!("BCH order must be in 1..={MAX_BCH_ORDER}, got {order}"));
    }
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::ShapeMismatch {
            op: "bch",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = a + b;
    if order >= 2 {
        let ab = comm(a, b);
        out.axpy(0.5, &ab);
        if order >= 3 {
            let aab = comm(a, &ab);
            let bba = comm(b, &comm(b, a));
            out.axpy(1.0 / 12.0, &aab);
            out.axpy(1.0 / 12.0, &bba);
            if order >= 4 {
                out.axpy(-1.0 / 24.0, &comm(b, &aab));
            }
        }
    }
    Ok(out)
}

/// Nearest point of edge ⊕ cone to `x`, with the distance.
///
/// Uses the orthogonal split edge ⊥ cone that saturated wedges carry.
pub fn wedge_projection(w: &Wedge, x: &Mat) -> (Mat, f64) {
    let e = w.edge.project(x);
    let rest = w.edge.reject(x);
    let m = w.cone.membership(&rest, 1e-12);
    let mut approx = e;
    for (c, g) in m.weights.iter().zip(&m.columns) {
        if *c != 0.0 {
            approx.axpy(*c, g);
        }
    }
    (approx, m.residual)
}

/// A pair whose BCH product leaves the wedge.
#[derive(Clone, Debug)]
pub struct BchWitness {
    pub a: Mat,
    pub b: Mat,
    pub t: f64,
    pub order: usize,
    pub product: Mat,
    /// (product − nearest wedge point) / t².
    pub offending: Mat,
    /// ‖offending‖.
    pub residual: f64,
}

/// Tests bch(tA, tB) for membership; returns a witness when the offending part
/// exceeds `tol` (per t²).
pub fn probe_pair(w: &Wedge, a: &Mat, b: &Mat, t: f64, order: usize, tol: f64) -> Result<Option<BchWitness>> {
    if t <= 0.0 {
        return invalid("probe scale t must be positive");
    }
    let product = bch(&a.scale(t), &b.scale(t), order)?;
    let (approx, _) = wedge_projection(w, &product);
    let offending = (&product - &approx).scale(1.0 / (t * t));
    let residual = offending.norm();
    Ok((residual > tol).then(|| BchWitness {
        a: a.clone(),
        b: b.clone(),
        t,
        order,
        product,
        offending,
        residual,
    }))
}

/// Knobs of [`semialgebra_probe`].
#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub pairs: usize,
    pub t_grid: Vec<f64>,
    pub order: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            pairs: 10_000,
            t_grid: vec![PROBE_T],
            order: MAX_BCH_ORDER,
            tol: PROBE_TOL,
            seed: 0xb0c4,
            exec: Exec::default(),
        }
    }
}

/// A random wedge element: a generator, an edge direction, or a mixture.
fn random_wedge_element(w: &Wedge, rng: &mut impl Rng) -> Mat {
    let (r, c) = w.edge.shape();
    let gens = w.cone.generators();
    let edge = w.edge.basis();
    let mut x = Mat::zeros(r, c);
    let kind = rng.random_range(0..3);
    if (kind == 0 || edge.is_empty()) && !gens.is_empty() {
        x += &gens[rng.random_range(0..gens.len())];
        return x;
    }
    if kind == 1 && !edge.is_empty() {
        for b in edge {
            x.axpy(rng.sample(StandardNormal), b);
        }
        return x;
    }
    for b in edge {
        x.axpy(rng.sample::<f64, _>(StandardNormal), b);
    }
    if !gens.is_empty() {
        for _ in 0..3 {
            let g = &gens[rng.random_range(0..gens.len())];
            x.axpy(rng.random_range(0.0..1.0), g);
        }
    }
    x
}

/// Searches random wedge pairs for a BCH product outside the wedge.
///
/// `None` means no counterexample at this sampling budget, not a proof.
pub fn semialgebra_probe(w: &Wedge, opts: &ProbeOptions) -> Result<Option<BchWitness>> {
    if opts.t_grid.is_empty() {
        return invalid("empty t grid");
    }
    // chunks keep the first witness in index order while allowing an early stop
    const CHUNK: usize = 64;
    let mut start = 0;
    while start < opts.pairs {
        let len = CHUNK.min(opts.pairs - start);
        let results = opts.exec.map(len, |i| -> Result<Option<BchWitness>> {
            let mut rng = task_rng(opts.seed, (start + i) as u64);
            let a = random_wedge_element(w, &mut rng);
            let b = random_wedge_element(w, &mut rng);
            for &t in &opts.t_grid {
                if let Some(wt) = probe_pair(w, &a, &b, t, opts.order, opts.tol)? {
                    return Ok(Some(wt));
                }
            }
            Ok(None)
        });
        for r in results {
            if let Some(wt) = r? {
                return Ok(Some(wt));
            }
        }
        start += len;
    }
    Ok(None)
}

/// How dual-wedge candidates are certified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualOracle {
    /// Against the stored generators and, if present, the orbit handle.
    Generators,
    /// c·λ₁ + b·λ₂ + a·λ₃ ≥ 0 for orbit cones of diag(a, b, c) with edge 𝔰𝔬(3).
    Eigenvalue([f64; 3]),
}

fn in_dual(w: &Wedge, d: &Mat, oracle: DualOracle) -> Result<bool> {
    let tol = 1e-9 * d.norm().max(1e-300);
    match oracle {
        DualOracle::Eigenvalue(g) => Ok(dual_cone_value(g, &d.scale(1.0 / d.norm()))? >= -1e-9),
        DualOracle::Generators => {
            let gens = w.cone.generators();
            let mut worst: Option<(f64, &Mat)> = None;
            for g in gens {
                let v = g.inner(d);
                if worst.is_none_or(|(wv, _)| v < wv) {
                    worst = Some((v, g));
                }
            }
            let Some((wv, start)) = worst else { return Ok(true) };
            if wv < -tol {
                return Ok(false);
            }
            if let Some(orbit) = w.cone.orbit() {
                if !orbit.edge.is_empty() {
                    let g = crate::wedge::orbit_ascend(&orbit.edge, start, &-d);
                    return Ok(g.inner(d) / g.norm() >= -tol);
                }
            }
            Ok(true)
        }
    }
}

/// T_A𝔴 = (A^⊥ ∩ 𝔴*)^⊥.
///
/// Dual candidates are drawn from the linear space cut out by the edge, by the
/// cone generators carrying A and, for orbit cones, by the orbit tangents at
/// those generators (a dual functional vanishing at an orbit point is
/// stationary there). Candidates certified by `oracle` are kept until their
/// span stops growing or `samples` draws are used.
pub fn tangent_space(w: &Wedge, a: &Mat, oracle: DualOracle, samples: usize, seed: u64) -> Result<Subspace> {
    let shape = w.edge.shape();
    if a.shape() != shape {
        return invalid("tangent_space: shape mismatch");
    }
    let rest = w.edge.reject(a);
    let m = w.cone.membership(&rest, CONE_TOL);
    if !m.member {
        return invalid(format!("point is not in the wedge (residual {:.3e})", m.residual));
    }
    let wmax = m.weights.iter().fold(0.0f64, |x, y| x.max(*y));
    let active: Vec<&Mat> = m
        .weights
        .iter()
        .zip(&m.columns)
        .filter(|(c, _)| **c > 1e-9 * wmax)
        .map(|(_, g)| g)
        .collect();
    let field = w.edge.field().join(w.cone.field());
    let mut cons = Subspace::empty(shape, field, RANK_TOL);
    cons.extend(w.edge.basis());
    for g in &active {
        cons.extend(&[(*g).clone()]);
        if let Some(orbit) = w.cone.orbit() {
            let tangents: Vec<Mat> = orbit.edge.iter().map(|e| comm(e, g)).collect();
            cons.extend(&tangents);
        }
    }
    let free = cons.orthocomplement();
    let mut face = Subspace::empty(shape, field, RANK_TOL);
    let mut rng = task_rng(seed, 0);
    let mut stale = 0;
    for _ in 0..samples {
        if face.dim() == free.dim() || stale > 200 {
            break;
        }
        let c: Vec<f64> = (0..free.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let d = free.from_coords(&c);
        if in_dual(w, &d, oracle)? && !face.extend(&[d]).is_empty() {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    let mut t = face.orthocomplement();
    t.extend(&[]);
    Ok(t)
}

/// The four shapes of the relaxation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Γ₀ = λ·1.
    I,
    /// Γ₀ = diag(1, 0, 0).
    Ii,
    /// Γ₀ = diag(1, 1, 0).
    Iii,
    /// Γ₀ = diag(a, b, c), a > b > c ≥ 0.
    Iv,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::I, Case::Ii, Case::Iii, Case::Iv];

    pub fn as_str(self) -> &'static str {
        match self {
            Case::I => "i",
            Case::Ii => "ii",
            Case::Iii => "iii",
            Case::Iv => "iv",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Case> {
        Case::ALL
            .into_iter()
            .find(|c| c.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown case {s:?} (expected i, ii, iii or iv)")))
    }
}

/// Parameters of [`semialgebra_case`].
#[derive(Clone, Debug)]
pub struct CaseParams {
    /// λ of case (i).
    pub lambda: f64,
    /// (a, b, c) of case (iv).
    pub abc: [f64; 3],
    /// Rotation axis ν of A = Γ₀ + H_ν in case (iv).
    pub nu: Axis,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CaseParams {
    fn default() -> Self {
        CaseParams {
            lambda: 1.0,
            abc: [3.0, 2.0, 1.0],
            nu: Axis::Z,
            samples: 10_000,
            seed: 0x7a9,
        }
    }
}

/// Outcome of one case of the inclusion test [A, T_A𝔴] ⊂ T_A𝔴.
#[derive(Clone, Debug)]
pub struct CaseReport {
    pub case: Case,
    pub gamma: [f64; 3],
    pub a: Mat,
    pub tangent: Subspace,
    pub closed_form: Subspace,
    /// Largest distance between the sampled and the closed-form tangent space.
    pub tangent_defect: f64,
    /// True when every [A, T_k] stays in the tangent space.
    pub semialgebra: bool,
    /// (B, [A, B]) with B ∈ T_A𝔴 and [A, B] ∉ T_A𝔴.
    pub witness: Option<(Mat, Mat)>,
}

fn subspace_defect(a: &Subspace, b: &Subspace) -> f64 {
    let x = a.basis().iter().map(|m| b.residual(m)).fold(0.0, f64::max);
    let y = b.basis().iter().map(|m| a.residual(m)).fold(0.0, f64::max);
    if a.dim() != b.dim() {
        f64::INFINITY
    } else {
        x.max(y)
    }
}

fn so3() -> Vec<Mat> {
    Axis::ALL.iter().map(|&a| h(a)).collect()
}

/// Saturated wedge 𝔰𝔬(3) ⊕ ℝ₀⁺ conv 𝒪(Γ₀) of the ℝ³ system with controls H_x, H_y.
pub fn orbit_wedge(gamma: [f64; 3]) -> Result<Wedge> {
    let sys = r3_system(Some(Axis::Z), &[Axis::X, Axis::Y], gamma)?;
    Ok(saturate(&initial_wedge(&sys), &SaturateOptions::default())?.wedge)
}

/// Runs one case with the canonical choices of A and B.
pub fn semialgebra_case(case: Case, params: &CaseParams) -> Result<CaseReport> {
    let (gamma, axis, extra, bs): ([f64; 3], Axis, Vec<Mat>, Vec<Mat>) = match case {
        Case::I => {
            if !(params.lambda > 0.0) {
                return invalid("case (i) needs λ > 0");
            }
            let l = params.lambda;
            ([l; 3], Axis::Z, vec![Mat::identity(3)], vec![])
        }
        Case::Ii => ([1.0, 0.0, 0.0], Axis::Z, vec![p(Axis::Y), p(Axis::Z)], vec![p(Axis::Z)]),
        Case::Iii => ([1.0, 1.0, 0.0], Axis::Y, vec![p(Axis::X), p(Axis::Y)], vec![p(Axis::Y)]),
        Case::Iv => {
            let [a, b, c] = params.abc;
            if !(a > b && b > c && c >= 0.0) {
                return invalid(format!("case (iv) needs a > b > c >= 0, got {:?}", params.abc));
            }
            let nu = params.nu;
            let mut bs = vec![p(nu)];
            bs.extend(Axis::ALL.iter().filter(|&&x| x != nu).map(|&x| p(x)));
            (params.abc, nu, Axis::ALL.iter().map(|&x| p(x)).collect(), bs)
        }
    };
    let g0 = gamma0(gamma);
    let a = &g0 + &h(axis);
    let w = orbit_wedge(gamma)?;
    let tangent = tangent_space(&w, &a, DualOracle::Eigenvalue(gamma), params.samples, params.seed)?;

    let mut cf = so3();
    if case != Case::I {
        cf.push(g0.clone());
    }
    cf.extend(extra);
    let closed_form = orthonormal_span(&cf, RANK_TOL);
    let tangent_defect = subspace_defect(&tangent, &closed_form);

    let outside = |x: &Mat| tangent.residual(x) > TANGENT_TOL * x.norm().max(1.0);
    let semialgebra = !tangent.basis().iter().any(|t| outside(&comm(&a, t)));
    let mut witness = None;
    if !semialgebra {
        let mut cands = bs;
        cands.extend(tangent.basis().iter().cloned());
        witness = cands
            .into_iter()
            .filter(|b| !outside(b))
            .map(|b| {
                let c = comm(&a, &b);
                (b, c)
            })
            .find(|(_, c)| outside(c));
    }
    Ok(CaseReport {
        case,
        gamma,
        a,
        tangent,
        closed_form,
        tangent_defect,
        semialgebra,
        witness,
    })
}

/// Smallest eigenvalue of the symmetric part, a cheap dual certificate used in tests.
pub fn min_sym_eig(x: &Mat) -> Result<f64> {
    let s = (x + &x.transpose()).scale(0.5);
    Ok(*eigvals_sym(&s)?.last().unwrap_or(&0.0))
}
