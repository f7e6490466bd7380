//! Lie wedges as edge ⊕ (−cone), the saturation procedure and cone oracles.
//!
//! Cones are stored with positive orientation: they hold the generators ℒ of
//! the dynamics, whose propagators are expm(−tℒ). The wedge itself is
//! `edge ⊕ (−cone)`.

mod cone;
mod nnls;
mod oracles;

pub use cone::{Cone, Membership, Orbit, CONE_TOL};
pub use nnls::{nnls, NnlsSolution};

pub(crate) use cone::ascend as orbit_ascend;
pub use oracles::{
    corollary2_check, dual_cone_contains, dual_cone_value, globality_check, haar_unitary, majorization_cone_contains,
    majorized, orbit_min, outer_wedge_check, random_rotation, GlobalityReport, OuterReport,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::liealg::{lie_closure, MAX_DEPTH};
use crate::lindblad::ControlSystem;
use crate::matcore::{comm, eig_sym, expm, span_in, Mat, Subspace, RANK_TOL};
use crate::par::{task_rng, Exec};

/// Edge plus pointed cone.
#[derive(Clone, Debug)]
pub struct Wedge {
    pub edge: Subspace,
    pub cone: Cone,
}

impl Wedge {
    /// dim E(𝔴) + dim span(cone).
    pub fn dim(&self) -> usize {
        self.edge.dim() + self.cone_span_dim()
    }

    pub fn cone_span_dim(&self) -> usize {
        self.cone.span().dim()
    }

    /// ℒ lies in edge ⊕ cone (positive orientation).
    pub fn contains_generator(&self, l: &Mat, tol: f64) -> bool {
        if l.shape() != self.edge.shape() {
            return false;
        }
        let rest = self.edge.reject(l);
        if rest.norm() <= tol * l.norm().max(1.0) {
            return true;
        }
        self.cone.contains(&rest, tol)
    }

    /// X lies in edge ⊕ (−cone).
    pub fn contains(&self, x: &Mat, tol: f64) -> bool {
        self.contains_generator(&-x, tol)
    }
}

/// Starting wedge: edge spanned by the control directions, cone the ray through the drift.
pub fn initial_wedge(sys: &ControlSystem) -> Wedge {
    let (r, c) = sys.carrier_shape();
    let field = sys.field();
    let edge = span_in((r, c), field, &sys.control_generators(), RANK_TOL);
    let cone = Cone::from_generators((r, c), field, &[sys.drift_generator()]);
    Wedge { edge, cone }
}

/// Knobs of [`saturate`].
#[derive(Clone, Copy, Debug)]
pub struct SaturateOptions {
    /// Random edge exponentials for non-abelian edges.
    pub orbit_samples: usize,
    /// Grid points along a one-parameter edge (total for abelian product grids).
    pub grid: usize,
    pub max_rounds: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SaturateOptions {
    fn default() -> Self {
        SaturateOptions {
            orbit_samples: 500,
            grid: 720,
            max_rounds: 10,
            tol: CONE_TOL,
            seed: 0x5eed,
            exec: Exec::default(),
        }
    }
}

/// Outcome of [`saturate`]; `converged` is false when `max_rounds` ran out.
#[derive(Clone, Debug)]
pub struct Saturation {
    pub wedge: Wedge,
    pub rounds: usize,
    pub converged: bool,
    pub edge_dims: Vec<usize>,
    pub generator_counts: Vec<usize>,
}

fn spectral_radius(b: &Mat) -> f64 {
    // b is skew-Hermitian, so i·b is Hermitian
    let h = b.times_i();
    let h = (&h + &h.adjoint()).scale(0.5);
    eig_sym(&h)
        .map(|(v, _)| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .unwrap_or(0.0)
}

/// Smallest T ∈ {2πk/ω} with e^{T·b} = 1, if any.
fn period(b: &Mat) -> Option<f64> {
    let w = spectral_radius(b);
    if w <= 1e-12 {
        return None;
    }
    let id = Mat::identity(b.rows());
    (1..=12)
        .map(|k| std::f64::consts::TAU * k as f64 / w)
        .find(|&t| expm(&b.scale(t)).dist_max(&id) < 1e-9)
}

fn is_abelian(basis: &[Mat]) -> bool {
    basis
        .iter()
        .enumerate()
        .all(|(i, a)| basis[i + 1..].iter().all(|b| comm(a, b).max_abs() < 1e-12))
}

/// Group elements exp(E), E in the edge: a uniform grid over one period for
/// abelian periodic edges, random exponentials otherwise. The identity comes first.
pub fn edge_samples(edge: &Subspace, opts: &SaturateOptions) -> Vec<Mat> {
    let n = edge.shape().0;
    let basis = edge.basis();
    let dim = basis.len();
    if dim == 0 {
        return vec![Mat::identity(n)];
    }
    let periods: Option<Vec<f64>> = if is_abelian(basis) {
        basis.iter().map(period).collect()
    } else {
        None
    };
    if let Some(ps) = periods {
        let per_axis = ((opts.grid as f64).powf(1.0 / dim as f64).ceil() as usize).max(2);
        let total = per_axis.pow(dim as u32);
        return opts.exec.map(total, |mut idx| {
            let mut e = Mat::zeros(n, n);
            for (b, p) in basis.iter().zip(&ps) {
                let j = idx % per_axis;
                idx /= per_axis;
                e.axpy(p * j as f64 / per_axis as f64, b);
            }
            expm(&e)
        });
    }
    let scale = std::f64::consts::PI * 2f64.sqrt() / (dim as f64).sqrt();
    let mut out = vec![Mat::identity(n)];
    out.extend(opts.exec.map(opts.orbit_samples, |i| {
        let mut rng = task_rng(opts.seed, i as u64);
        let mut e = Mat::zeros(n, n);
        for b in basis {
            let x: f64 = rng.sample(StandardNormal);
            e.axpy(x * scale, b);
        }
        expm(&e)
    }));
    out
}

fn normalized_mod_edge(edge: &Subspace, g: &Mat, tol: f64) -> Option<Mat> {
    let r = edge.reject(g);
    let n = r.norm();
    if n <= tol * g.norm().max(1e-300) {
        None
    } else {
        Some(r.scale(1.0 / n))
    }
}

/// Alternates edge growth and orbit closure of the cone until both stop changing.
///
/// Each round Lie-closes edge + lineality, conjugates the (edge-reduced) initial
/// cone generators by sampled edge exponentials and appends the conjugates that
/// are not yet members. Edge samples depend only on the edge and the seed, so a
/// round with unchanged edge and no novel conjugate is a fixed point. On return
/// the cone carries an orbit handle used by [`Cone::contains`].
pub fn saturate(w: &Wedge, opts: &SaturateOptions) -> Result<Saturation> {
    let shape = w.edge.shape();
    let field = w.edge.field().join(w.cone.field());
    let seeds0: Vec<Mat> = w.cone.generators().to_vec();
    let mut edge = w.edge.clone();
    let mut cone = w.cone.clone();
    let mut edge_dims = vec![];
    let mut counts = vec![];
    let mut converged = false;
    let mut rounds = 0;
    let mut seeds: Vec<Mat> = vec![];

    for round in 0..opts.max_rounds {
        rounds = round + 1;
        let lin = cone.lineality(opts.tol);
        let mut gens: Vec<Mat> = edge.basis().to_vec();
        gens.extend(lin.basis().iter().cloned());
        let new_edge = if gens.is_empty() {
            Subspace::empty(shape, field, RANK_TOL)
        } else {
            lie_closure(&gens, RANK_TOL, MAX_DEPTH)?
        };
        let edge_changed = new_edge.dim() != edge.dim();
        edge = new_edge;
        seeds = seeds0
            .iter()
            .filter_map(|g| normalized_mod_edge(&edge, g, 1e-9))
            .collect();
        if edge_changed || round == 0 {
            let kept: Vec<Mat> = cone
                .generators()
                .iter()
                .filter_map(|g| normalized_mod_edge(&edge, g, 1e-9))
                .collect();
            cone = Cone::from_generators(shape, field, &kept);
        }
        let samples = edge_samples(&edge, opts);
        let edge_ref = &edge;
        let seeds_ref = &seeds;
        let cands: Vec<Mat> = opts
            .exec
            .map(samples.len() * seeds.len(), |k| {
                let u = &samples[k / seeds_ref.len()];
                let g = &seeds_ref[k % seeds_ref.len()];
                let c = &(u * g) * &u.adjoint();
                normalized_mod_edge(edge_ref, &c, 1e-9)
            })
            .into_iter()
            .flatten()
            .collect();
        let cone_ref = &cone;
        let novel_flags = opts.exec.map_slice(&cands, |c| !cone_ref.contains_sampled(c, opts.tol));
        let novel: Vec<Mat> = cands
            .into_iter()
            .zip(novel_flags)
            .filter_map(|(c, f)| f.then_some(c))
            .collect();
        let any_novel = !novel.is_empty();
        cone.extend(&novel);
        edge_dims.push(edge.dim());
        counts.push(cone.len());
        if !any_novel && !edge_changed {
            converged = true;
            break;
        }
    }
    let orbit = Orbit {
        edge: cone::orbit_edge(&edge),
        seeds,
    };
    Ok(Saturation {
        wedge: Wedge {
            edge,
            cone: cone.with_orbit(orbit),
        },
        rounds,
        converged,
        edge_dims,
        generator_counts: counts,
    })
}

/// Elements of ⟨edge⟩ drawn by random exponentials (for invariance tests).
pub fn random_edge_element(edge: &Subspace, rng: &mut impl Rng, scale: f64) -> Mat {
    let n = edge.shape();
    let mut e = Mat::zeros(n.0, n.1);
    for b in edge.basis() {
        let x: f64 = rng.sample(StandardNormal);
        e.axpy(x * scale, b);
    }
    e
}

#[cfg(test)]
mod tests;
