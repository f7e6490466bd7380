use std::sync::OnceLock;

use super::nnls::{nnls, NnlsSolution};
use crate::matcore::{comm, expm, orthonormal_span, Field, Mat, Subspace, RANK_TOL};

/// Default relative tolerance of cone membership.
pub const CONE_TOL: f64 = 1e-8;

/// Orbit of a set of seeds under the group generated by `edge`.
///
/// The cone is the conic hull of the orbit; its finite generators are samples.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub edge: Vec<Mat>,
    pub seeds: Vec<Mat>,
}

/// Pointed convex cone given by finitely many unit-norm generators.
#[derive(Clone, Debug)]
pub struct Cone {
    shape: (usize, usize),
    field: Field,
    generators: Vec<Mat>,
    cols: Vec<Vec<f64>>,
    orbit: Option<Orbit>,
    center: OnceLock<Option<Mat>>,
}

/// Result of a membership query.
#[derive(Clone, Debug)]
pub struct Membership {
    pub member: bool,
    /// Distance from x to the (sampled or orbit-completed) cone.
    pub residual: f64,
    /// Conic weights, one per generator consulted (orbit columns appended last).
    pub weights: Vec<f64>,
    /// Generators consulted, including any orbit elements found on the way.
    pub columns: Vec<Mat>,
}

fn flat(m: &Mat, field: Field) -> Vec<f64> {
    match field {
        Field::Real => m.re_vec(),
        Field::Complex => m.to_flat(),
    }
}

fn unflat(v: &[f64], shape: (usize, usize), field: Field) -> Mat {
    match field {
        Field::Real => Mat::from_real(shape.0, shape.1, v),
        Field::Complex => Mat::from_flat(shape.0, shape.1, v),
    }
}

impl Cone {
    pub fn empty(shape: (usize, usize), field: Field) -> Cone {
        Cone {
            shape,
            field,
            generators: vec![],
            cols: vec![],
            orbit: None,
            center: OnceLock::new(),
        }
    }

    /// Cone spanned by `gens`; zero generators are dropped, the rest normalized.
    pub fn from_generators(shape: (usize, usize), field: Field, gens: &[Mat]) -> Cone {
        let field = gens.iter().fold(field, |f, g| f.join(g.field()));
        let mut c = Cone::empty(shape, field);
        c.extend(gens);
        c
    }

    pub fn with_orbit(mut self, orbit: Orbit) -> Cone {
        self.orbit = Some(orbit);
        self.center = OnceLock::new();
        self
    }

    pub fn orbit(&self) -> Option<&Orbit> {
        self.orbit.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }
    pub fn field(&self) -> Field {
        self.field
    }
    pub fn generators(&self) -> &[Mat] {
        &self.generators
    }
    pub fn len(&self) -> usize {
        self.generators.len()
    }
    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Append normalized copies of the nonzero elements of `gens`.
    pub fn extend(&mut self, gens: &[Mat]) {
        for g in gens {
            assert_eq!(g.shape(), self.shape, "Cone::extend: shape mismatch");
            let n = g.norm();
            if n <= 1e-300 {
                continue;
            }
            if !g.is_real() && self.field == Field::Real {
                self.field = Field::Complex;
                self.cols = self.generators.iter().map(|m| m.to_flat()).collect();
            }
            let u = g.scale(1.0 / n);
            let u = if self.field == Field::Real {
                u.chop_imag(f64::INFINITY)
            } else {
                u
            };
            self.cols.push(flat(&u, self.field));
            self.generators.push(u);
        }
    }

    /// Linear span of the generators.
    pub fn span(&self) -> Subspace {
        let mut s = Subspace::empty(self.shape, self.field, RANK_TOL);
        s.extend(&self.generators);
        s
    }

    pub fn nnls(&self, x: &Mat) -> NnlsSolution {
        nnls(&self.cols, &flat(x, self.field.join(x.field())))
    }

    fn threshold(x: &Mat, tol: f64) -> f64 {
        tol * x.norm().max(1.0)
    }

    /// NNLS membership over the stored generators only.
    pub fn contains_sampled(&self, x: &Mat, tol: f64) -> bool {
        if x.shape() != self.shape {
            return false;
        }
        if !x.is_real() && self.field == Field::Real {
            // real cone, complex query: the imaginary part must vanish
            let im = x.map(|z| crate::matcore::C64::new(z.im, 0.0)).norm();
            if im > Self::threshold(x, tol) {
                return false;
            }
            return self.contains_sampled(&x.clone().chop_imag(f64::INFINITY), tol);
        }
        self.nnls(x).residual <= Self::threshold(x, tol)
    }

    /// Membership with column generation over the orbit when one is attached.
    pub fn membership(&self, x: &Mat, tol: f64) -> Membership {
        let thr = Self::threshold(x, tol);
        let field = self.field.join(x.field());
        let b = flat(x, field);
        let mut cols: Vec<Vec<f64>> = if field == self.field {
            self.cols.clone()
        } else {
            self.generators.iter().map(|g| flat(g, field)).collect()
        };
        let mut columns = self.generators.clone();
        let mut sol = nnls(&cols, &b);
        let mut residual = sol.residual;
        let mut weights = sol.x.clone();
        if residual > thr {
            if let Some(orbit) = self.orbit.as_ref().filter(|o| !o.edge.is_empty()) {
                // extreme rays: x may itself lie on the orbit ray
                if let Some(g) = orbit_argmax(orbit, &columns, x) {
                    let c = g.inner(x).max(0.0) / g.inner(&g).max(1e-300);
                    let res = (x - &g.scale(c)).norm();
                    if res <= thr {
                        return Membership {
                            member: true,
                            residual: res,
                            weights: vec![c],
                            columns: vec![g],
                        };
                    }
                    cols.push(flat(&g, field));
                    columns.push(g);
                    sol = nnls(&cols, &b);
                }
                let mut history = vec![sol.residual];
                let mut polished = None;
                let mut separated = false;
                for k in 0..60 {
                    if k % 4 == 1 {
                        let (g, w, res) = refine(&orbit.edge, &columns, &sol.x, x, field, thr);
                        if res <= thr {
                            polished = Some((g, w, res));
                            break;
                        }
                    }
                    let r = unflat(&sol.residual_vec, self.shape, field);
                    let Some(best) = orbit_argmax(orbit, &columns, &r) else {
                        break;
                    };
                    if best.inner(&r) <= 1e-12 * r.norm() {
                        break;
                    }
                    if self.separated(orbit, &columns, &best, &r, x, thr) {
                        separated = true;
                        break;
                    }
                    cols.push(flat(&best, field));
                    columns.push(best);
                    sol = nnls(&cols, &b);
                    history.push(sol.residual);
                    if sol.residual <= thr {
                        break;
                    }
                    // stalled far outside: the residual has converged to the distance
                    let k = history.len();
                    if k > 4 && history[k - 4] - sol.residual < 1e-3 * sol.residual && sol.residual > 1e3 * thr {
                        break;
                    }
                }
                residual = sol.residual;
                weights = sol.x.clone();
                if residual > thr && !separated {
                    let (g, w, res) = polished.unwrap_or_else(|| refine(&orbit.edge, &columns, &sol.x, x, field, thr));
                    if res < residual {
                        columns = g;
                        weights = w;
                        residual = res;
                    }
                }
            }
        }
        Membership {
            member: residual <= thr,
            residual,
            weights,
            columns,
        }
    }

    /// Orbit center: the sum of the edge-invariant parts of the unit seeds.
    fn center(&self, orbit: &Orbit) -> Option<&Mat> {
        self.center
            .get_or_init(|| {
                let mut u = Mat::zeros(self.shape.0, self.shape.1);
                for s in &orbit.seeds {
                    let n = s.norm();
                    if n > 1e-300 {
                        u.axpy(1.0 / n, &invariant_part(&orbit.edge, s));
                    }
                }
                (u.norm() > 1e-12).then_some(u)
            })
            .as_ref()
    }

    /// Certifies dist(x, cone) > thr with y = r − αu in the polar cone, where
    /// u is the orbit center and α lifts the best orbit score to zero.
    fn separated(&self, orbit: &Orbit, columns: &[Mat], best: &Mat, r: &Mat, x: &Mat, thr: f64) -> bool {
        let Some(u) = self.center(orbit) else { return false };
        let unit = |g: &Mat| g.norm().max(1e-300);
        let kappa = orbit
            .seeds
            .iter()
            .chain(columns)
            .map(|g| u.inner(g) / unit(g))
            .fold(f64::INFINITY, f64::min);
        if !(kappa > 0.0) {
            return false;
        }
        let m = columns
            .iter()
            .chain(std::iter::once(best))
            .map(|g| r.inner(g) / unit(g))
            .fold(0.0f64, f64::max);
        let alpha = m / kappa;
        let mut y = r.clone();
        y.axpy(-alpha, u);
        let yn = y.norm();
        yn > 0.0 && y.inner(x) / yn > thr
    }

    /// True iff x is a nonnegative combination of the generators within
    /// `tol·max(1,‖x‖)`, completed over the orbit when one is attached.
    pub fn contains(&self, x: &Mat, tol: f64) -> bool {
        if x.shape() != self.shape {
            return false;
        }
        self.membership(x, tol).member
    }

    /// Generators g with −g in the cone span the lineality space.
    pub fn lineality(&self, tol: f64) -> Subspace {
        let mut out = Subspace::empty(self.shape, self.field, RANK_TOL);
        if self.generators.is_empty() || self.is_pointed_quick() {
            return out;
        }
        let both: Vec<Mat> = self
            .generators
            .iter()
            .filter(|g| self.contains_sampled(&-*g, tol))
            .cloned()
            .collect();
        out.extend(&both);
        out
    }

    /// A strictly positive functional on all generators certifies pointedness.
    fn is_pointed_quick(&self) -> bool {
        let mut f = Mat::zeros(self.shape.0, self.shape.1);
        for g in &self.generators {
            f += g;
        }
        let n = f.norm();
        n > 1e-12 && self.generators.iter().all(|g| g.inner(&f) > 1e-9 * n)
    }

    pub fn is_pointed(&self, tol: f64) -> bool {
        self.lineality(tol).dim() == 0
    }
}

/// Minimum-norm damped least squares: δ = Jᵀ(JJᵀ + μI)⁻¹ b, J given by columns.
fn damped_min_norm(cols: &[Vec<f64>], b: &[f64], mu: f64) -> Option<Vec<f64>> {
    let m = b.len();
    let mut a = vec![0.0; m * m];
    for c in cols {
        for i in 0..m {
            if c[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                a[i * m + j] += c[i] * c[j];
            }
        }
    }
    for i in 0..m {
        a[i * m + i] += mu;
    }
    // Cholesky
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            y[i] -= a[i * m + k] * y[k];
        }
        y[i] /= a[i * m + i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            y[i] -= a[k * m + i] * y[k];
        }
        y[i] /= a[i * m + i];
    }
    Some(
        cols.iter()
            .map(|c| c.iter().zip(&y).map(|(p, q)| p * q).sum())
            .collect(),
    )
}

fn combine(gens: &[Mat], w: &[f64], shape: (usize, usize)) -> Mat {
    let mut m = Mat::zeros(shape.0, shape.1);
    for (g, c) in gens.iter().zip(w) {
        if *c != 0.0 {
            m.axpy(*c, g);
        }
    }
    m
}

/// Gauss–Newton polish of weights and orbit positions of the active columns.
fn refine(edge: &[Mat], columns: &[Mat], w: &[f64], x: &Mat, field: Field, thr: f64) -> (Vec<Mat>, Vec<f64>, f64) {
    let shape = x.shape();
    let wmax = w.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut gens: Vec<Mat> = vec![];
    let mut ws: Vec<f64> = vec![];
    for (g, c) in columns.iter().zip(w) {
        if *c > 1e-12 * wmax {
            gens.push(g.clone());
            ws.push(*c);
        }
    }
    let mut res = (x - &combine(&gens, &ws, shape)).norm();
    for _ in 0..30 {
        if res <= thr || gens.is_empty() {
            break;
        }
        let r = x - &combine(&gens, &ws, shape);
        let mut jac: Vec<Vec<f64>> = vec![];
        for (g, c) in gens.iter().zip(&ws) {
            jac.push(flat(g, field));
            for e in edge {
                jac.push(flat(&comm(e, g).scale(*c), field));
            }
        }
        let rf = flat(&r, field);
        let scale: f64 = jac.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / rf.len() as f64;
        let stride = 1 + edge.len();
        let mut mu = 1e-12 * scale.max(1e-300);
        let mut accepted = false;
        for _ in 0..12 {
            let Some(step) = damped_min_norm(&jac, &rf, mu) else {
                mu *= 100.0;
                continue;
            };
            let mut ng = Vec::with_capacity(gens.len());
            let mut nw = Vec::with_capacity(gens.len());
            for (j, (g, c)) in gens.iter().zip(&ws).enumerate() {
                let d = &step[j * stride..(j + 1) * stride];
                nw.push((c + d[0]).max(0.0));
                let mut a = Mat::zeros(shape.0, shape.1);
                for (e, t) in edge.iter().zip(&d[1..]) {
                    a.axpy(*t, e);
                }
                let u = expm(&a);
                ng.push(&(&u * g) * &u.adjoint());
            }
            let nres = (x - &combine(&ng, &nw, shape)).norm();
            if nres < res {
                gens = ng;
                ws = nw;
                res = nres;
                accepted = true;
                break;
            }
            mu *= 100.0;
        }
        if !accepted {
            break;
        }
    }
    (gens, ws, res)
}

/// Ad-orbit element maximizing ⟨r, ·⟩ by Riemannian ascent from the best columns.
fn orbit_argmax(orbit: &Orbit, columns: &[Mat], r: &Mat) -> Option<Mat> {
    if orbit.edge.is_empty() {
        return None;
    }
    let mut scored: Vec<(f64, &Mat)> = columns.iter().map(|c| (c.inner(r), c)).collect();
    for s in &orbit.seeds {
        scored.push((s.inner(r), s));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best: Option<(f64, Mat)> = None;
    for (_, start) in scored.iter().take(4) {
        let g = ascend(&orbit.edge, start, r);
        let v = g.inner(r);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, g));
        }
    }
    best.map(|(_, g)| g)
}

/// Maximize ⟨r, e^{E} g e^{−E}⟩ over E in span(edge) by gradient ascent with backtracking.
pub(crate) fn ascend(edge: &[Mat], start: &Mat, r: &Mat) -> Mat {
    let f = |g: &Mat| g.inner(r);
    let mut g = start.clone();
    let mut val = f(&g);
    let scale = r.norm().max(1e-300);
    let mut eta = f64::INFINITY;
    for _ in 0..200 {
        let grad: Vec<f64> = edge.iter().map(|e| r.inner(&comm(e, &g))).collect();
        let gn2: f64 = grad.iter().map(|x| x * x).sum();
        if gn2.sqrt() <= 1e-13 * scale {
            break;
        }
        let mut dir = Mat::zeros(g.rows(), g.cols());
        for (c, e) in grad.iter().zip(edge) {
            dir.axpy(*c, e);
        }
        // warm start from the last accepted step, capped at a rotation by π
        eta = (2.0 * eta).min(std::f64::consts::PI / gn2.sqrt().max(1e-12));
        let mut moved = false;
        for _ in 0..40 {
            let u = expm(&dir.scale(eta));
            let cand = &(&u * &g) * &u.adjoint();
            let v = f(&cand);
            if v >= val + 1e-4 * eta * gn2 {
                g = cand;
                val = v;
                moved = true;
                break;
            }
            eta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    g
}

/// Component of `s` fixed by the adjoint action of `edge`.
///
/// ad_E is skew on the invariant subspace generated by s, so the fixed part is
/// what remains after removing the image of ad.
fn invariant_part(edge: &[Mat], s: &Mat) -> Mat {
    let mut span = Subspace::empty(s.shape(), s.field(), RANK_TOL);
    let mut frontier = span.extend(std::slice::from_ref(s));
    while !frontier.is_empty() {
        let next: Vec<Mat> = frontier
            .iter()
            .flat_map(|b| edge.iter().map(move |e| comm(e, b)))
            .collect();
        frontier = span.extend(&next);
    }
    let mut image = Subspace::empty(s.shape(), s.field(), RANK_TOL);
    let moved: Vec<Mat> = span
        .basis()
        .iter()
        .flat_map(|b| edge.iter().map(move |e| comm(e, b)))
        .collect();
    image.extend(&moved);
    image.reject(s)
}

/// Orthonormal copy of an edge basis (helper for orbit handles).
pub fn orbit_edge(edge: &Subspace) -> Vec<Mat> {
    orthonormal_span(edge.basis(), RANK_TOL).basis().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::r3::{gamma0, h};
    use crate::channels::Axis::{X, Y, Z};

    fn ice() -> Cone {
        let gens: Vec<Mat> = (0..720)
            .map(|j| crate::channels::r3::example2_cone_point(1.0, j as f64 * std::f64::consts::TAU / 720.0))
            .collect();
        Cone::from_generators((3, 3), Field::Real, &gens)
    }

    #[test]
    fn ray_is_pointed() {
        let c = Cone::from_generators((3, 3), Field::Real, &[gamma0([1.0, 0.0, 1.0])]);
        assert_eq!(c.lineality(CONE_TOL).dim(), 0);
    }

    #[test]
    fn opposite_pair_has_lineality() {
        let c = Cone::from_generators((3, 3), Field::Real, &[h(X), -h(X), gamma0([1.0, 1.0, 1.0])]);
        let l = c.lineality(CONE_TOL);
        assert_eq!(l.dim(), 1);
        assert!(l.contains(&h(X), 1e-12).unwrap());
    }

    #[test]
    fn ice_cone_membership() {
        let c = ice();
        assert!(c.contains(&(&h(Z) + &gamma0([1.0, 0.0, 1.0])), CONE_TOL));
        assert!(c.contains(&gamma0([1.0, 0.0, 1.0]), CONE_TOL));
        assert!(!c.contains(&h(X), CONE_TOL));
        assert!(!c.contains(&h(Y), CONE_TOL));
        let r = c.nnls(&h(X)).residual;
        assert!(r > 0.5);
    }

    #[test]
    fn orbit_completion_finds_unsampled_points() {
        let g0 = gamma0([3.0, 2.0, 1.0]);
        let edge: Vec<Mat> = [X, Y, Z].iter().map(|&a| h(a).scale(1.0 / 2f64.sqrt())).collect();
        let sampled = Cone::from_generators((3, 3), Field::Real, std::slice::from_ref(&g0));
        let full = sampled.clone().with_orbit(Orbit {
            edge,
            seeds: vec![g0.scale(1.0 / g0.norm())],
        });
        let r = expm(&(&h(X).scale(0.3) + &h(Y).scale(1.1)));
        let x = &(&r * &g0) * &r.transpose();
        assert!(!sampled.contains(&x, CONE_TOL));
        assert!(full.contains(&x, CONE_TOL));
        // outside: negative trace
        assert!(!full.contains(&g0.scale(-1.0), CONE_TOL));
    }
}
