use super::mat::{Field, Mat, I};
use crate::error::{Error, Result};

/// Default rank tolerance, relative to the largest pivot.
pub const RANK_TOL: f64 = 1e-9;

/// Real linear span of matrices with an orthonormal basis under ⟨A,B⟩ = Re tr(A†B).
///
/// The ambient space is the real vector space of `rows × cols` matrices over the
/// tagged field, so its dimension is `rows·cols` (real) or `2·rows·cols` (complex).
#[derive(Clone, Debug)]
pub struct Subspace {
    shape: (usize, usize),
    field: Field,
    tol: f64,
    basis: Vec<Mat>,
    flat: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nrm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl Subspace {
    pub fn empty(shape: (usize, usize), field: Field, tol: f64) -> Subspace {
        Subspace {
            shape,
            field,
            tol,
            basis: vec![],
            flat: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }
    pub fn field(&self) -> Field {
        self.field
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn ambient_dim(&self) -> usize {
        let n = self.shape.0 * self.shape.1;
        match self.field {
            Field::Real => n,
            Field::Complex => 2 * n,
        }
    }

    fn check(&self, a: &Mat) -> Result<()> {
        if a.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                op: "subspace",
                left: self.shape,
                right: a.shape(),
            });
        }
        Ok(())
    }

    fn residual_flat(&self, v: &mut [f64]) {
        // two passes of modified Gram–Schmidt keep the residual orthogonal
        for _ in 0..2 {
            for q in &self.flat {
                let c = dot(q, v);
                if c != 0.0 {
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
        }
    }

    /// Extend by the pivoted Gram–Schmidt residuals of `cands`.
    ///
    /// A candidate is kept when its residual exceeds `tol` times the largest
    /// candidate norm. Returns the newly added basis elements.
    pub fn extend(&mut self, cands: &[Mat]) -> Vec<Mat> {
        if cands.is_empty() {
            return vec![];
        }
        for c in cands {
            assert_eq!(c.shape(), self.shape, "Subspace::extend: shape mismatch");
            if !c.is_real() {
                self.field = Field::Complex;
            }
        }
        let scale = cands.iter().map(Mat::norm).fold(0.0, f64::max);
        if scale == 0.0 {
            return vec![];
        }
        let threshold = self.tol * scale;
        let mut work: Vec<Vec<f64>> = cands
            .iter()
            .map(|c| {
                let mut v = c.to_flat();
                self.residual_flat(&mut v);
                v
            })
            .collect();
        let mut alive: Vec<bool> = vec![true; work.len()];
        let mut added = vec![];
        loop {
            if self.dim() >= self.ambient_dim() {
                break;
            }
            let mut best = None;
            let mut best_norm = threshold;
            for (i, v) in work.iter().enumerate() {
                if !alive[i] {
                    continue;
                }
                let n = nrm(v);
                if n > best_norm {
                    best_norm = n;
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            alive[b] = false;
            let mut q = std::mem::take(&mut work[b]);
            self.residual_flat(&mut q);
            let n = nrm(&q);
            if n <= threshold {
                continue;
            }
            for x in &mut q {
                *x /= n;
            }
            for (i, v) in work.iter_mut().enumerate() {
                if alive[i] {
                    let c = dot(&q, v);
                    for (x, y) in v.iter_mut().zip(&q) {
                        *x -= c * y;
                    }
                }
            }
            let m = Mat::from_flat(self.shape.0, self.shape.1, &q);
            let m = if self.field == Field::Real {
                m.chop_imag(f64::INFINITY)
            } else {
                m
            };
            added.push(m.clone());
            self.basis.push(m);
            self.flat.push(q);
        }
        added
    }

    /// Coordinates of the orthogonal projection.
    pub fn coords(&self, a: &Mat) -> Vec<f64> {
        self.check(a).expect("coords");
        let v = a.to_flat();
        self.flat.iter().map(|q| dot(q, &v)).collect()
    }

    pub fn from_coords(&self, c: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.shape.0, self.shape.1);
        for (x, b) in c.iter().zip(&self.basis) {
            out.axpy(*x, b);
        }
        out
    }

    pub fn project(&self, a: &Mat) -> Mat {
        self.from_coords(&self.coords(a))
    }

    /// Component orthogonal to the subspace.
    pub fn reject(&self, a: &Mat) -> Mat {
        let mut v = a.to_flat();
        self.residual_flat(&mut v);
        let m = Mat::from_flat(self.shape.0, self.shape.1, &v);
        if a.is_real() {
            m.chop_imag(f64::INFINITY)
        } else {
            m
        }
    }

    /// ‖A − proj(A)‖.
    pub fn residual(&self, a: &Mat) -> f64 {
        self.check(a).expect("residual");
        let mut v = a.to_flat();
        self.residual_flat(&mut v);
        nrm(&v)
    }

    /// True iff ‖A − proj(A)‖ ≤ tol·max(1, ‖A‖).
    pub fn contains(&self, a: &Mat, tol: f64) -> Result<bool> {
        self.check(a)?;
        Ok(self.residual(a) <= tol * a.norm().max(1.0))
    }

    /// Canonical basis of the ambient space.
    pub fn ambient_units(shape: (usize, usize), field: Field) -> Vec<Mat> {
        let mut out = vec![];
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let e = Mat::unit(shape.0, shape.1, i, j);
                if field == Field::Complex {
                    out.push(e.times_i());
                }
                out.push(e);
            }
        }
        out
    }

    pub fn orthocomplement(&self) -> Subspace {
        let mut full = self.clone();
        let added = full.extend(&Self::ambient_units(self.shape, self.field));
        let mut out = Subspace::empty(self.shape, self.field, self.tol);
        out.flat = added.iter().map(Mat::to_flat).collect();
        out.basis = added;
        out
    }

    /// Span of the union.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut out = self.clone();
        out.extend(other.basis());
        out
    }

    /// Intersection, computed as (A^⊥ + B^⊥)^⊥ over the joint field.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let field = self.field.join(other.field);
        let mut a = self.clone();
        a.field = field;
        let mut b = other.clone();
        b.field = field;
        a.orthocomplement().sum(&b.orthocomplement()).orthocomplement()
    }

    /// Equal dimension and mutual containment within `tol`.
    pub fn equal(&self, other: &Subspace, tol: f64) -> bool {
        self.shape == other.shape
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.residual(b) <= tol)
            && self.basis.iter().all(|b| other.residual(b) <= tol)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.flat.iter().enumerate() {
            for (j, b) in self.flat.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - want).abs());
            }
        }
        worst
    }
}

/// Orthonormal basis of span(gens) by Gram–Schmidt with column pivoting.
pub fn orthonormal_span(gens: &[Mat], tol: f64) -> Subspace {
    let shape = gens.first().map(Mat::shape).unwrap_or((0, 0));
    let field = gens.iter().fold(Field::Real, |f, g| f.join(g.field()));
    let mut s = Subspace::empty(shape, field, tol);
    s.extend(gens);
    s
}

/// Real span with an explicit ambient shape (allowed to be empty).
pub fn span_in(shape: (usize, usize), field: Field, gens: &[Mat], tol: f64) -> Subspace {
    let mut s = Subspace::empty(shape, field, tol);
    s.extend(gens);
    s
}

/// Basis of i·(Hermitian) or real-skew matrices is common enough to name.
pub fn skew_hermitian_basis(n: usize) -> Vec<Mat> {
    let mut out = vec![];
    for i in 0..n {
        for j in 0..n {
            let e = Mat::unit(n, n, i, j);
            if i == j {
                out.push(e.times_i());
            } else if i < j {
                let et = Mat::unit(n, n, j, i);
                out.push(&e - &et);
                out.push((&e + &et).scale_c(I));
            }
        }
    }
    out
}
