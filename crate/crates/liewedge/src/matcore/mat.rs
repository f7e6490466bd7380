use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Scalar field of a [`Mat`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

/// Dense row-major matrix with complex entries and a field tag.
///
/// Real-tagged matrices carry exactly zero imaginary parts.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    field: Field,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} ({:?})", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                if self.field == Field::Real {
                    write!(f, " {:>10.4}", z.re)?;
                } else {
                    write!(f, " {:>9.4}{:+.4}i", z.re, z.im)?;
                }
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
            field: Field::Real,
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Real matrix from row-major data.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Mat {
        assert_eq!(data.len(), rows * cols, "from_real: data length");
        Mat {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
            field: Field::Real,
        }
    }

    /// Complex matrix from row-major data; tagged real if every imaginary part is zero.
    pub fn from_complex(rows: usize, cols: usize, data: Vec<C64>) -> Mat {
        assert_eq!(data.len(), rows * cols, "from_complex: data length");
        let field = if data.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        };
        Mat {
            rows,
            cols,
            data,
            field,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat::from_complex(rows, cols, data)
    }

    pub fn diag_real(d: &[f64]) -> Mat {
        let n = d.len();
        let mut m = Mat::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    /// Matrix unit E_ij.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        m.data[i * cols + j] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn field(&self) -> Field {
        self.field
    }
    pub fn is_real(&self) -> bool {
        self.field == Field::Real
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        if v.im != 0.0 {
            self.field = Field::Complex;
        }
        self.data[i * self.cols + j] = v;
    }

    /// Drop imaginary parts below `tol` and retag as real when possible.
    pub fn chop_imag(mut self, tol: f64) -> Mat {
        if self.data.iter().all(|z| z.im.abs() <= tol) {
            for z in &mut self.data {
                z.im = 0.0;
            }
            self.field = Field::Real;
        }
        self
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Mat {
        Mat::from_complex(self.rows, self.cols, self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
            field: self.field,
        }
    }

    pub fn scale_c(&self, s: C64) -> Mat {
        if s.im == 0.0 {
            return self.scale(s.re);
        }
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
            field: Field::Complex,
        }
    }

    /// Multiply by the imaginary unit.
    pub fn times_i(&self) -> Mat {
        self.scale_c(I)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out.field = self.field;
        out
    }

    pub fn conj(&self) -> Mat {
        if self.is_real() {
            return self.clone();
        }
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
            field: self.field,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat {
        self.transpose().conj()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// ⟨A,B⟩ = Re tr(A†B).
    pub fn inner(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape(), "inner: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum column sum of moduli.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Maximum entrywise distance.
    pub fn dist_max(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dist_max: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius distance.
    pub fn dist(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape(), "dist: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn approx_eq(&self, other: &Mat, tol: f64) -> bool {
        self.shape() == other.shape() && self.dist_max(other) <= tol
    }

    /// Deviation from Hermiticity, max |A − A†|.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.dist_max(&self.adjoint())
    }

    pub fn require_square(&self, op: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn try_add(&self, other: &Mat) -> Result<Mat> {
        same_shape("add", self, other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Mat) -> Result<Mat> {
        same_shape("sub", self, other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn try_matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut data = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut data[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                for (r, b) in row.iter_mut().zip(brow) {
                    *r += a * b;
                }
            }
        }
        Ok(Mat {
            rows: n,
            cols: m,
            data,
            field: self.field.join(other.field),
        })
    }

    /// Add `s·other` in place.
    pub fn axpy(&mut self, s: f64, other: &Mat) {
        assert_eq!(self.shape(), other.shape(), "axpy: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
        self.field = self.field.join(other.field);
    }

    fn zip(&self, other: &Mat, f: impl Fn(C64, C64) -> C64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            field: self.field.join(other.field),
        }
    }

    /// Interleaved (re, im) coordinates; inner products of these equal [`Mat::inner`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.data.len());
        for z in &self.data {
            v.push(z.re);
            v.push(z.im);
        }
        v
    }

    pub fn from_flat(rows: usize, cols: usize, v: &[f64]) -> Mat {
        assert_eq!(v.len(), 2 * rows * cols, "from_flat: length");
        Mat::from_complex(rows, cols, v.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
    }

    /// Real parts in row-major order.
    pub fn re_vec(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        self.require_square("inverse")?;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Mat::identity(n).data;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap();
            if a[piv * n + col].norm() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                    inv.swap(piv * n + j, col * n + j);
                }
            }
            let d = a[col * n + col].inv();
            for j in 0..n {
                a[col * n + j] *= d;
                inv[col * n + j] *= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= f * ac;
                    inv[r * n + j] -= f * ic;
                }
            }
        }
        let out = Mat {
            rows: n,
            cols: n,
            data: inv,
            field: self.field,
        };
        Ok(if self.is_real() {
            out.chop_imag(f64::INFINITY)
        } else {
            out
        })
    }
}

fn same_shape(op: &'static str, a: &Mat, b: &Mat) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        })
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl Add<&Mat> for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        self.try_add(rhs).expect("add")
    }
}
impl Add for Mat {
    type Output = Mat;
    fn add(self, rhs: Mat) -> Mat {
        &self + &rhs
    }
}
impl Sub<&Mat> for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        self.try_sub(rhs).expect("sub")
    }
}
impl Sub for Mat {
    type Output = Mat;
    fn sub(self, rhs: Mat) -> Mat {
        &self - &rhs
    }
}
impl Mul<&Mat> for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.try_matmul(rhs).expect("matmul")
    }
}
impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        &self * &rhs
    }
}
impl Mul<f64> for &Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        self.scale(s)
    }
}
impl Mul<f64> for Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        self.scale(s)
    }
}
impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}
impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}
impl AddAssign<&Mat> for Mat {
    fn add_assign(&mut self, rhs: &Mat) {
        self.axpy(1.0, rhs);
    }
}
impl SubAssign<&Mat> for Mat {
    fn sub_assign(&mut self, rhs: &Mat) {
        self.axpy(-1.0, rhs);
    }
}

/// Kronecker product, (A⊗B)[i·p+k, j·q+l] = A[i,j]·B[k,l].
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (p, q) = b.shape();
    let mut out = Mat::zeros(a.rows * p, a.cols * q);
    let oc = a.cols * q;
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a.get(i, j);
            if x == ZERO {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out.data[(i * p + k) * oc + j * q + l] = x * b.get(k, l);
                }
            }
        }
    }
    out.field = a.field.join(b.field);
    out
}

/// Commutator AB − BA.
pub fn comm(a: &Mat, b: &Mat) -> Mat {
    try_comm(a, b).expect("comm")
}

pub fn try_comm(a: &Mat, b: &Mat) -> Result<Mat> {
    a.require_square("comm")?;
    same_shape("comm", a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// Anticommutator AB + BA.
pub fn acomm(a: &Mat, b: &Mat) -> Mat {
    a.require_square("acomm").expect("acomm");
    same_shape("acomm", a, b).expect("acomm");
    &(a * b) + &(b * a)
}

/// Σ c_i M_i.
pub fn lin_comb(coeffs: &[f64], mats: &[Mat]) -> Mat {
    assert_eq!(coeffs.len(), mats.len(), "lin_comb: length mismatch");
    assert!(!mats.is_empty(), "lin_comb: empty");
    let mut out = Mat::zeros(mats[0].rows, mats[0].cols);
    for (c, m) in coeffs.iter().zip(mats) {
        out.axpy(*c, m);
    }
    out
}
