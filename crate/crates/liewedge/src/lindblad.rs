//! Superoperators of controlled master equations.
//!
//! Operators are vectorized column-major, vec(AXB) = (Bᵀ⊗A)·vec(X). The
//! propagator of a generator ℒ over time t is expm(−t·ℒ).

use crate::channels::pauli_index;
use crate::error::{invalid, Error, Result};
use crate::matcore::{eig_sym, expm, kron, Field, Mat, C64, ONE, ZERO};

/// Tolerance for Hermiticity and unitality checks, relative to the operator scale.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Representation carrying a [`ControlSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rep {
    /// Real 3×3 generators acting on the Bloch vector.
    R3,
    /// 4×4 superoperators of a single qubit.
    Qubit,
    /// 16×16 superoperators of two qubits.
    TwoQubit,
}

impl Rep {
    /// Dimension N of the underlying Hilbert space.
    pub fn hilbert_dim(self) -> usize {
        match self {
            Rep::R3 | Rep::Qubit => 2,
            Rep::TwoQubit => 4,
        }
    }

    /// Side length of generator matrices in this representation.
    pub fn carrier_dim(self) -> usize {
        match self {
            Rep::R3 => 3,
            Rep::Qubit => 4,
            Rep::TwoQubit => 16,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rep::R3 => "r3",
            Rep::Qubit => "qubit",
            Rep::TwoQubit => "two_qubit",
        }
    }

    pub fn parse(s: &str) -> Option<Rep> {
        match s {
            "r3" => Some(Rep::R3),
            "qubit" => Some(Rep::Qubit),
            "two_qubit" => Some(Rep::TwoQubit),
            _ => None,
        }
    }
}

/// ad_hat(H) = I⊗H − Hᵀ⊗I, so ad_hat(H)·vec(X) = vec([H, X]).
pub fn ad_hat(h: &Mat) -> Result<Mat> {
    h.require_square("ad_hat")?;
    let d = h.hermitian_defect();
    if d > STRUCTURE_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian {
            what: "Hamiltonian",
            deviation: d,
        });
    }
    Ok(ad_hat_unchecked(h))
}

pub(crate) fn ad_hat_unchecked(h: &Mat) -> Mat {
    let id = Mat::identity(h.rows());
    &kron(&id, h) - &kron(&h.transpose(), &id)
}

/// Σ_k γ_k [½(I⊗V†V + (V†V)ᵀ⊗I) − V̄⊗V].
pub fn gks_dissipator(ops: &[(Mat, f64)]) -> Result<Mat> {
    let Some((first, _)) = ops.first() else {
        return invalid("gks_dissipator needs at least one operator");
    };
    let n = first.rows();
    let id = Mat::identity(n);
    let mut out = Mat::zeros(n * n, n * n);
    for (v, g) in ops {
        v.require_square("gks_dissipator")?;
        if v.rows() != n {
            return Err(Error::ShapeMismatch {
                op: "gks_dissipator",
                left: first.shape(),
                right: v.shape(),
            });
        }
        if !(g.is_finite() && *g >= 0.0) {
            return invalid(format!("rate must be finite and nonnegative, got {g}"));
        }
        let vv = &v.adjoint() * v;
        let anti = (&kron(&id, &vv) + &kron(&vv.transpose(), &id)).scale(0.5);
        let jump = kron(&v.conj(), v);
        out.axpy(*g, &(&anti - &jump));
    }
    Ok(out)
}

/// Column-major vectorization.
pub fn vec_of(x: &Mat) -> Vec<C64> {
    let (r, c) = x.shape();
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(x.get(i, j));
        }
    }
    v
}

/// Inverse of [`vec_of`] for an n×n operator.
pub fn unvec(v: &[C64], n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| v[i + n * j])
}

fn apply(t: &Mat, v: &[C64]) -> Vec<C64> {
    (0..t.rows())
        .map(|i| (0..t.cols()).map(|j| t.get(i, j) * v[j]).sum())
        .collect()
}

/// Sign of each single-qubit Pauli factor in the coherence basis.
///
/// The x-axis element enters negated, which makes i·σ̂_y and i·σ̂_z map onto
/// the rotation generators H_y and H_z of the ℝ³ picture.
fn pauli_sign(idx: usize) -> f64 {
    if idx == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Orthonormal basis of traceless Hermitian N×N operators (N = 2 or 4).
///
/// Ordered (x, y, z) for one qubit and (μν) μ-major over (1, x, y, z) minus
/// (11) for two qubits.
pub fn coherence_basis(n: usize) -> Result<Vec<Mat>> {
    match n {
        2 => Ok((1..4)
            .map(|a| pauli_index(a).scale(pauli_sign(a) / 2f64.sqrt()))
            .collect()),
        4 => Ok((0..4)
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .filter(|&ab| ab != (0, 0))
            .map(|(a, b)| kron(&pauli_index(a), &pauli_index(b)).scale(pauli_sign(a) * pauli_sign(b) * 0.5))
            .collect()),
        _ => invalid(format!("coherence basis available for N = 2, 4; got {n}")),
    }
}

fn side(t: &Mat) -> Result<usize> {
    t.require_square("superoperator")?;
    let n = (t.rows() as f64).sqrt().round() as usize;
    if n * n != t.rows() {
        return invalid(format!("{} is not a square dimension", t.rows()));
    }
    Ok(n)
}

/// Residuals ‖T·vec(I) − c·vec(I)‖ and ‖vec(I)†·T − c·vec(I)†‖.
fn identity_residuals(t: &Mat, c: f64) -> Result<(f64, f64)> {
    let n = side(t)?;
    let vi = vec_of(&Mat::identity(n));
    let right = apply(t, &vi);
    let r = right
        .iter()
        .zip(&vi)
        .map(|(a, b)| (a - b * c).norm())
        .fold(0.0, f64::max);
    let left = apply(&t.adjoint(), &vi);
    let l = left
        .iter()
        .zip(&vi)
        .map(|(a, b)| (a - b * c).norm())
        .fold(0.0, f64::max);
    Ok((r, l))
}

fn coherence_block(t: &Mat, n: usize) -> Result<Mat> {
    block_in(t, &coherence_basis(n)?)
}

fn block_in(t: &Mat, basis: &[Mat]) -> Result<Mat> {
    let vecs: Vec<Vec<C64>> = basis.iter().map(vec_of).collect();
    let images: Vec<Vec<C64>> = vecs.iter().map(|v| apply(t, v)).collect();
    let d = basis.len();
    let mut data = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let z: C64 = vecs[a].iter().zip(&images[b]).map(|(x, y)| x.conj() * y).sum();
            data[a * d + b] = z.re;
        }
    }
    Ok(Mat::from_real(d, d, &data))
}

/// Restriction of a unital generator to traceless Hermitian operators.
pub fn coherence_rep(l: &Mat) -> Result<Mat> {
    let n = side(l)?;
    let (r, lt) = identity_residuals(l, 0.0)?;
    let res = r.max(lt);
    if res > STRUCTURE_TOL * l.max_abs().max(1.0) {
        return Err(Error::NotUnital { residual: res });
    }
    coherence_block(l, n)
}

/// Real matrix of a trace-preserving generator in the basis (I/√N, coherence basis).
///
/// The first row vanishes; the first column carries the affine (non-unital) part.
pub fn affine_rep(l: &Mat) -> Result<Mat> {
    let n = side(l)?;
    let mut basis = vec![Mat::identity(n).scale(1.0 / (n as f64).sqrt())];
    basis.extend(coherence_basis(n)?);
    block_in(l, &basis)
}

/// Restriction of a unital trace-preserving map to traceless Hermitian operators.
pub fn map_coherence(t: &Mat) -> Result<Mat> {
    let n = side(t)?;
    let (r, lt) = identity_residuals(t, 1.0)?;
    let res = r.max(lt);
    if res > STRUCTURE_TOL * t.max_abs().max(1.0) {
        return Err(Error::NotUnital { residual: res });
    }
    coherence_block(t, n)
}

/// Superoperator with coherence block `m` that sends I to `identity_gain·I`.
pub fn lift_coherence(m: &Mat, n: usize, identity_gain: f64) -> Result<Mat> {
    let basis = coherence_basis(n)?;
    if m.shape() != (basis.len(), basis.len()) {
        return Err(Error::ShapeMismatch {
            op: "lift_coherence",
            left: (basis.len(), basis.len()),
            right: m.shape(),
        });
    }
    let vecs: Vec<Vec<C64>> = basis.iter().map(vec_of).collect();
    let vi: Vec<C64> = vec_of(&Mat::identity(n))
        .into_iter()
        .map(|z| z / (n as f64).sqrt())
        .collect();
    let nn = n * n;
    let mut data = vec![ZERO; nn * nn];
    let mut add_outer = |u: &[C64], w: &[C64], s: f64| {
        for i in 0..nn {
            for j in 0..nn {
                data[i * nn + j] += u[i] * w[j].conj() * s;
            }
        }
    };
    add_outer(&vi, &vi, identity_gain);
    for a in 0..vecs.len() {
        for b in 0..vecs.len() {
            let s = m.get(a, b).re;
            if s != 0.0 {
                add_outer(&vecs[a], &vecs[b], s);
            }
        }
    }
    Ok(Mat::from_complex(nn, nn, data))
}

/// Choi matrix, J[(c,a),(d,b)] = T[(a,b),(c,d)] with the column-major vec above.
pub fn choi(t: &Mat) -> Result<Mat> {
    let n = side(t)?;
    Ok(Mat::from_fn(n * n, n * n, |row, col| {
        let (c, a) = (row / n, row % n);
        let (d, b) = (col / n, col % n);
        t.get(a + n * b, c + n * d)
    }))
}

/// Outcome of [`cptp_audit`].
#[derive(Clone, Debug, PartialEq)]
pub struct CptpReport {
    pub is_tp: bool,
    pub tp_residual: f64,
    pub choi_min_eig: f64,
    pub is_cp: bool,
}

/// Trace preservation and complete positivity of a vectorized map.
pub fn cptp_audit(t: &Mat) -> Result<CptpReport> {
    let (_, left) = identity_residuals(t, 1.0)?;
    let j = choi(t)?;
    let herm = (&j + &j.adjoint()).scale(0.5);
    let (vals, _) = eig_sym(&herm)?;
    let min = vals.last().copied().unwrap_or(0.0);
    let asym = j.dist_max(&herm);
    Ok(CptpReport {
        is_tp: left <= 1e-10,
        tp_residual: left,
        choi_min_eig: min,
        is_cp: min >= -1e-10 && asym <= 1e-10,
    })
}

/// Controlled master equation in one of the three representations.
///
/// For [`Rep::R3`] the drift and controls are real skew 3×3 generators and the
/// relaxation is a symmetric positive semidefinite Γ₀. For the quantum
/// representations they are Hermitian Hamiltonians with Lindblad operators.
#[derive(Clone, Debug)]
pub struct ControlSystem {
    rep: Rep,
    drift: Mat,
    controls: Vec<Mat>,
    lindblad: Vec<(Mat, f64)>,
    relaxation: Option<Mat>,
}

impl ControlSystem {
    pub fn r3(drift: Mat, controls: Vec<Mat>, relaxation: Mat) -> Result<ControlSystem> {
        let skew = |m: &Mat, what: &str| -> Result<()> {
            if m.shape() != (3, 3) || !m.is_real() {
                return invalid(format!("{what} must be a real 3x3 matrix"));
            }
            if (m + &m.transpose()).max_abs() > STRUCTURE_TOL * m.max_abs().max(1.0) {
                return invalid(format!("{what} must be skew-symmetric"));
            }
            Ok(())
        };
        skew(&drift, "drift")?;
        for c in &controls {
            skew(c, "control")?;
        }
        if relaxation.shape() != (3, 3) || !relaxation.is_real() {
            return invalid("relaxation must be a real 3x3 matrix");
        }
        let (vals, _) =
            eig_sym(&relaxation).map_err(|_| Error::InvalidArgument("relaxation must be symmetric".into()))?;
        if vals[2] < -STRUCTURE_TOL * relaxation.max_abs().max(1.0) {
            return invalid("relaxation must be positive semidefinite");
        }
        Ok(ControlSystem {
            rep: Rep::R3,
            drift,
            controls,
            lindblad: vec![],
            relaxation: Some(relaxation),
        })
    }

    pub fn quantum(rep: Rep, drift: Mat, controls: Vec<Mat>, lindblad: Vec<(Mat, f64)>) -> Result<ControlSystem> {
        if rep == Rep::R3 {
            return invalid("use ControlSystem::r3 for the ℝ³ representation");
        }
        let n = rep.hilbert_dim();
        let herm = |m: &Mat, what: &'static str| -> Result<()> {
            if m.shape() != (n, n) {
                return invalid(format!("{what} must be {n}x{n}, got {:?}", m.shape()));
            }
            let d = m.hermitian_defect();
            if d > STRUCTURE_TOL * m.max_abs().max(1.0) {
                return Err(Error::NotHermitian { what, deviation: d });
            }
            Ok(())
        };
        herm(&drift, "drift Hamiltonian")?;
        for c in &controls {
            herm(c, "control Hamiltonian")?;
        }
        for (v, g) in &lindblad {
            if v.shape() != (n, n) {
                return invalid(format!("Lindblad operator must be {n}x{n}"));
            }
            if !(g.is_finite() && *g >= 0.0) {
                return invalid(format!("rate must be finite and nonnegative, got {g}"));
            }
        }
        Ok(ControlSystem {
            rep,
            drift,
            controls,
            lindblad,
            relaxation: None,
        })
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }
    pub fn hilbert_dim(&self) -> usize {
        self.rep.hilbert_dim()
    }
    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }
    /// Drift Hamiltonian (quantum) or skew drift generator (ℝ³).
    pub fn drift(&self) -> &Mat {
        &self.drift
    }
    pub fn controls(&self) -> &[Mat] {
        &self.controls
    }
    pub fn lindblad_ops(&self) -> &[(Mat, f64)] {
        &self.lindblad
    }
    pub fn relaxation(&self) -> Option<&Mat> {
        self.relaxation.as_ref()
    }

    fn carrier_field(&self) -> Field {
        match self.rep {
            Rep::R3 => Field::Real,
            _ => Field::Complex,
        }
    }

    /// Shape of generator matrices.
    pub fn carrier_shape(&self) -> (usize, usize) {
        let d = self.rep.carrier_dim();
        (d, d)
    }

    pub fn field(&self) -> Field {
        self.carrier_field()
    }

    fn hamiltonian_generator(&self, h: &Mat) -> Mat {
        match self.rep {
            Rep::R3 => h.clone(),
            _ => ad_hat_unchecked(h).times_i(),
        }
    }

    /// Hamiltonian part of the drift generator, i·ad_hat(H_d) or the skew drift.
    pub fn hamiltonian_drift_generator(&self) -> Mat {
        self.hamiltonian_generator(&self.drift)
    }

    /// Control directions i·ad_hat(H_j) or the skew controls.
    pub fn control_generators(&self) -> Vec<Mat> {
        self.controls.iter().map(|h| self.hamiltonian_generator(h)).collect()
    }

    /// Dissipative part Γ_L (or Γ₀).
    pub fn dissipator(&self) -> Mat {
        match (&self.relaxation, self.lindblad.is_empty()) {
            (Some(g), _) => g.clone(),
            (None, true) => {
                let d = self.rep.carrier_dim();
                Mat::zeros(d, d)
            }
            (None, false) => gks_dissipator(&self.lindblad).expect("validated operators"),
        }
    }

    /// Full drift generator, Hamiltonian drift plus dissipator.
    pub fn drift_generator(&self) -> Mat {
        &self.hamiltonian_drift_generator() + &self.dissipator()
    }

    /// ℒ_u; the propagator over time t is expm(−t·ℒ_u).
    pub fn generator(&self, u: &[f64]) -> Result<Mat> {
        if u.len() != self.controls.len() {
            return invalid(format!(
                "control vector has length {}, system has {} controls",
                u.len(),
                self.controls.len()
            ));
        }
        let mut h = self.drift.clone();
        for (c, x) in self.controls.iter().zip(u) {
            h.axpy(*x, c);
        }
        Ok(&self.hamiltonian_generator(&h) + &self.dissipator())
    }

    /// Coherence-vector matrix of a generator in this representation.
    pub fn to_coherence(&self, g: &Mat) -> Result<Mat> {
        match self.rep {
            Rep::R3 => Ok(g.clone()),
            _ => coherence_rep(g),
        }
    }

    /// Whether every generator annihilates the identity.
    pub fn is_unital(&self) -> bool {
        match self.rep {
            Rep::R3 => true,
            _ => {
                let d = self.dissipator();
                identity_residuals(&d, 0.0)
                    .map(|(r, l)| r.max(l) <= STRUCTURE_TOL * d.max_abs().max(1.0))
                    .unwrap_or(false)
            }
        }
    }

    /// Copy with a different dissipator rate scale (ℝ³ relaxation or all rates).
    pub fn scaled_dissipation(&self, s: f64) -> ControlSystem {
        let mut out = self.clone();
        if let Some(g) = &mut out.relaxation {
            *g = g.scale(s);
        }
        for (_, r) in &mut out.lindblad {
            *r *= s;
        }
        out
    }
}

/// Controlled Lindbladian ℒ_u of `sys`.
pub fn lindbladian(sys: &ControlSystem, u: &[f64]) -> Result<Mat> {
    sys.generator(u)
}

/// A propagated map tagged with its representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Superop {
    pub matrix: Mat,
    pub rep: Rep,
}

impl Superop {
    pub fn identity(rep: Rep) -> Superop {
        Superop {
            matrix: Mat::identity(rep.carrier_dim()),
            rep,
        }
    }

    /// Matrix acting on vec(ρ); ℝ³ maps are lifted through the coherence basis.
    pub fn vec_matrix(&self) -> Result<Mat> {
        match self.rep {
            Rep::R3 => lift_coherence(&self.matrix, 2, 1.0),
            _ => Ok(self.matrix.clone()),
        }
    }

    /// Real coherence-vector matrix.
    pub fn coherence(&self) -> Result<Mat> {
        match self.rep {
            Rep::R3 => Ok(self.matrix.clone()),
            _ => map_coherence(&self.matrix),
        }
    }

    pub fn compose(&self, later: &Superop) -> Result<Superop> {
        if self.rep != later.rep {
            return invalid("cannot compose maps of different representations");
        }
        Ok(Superop {
            matrix: later.matrix.try_matmul(&self.matrix)?,
            rep: self.rep,
        })
    }

    pub fn audit(&self) -> Result<CptpReport> {
        cptp_audit(&self.vec_matrix()?)
    }
}

/// expm(−t·ℒ) as a tagged map.
pub fn propagator(sys: &ControlSystem, u: &[f64], t: f64) -> Result<Superop> {
    let l = sys.generator(u)?;
    Ok(Superop {
        matrix: expm(&l.scale(-t)),
        rep: sys.rep(),
    })
}

/// Σ K̄_i ⊗ K_i, the vectorized map of a Kraus family.
pub fn kraus_superop(ops: &[Mat]) -> Result<Mat> {
    let Some(first) = ops.first() else {
        return invalid("empty Kraus family");
    };
    let n = first.rows();
    let mut out = Mat::zeros(n * n, n * n);
    for k in ops {
        if k.shape() != (n, n) {
            return invalid("Kraus operators must share a square shape");
        }
        out += &kron(&k.conj(), k);
    }
    Ok(out)
}

/// Transposition ρ ↦ ρᵀ as a vectorized map.
pub fn transpose_map(n: usize) -> Mat {
    let nn = n * n;
    Mat::from_fn(nn, nn, |row, col| {
        let (a, b) = (row % n, row / n);
        let (c, d) = (col % n, col / n);
        if a == d && b == c {
            ONE
        } else {
            ZERO
        }
    })
}
