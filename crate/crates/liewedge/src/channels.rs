//! Concrete systems: the ℝ³ examples, single-qubit channels and the two-qubit systems.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::lindblad::{ad_hat_unchecked, choi, cptp_audit, kraus_superop, ControlSystem, Rep};
use crate::matcore::{eig_sym, expm, kron, Mat, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// 1, 2, 3 for x, y, z.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        match i {
            1 => Some(Axis::X),
            2 => Some(Axis::Y),
            3 => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    /// The axis different from both `a` and `b` (which must differ).
    pub fn third(a: Axis, b: Axis) -> Axis {
        debug_assert_ne!(a, b);
        Axis::from_index(6 - a.index() - b.index()).expect("distinct axes")
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Axis> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => invalid(format!("unknown axis {s:?}")),
        }
    }
}

/// Levi-Civita symbol on (x, y, z).
pub fn eps(a: Axis, b: Axis, c: Axis) -> f64 {
    let (i, j, k) = (a.index() as i32, b.index() as i32, c.index() as i32);
    ((j - i) * (k - i) * (k - j)).signum() as f64
}

/// Pauli matrix with index 0 = identity, 1..3 = x, y, z.
pub fn pauli_index(i: usize) -> Mat {
    match i {
        0 => Mat::identity(2),
        1 => Mat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        2 => Mat::from_complex(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]),
        3 => Mat::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        _ => panic!("Pauli index {i} out of range"),
    }
}

pub fn pauli(a: Axis) -> Mat {
    pauli_index(a.index())
}

/// σ̂_ν = ad_hat(σ_ν/2).
pub fn sigma_hat(a: Axis) -> Mat {
    ad_hat_unchecked(&pauli(a).scale(0.5))
}

/// σ_μν = σ_μ ⊗ σ_ν with qubit A first; indices as in [`pauli_index`].
pub fn pauli2(mu: usize, nu: usize) -> Mat {
    kron(&pauli_index(mu), &pauli_index(nu))
}

/// σ̂_μν = ad_hat(σ_μν/2).
pub fn sigma_hat2(mu: usize, nu: usize) -> Mat {
    ad_hat_unchecked(&pauli2(mu, nu).scale(0.5))
}

/// e^{G} X e^{−G}.
pub fn conjugate(g: &Mat, x: &Mat) -> Mat {
    &(&expm(g) * x) * &expm(&-g)
}

/// Standard generators of the ℝ³ (coherence-vector) picture.
pub mod r3 {
    use super::Axis;
    use crate::matcore::Mat;

    /// Rotation generator H_ν, so that e^{θH_z} rotates the x-y plane by θ.
    pub fn h(a: Axis) -> Mat {
        match a {
            Axis::X => Mat::from_real(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
            Axis::Y => Mat::from_real(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
            Axis::Z => Mat::from_real(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        }
    }

    /// Symmetric partner p_ν: the off-diagonal pair not touching axis ν.
    pub fn p(a: Axis) -> Mat {
        match a {
            Axis::X => Mat::from_real(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
            Axis::Y => Mat::from_real(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            Axis::Z => Mat::from_real(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        }
    }

    /// E_ii, zero-based.
    pub fn e(i: usize) -> Mat {
        Mat::unit(3, 3, i, i)
    }

    /// Δ_ij = E_ii − E_jj, zero-based.
    pub fn delta(i: usize, j: usize) -> Mat {
        &e(i) - &e(j)
    }

    pub fn gamma0(d: [f64; 3]) -> Mat {
        Mat::diag_real(&d)
    }

    /// diag(7/6, 1/6, −2/3), the diagonal direction orthogonal to diag(1,1,2)
    /// used to expand the conjugated relaxation of the third example.
    pub fn example3_delta() -> Mat {
        Mat::diag_real(&[7.0 / 6.0, 1.0 / 6.0, -2.0 / 3.0])
    }

    /// sinθ·H_x + cosθ·H_z + Γ₀ with Γ₀ = γ·diag(1,0,1).
    pub fn example2_cone_point(gamma: f64, theta: f64) -> Mat {
        let mut m = gamma0([gamma, 0.0, gamma]);
        m.axpy(theta.sin(), &h(Axis::X));
        m.axpy(theta.cos(), &h(Axis::Z));
        m
    }

    /// Coefficients of R_y(θ)(H_z + Γ₀)R_y(θ)ᵀ on (H_x, H_z, p_y, Δ, Γ₀),
    /// Γ₀ = γ·diag(1,1,2) and Δ from [`example3_delta`].
    pub fn example3_coefficients(gamma: f64, theta: f64) -> [f64; 5] {
        let c2 = (2.0 * theta).cos();
        [
            theta.sin(),
            theta.cos(),
            gamma * (2.0 * theta).sin() / 2.0,
            gamma * (1.0 - c2) / 2.0,
            (11.0 + c2) / 12.0,
        ]
    }

    /// The closed-form cone point of the third example.
    pub fn example3_cone_point(gamma: f64, theta: f64) -> Mat {
        let c = example3_coefficients(gamma, theta);
        let basis = [
            h(Axis::X),
            h(Axis::Z),
            p(Axis::Y),
            example3_delta(),
            gamma0([gamma, gamma, 2.0 * gamma]),
        ];
        crate::matcore::lin_comb(&c, &basis)
    }
}

/// Controls H_x, H_y; drift H_z + diag(a, b, c).
pub fn example1(a: f64, b: f64, c: f64) -> ControlSystem {
    ControlSystem::r3(
        r3::h(Axis::Z),
        vec![r3::h(Axis::X), r3::h(Axis::Y)],
        r3::gamma0([a, b, c]),
    )
    .expect("example1 needs a, b, c >= 0")
}

/// Control H_y; drift H_z + γ·diag(1, 0, 1).
pub fn example2(gamma: f64) -> ControlSystem {
    let g0 = r3::gamma0([gamma, 0.0, gamma]);
    ControlSystem::r3(r3::h(Axis::Z), vec![r3::h(Axis::Y)], g0).expect("example2 needs γ >= 0")
}

/// Control H_y; drift H_z + γ·diag(1, 1, 2).
pub fn example3(gamma: f64) -> ControlSystem {
    let g0 = r3::gamma0([gamma, gamma, 2.0 * gamma]);
    ControlSystem::r3(r3::h(Axis::Z), vec![r3::h(Axis::Y)], g0).expect("example3 needs γ >= 0")
}

/// Generic ℝ³ system with rotation controls and drift about fixed axes.
pub fn r3_system(drift: Option<Axis>, controls: &[Axis], relaxation: [f64; 3]) -> Result<ControlSystem> {
    let d = drift.map(r3::h).unwrap_or_else(|| Mat::zeros(3, 3));
    ControlSystem::r3(d, controls.iter().map(|&a| r3::h(a)).collect(), r3::gamma0(relaxation))
}

/// Pauli label: a single-qubit axis or a two-qubit pair over (1, x, y, z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    One(Axis),
    Two(usize, usize),
}

impl Label {
    fn char_of(i: usize) -> char {
        ['1', 'x', 'y', 'z'][i]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::One(a) => write!(f, "{a}"),
            Label::Two(m, n) => write!(f, "{}{}", Label::char_of(*m), Label::char_of(*n)),
        }
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Label> {
        let idx = |c: char| match c {
            '1' => Some(0),
            'x' => Some(1),
            'y' => Some(2),
            'z' => Some(3),
            _ => None,
        };
        let cs: Vec<char> = s.chars().collect();
        match cs.as_slice() {
            [a] => Ok(Label::One(a.to_string().parse()?)),
            [a, b] => match (idx(*a), idx(*b)) {
                (Some(m), Some(n)) if (m, n) != (0, 0) => Ok(Label::Two(m, n)),
                _ => invalid(format!("bad two-qubit label {s:?}")),
            },
            _ => invalid(format!("bad axis label {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelName {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
    Example1,
    Example2,
    Example3,
    TwoQubitA,
    TwoQubitB,
    TwoQubitC,
}

impl ChannelName {
    pub const ALL: [ChannelName; 10] = [
        ChannelName::BitFlip,
        ChannelName::PhaseFlip,
        ChannelName::BitPhaseFlip,
        ChannelName::Depolarizing,
        ChannelName::Example1,
        ChannelName::Example2,
        ChannelName::Example3,
        ChannelName::TwoQubitA,
        ChannelName::TwoQubitB,
        ChannelName::TwoQubitC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelName::BitFlip => "bit_flip",
            ChannelName::PhaseFlip => "phase_flip",
            ChannelName::BitPhaseFlip => "bit_phase_flip",
            ChannelName::Depolarizing => "depolarizing",
            ChannelName::Example1 => "example1",
            ChannelName::Example2 => "example2",
            ChannelName::Example3 => "example3",
            ChannelName::TwoQubitA => "two_qubit_A",
            ChannelName::TwoQubitB => "two_qubit_B",
            ChannelName::TwoQubitC => "two_qubit_C",
        }
    }

    /// Noise axis of a flip channel.
    pub fn flip_axis(self) -> Option<Axis> {
        match self {
            ChannelName::BitFlip => Some(Axis::X),
            ChannelName::PhaseFlip => Some(Axis::Z),
            ChannelName::BitPhaseFlip => Some(Axis::Y),
            _ => None,
        }
    }

    fn rate_count(self) -> usize {
        match self {
            ChannelName::BitFlip
            | ChannelName::PhaseFlip
            | ChannelName::BitPhaseFlip
            | ChannelName::Example2
            | ChannelName::Example3 => 1,
            ChannelName::Depolarizing | ChannelName::Example1 => 3,
            ChannelName::TwoQubitA | ChannelName::TwoQubitB | ChannelName::TwoQubitC => 2,
        }
    }
}

impl fmt::Display for ChannelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelName {
    type Err = Error;
    fn from_str(s: &str) -> Result<ChannelName> {
        ChannelName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown channel {s:?}")))
    }
}

/// Declarative description of a catalog system.
///
/// Rates are the Lindblad rates γ (ℝ³ examples: the relaxation parameters).
/// For the two-qubit systems `noise_axes` holds (k, k′) of the local noise.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub name: ChannelName,
    pub rates: Vec<f64>,
    pub control_axes: Vec<Label>,
    pub drift_axis: Option<Label>,
    pub noise_axes: Vec<Axis>,
}

impl ChannelSpec {
    /// Defaults: unit rates, Example 1 with diag(3, 2, 1), local z noise for two qubits,
    /// x controls for `two_qubit_C`.
    pub fn new(name: ChannelName) -> ChannelSpec {
        let rates = match name {
            ChannelName::Example1 => vec![3.0, 2.0, 1.0],
            n => vec![1.0; n.rate_count()],
        };
        let (control_axes, noise_axes) = match name {
            ChannelName::TwoQubitC => (vec![Label::One(Axis::X), Label::One(Axis::X)], vec![Axis::Z, Axis::Z]),
            ChannelName::TwoQubitA | ChannelName::TwoQubitB => (vec![], vec![Axis::Z, Axis::Z]),
            _ => (vec![], vec![]),
        };
        ChannelSpec {
            name,
            rates,
            control_axes,
            drift_axis: None,
            noise_axes,
        }
    }

    pub fn with_rates(mut self, rates: Vec<f64>) -> ChannelSpec {
        self.rates = rates;
        self
    }

    pub fn with_controls(mut self, c: Vec<Label>) -> ChannelSpec {
        self.control_axes = c;
        self
    }

    pub fn with_drift(mut self, d: Option<Label>) -> ChannelSpec {
        self.drift_axis = d;
        self
    }

    pub fn with_noise(mut self, k: Vec<Axis>) -> ChannelSpec {
        self.noise_axes = k;
        self
    }

    pub fn is_purely_dissipative(&self) -> bool {
        self.control_axes.is_empty() && self.drift_axis.is_none()
    }

    fn validate(&self) -> Result<()> {
        if self.rates.len() != self.name.rate_count() {
            return invalid(format!(
                "{} needs {} rate(s), got {}",
                self.name,
                self.name.rate_count(),
                self.rates.len()
            ));
        }
        if self.rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return invalid("rates must be finite and nonnegative");
        }
        Ok(())
    }

    fn single_axes(&self) -> Result<(Option<Axis>, Vec<Axis>)> {
        let one = |l: &Label| match l {
            Label::One(a) => Ok(*a),
            Label::Two(..) => invalid(format!("{} takes single-qubit axes", self.name)),
        };
        let drift = self.drift_axis.as_ref().map(one).transpose()?;
        let ctrl = self.control_axes.iter().map(one).collect::<Result<_>>()?;
        Ok((drift, ctrl))
    }

    fn local_noise(&self) -> Result<(Axis, Axis)> {
        match self.noise_axes.as_slice() {
            [k, kp] => Ok((*k, *kp)),
            _ => invalid("two-qubit systems take two noise axes (k, k')"),
        }
    }

    /// (c, c′) of `two_qubit_C`.
    pub fn local_controls(&self) -> Result<(Axis, Axis)> {
        match self.control_axes.as_slice() {
            [Label::One(c), Label::One(cp)] if *c != Axis::Z && *cp != Axis::Z => Ok((*c, *cp)),
            _ => invalid("two_qubit_C takes controls (c, c') with c, c' in {x, y}"),
        }
    }
}

fn half(m: Mat) -> Mat {
    m.scale(0.5)
}

/// Assemble the control system described by `spec`.
pub fn build_system(spec: &ChannelSpec) -> Result<ControlSystem> {
    spec.validate()?;
    let r = &spec.rates;
    let r3_only = || -> Result<()> {
        if spec.is_purely_dissipative() {
            Ok(())
        } else {
            invalid(format!("{} has fixed controls and drift", spec.name))
        }
    };
    match spec.name {
        ChannelName::Example1 => {
            r3_only()?;
            ControlSystem::r3(
                r3::h(Axis::Z),
                vec![r3::h(Axis::X), r3::h(Axis::Y)],
                r3::gamma0([r[0], r[1], r[2]]),
            )
        }
        ChannelName::Example2 => {
            r3_only()?;
            Ok(example2(r[0]))
        }
        ChannelName::Example3 => {
            r3_only()?;
            Ok(example3(r[0]))
        }
        ChannelName::BitFlip | ChannelName::PhaseFlip | ChannelName::BitPhaseFlip | ChannelName::Depolarizing => {
            let (drift, ctrl) = spec.single_axes()?;
            let h_d = drift.map(|a| half(pauli(a))).unwrap_or_else(|| Mat::zeros(2, 2));
            let hs = ctrl.iter().map(|&a| half(pauli(a))).collect();
            let ops = match spec.name.flip_axis() {
                Some(k) => vec![(pauli(k), r[0])],
                None => Axis::ALL.iter().zip(r).map(|(&a, &g)| (pauli(a), g)).collect(),
            };
            ControlSystem::quantum(Rep::Qubit, h_d, hs, ops)
        }
        ChannelName::TwoQubitA | ChannelName::TwoQubitB | ChannelName::TwoQubitC => {
            let (k, kp) = spec.local_noise()?;
            let ops = vec![(pauli2(k.index(), 0), r[0]), (pauli2(0, kp.index()), r[1])];
            let (drift, ctrl): (Mat, Vec<(usize, usize)>) = match spec.name {
                ChannelName::TwoQubitA => {
                    r3_only()?;
                    (Mat::zeros(4, 4), vec![(1, 0), (2, 0), (0, 1), (0, 2), (3, 3)])
                }
                ChannelName::TwoQubitB => {
                    r3_only()?;
                    (half(pauli2(3, 3)), vec![(1, 0), (2, 0), (0, 1), (0, 2)])
                }
                _ => {
                    let (c, cp) = spec.local_controls()?;
                    if spec.drift_axis.is_some() {
                        return invalid("two_qubit_C has a fixed drift");
                    }
                    let d = &(&pauli2(3, 0) + &pauli2(0, 3)) + &pauli2(3, 3);
                    (half(d), vec![(c.index(), 0), (0, cp.index())])
                }
            };
            let hs = ctrl.iter().map(|&(m, n)| half(pauli2(m, n))).collect();
            ControlSystem::quantum(Rep::TwoQubit, drift, hs, ops)
        }
    }
}

/// K_d^c(θ) = e^{−iθσ̂_c}(iσ̂_d)e^{iθσ̂_c}.
pub fn k_component(c: Axis, d: Axis, theta: f64) -> Mat {
    if c == d {
        return sigma_hat(d).times_i();
    }
    let q = Axis::third(c, d);
    let mut out = sigma_hat(d).scale(theta.cos());
    out.axpy(eps(c, d, q) * theta.sin(), &sigma_hat(q));
    out.times_i()
}

/// Which tensor slot a local Pauli superoperator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Single,
    A,
    B,
}

impl Site {
    fn op(self, a: Axis) -> Mat {
        match self {
            Site::Single => pauli(a),
            Site::A => pauli2(a.index(), 0),
            Site::B => pauli2(0, a.index()),
        }
    }

    fn dim(self) -> usize {
        match self {
            Site::Single => 4,
            _ => 16,
        }
    }

    fn sigma_hat(self, a: Axis) -> Mat {
        ad_hat_unchecked(&self.op(a).scale(0.5))
    }
}

/// (σ_aᵀ ⊗ σ_b) for the operators of `site`.
fn pair(site: Site, a: Axis, b: Axis) -> Mat {
    kron(&site.op(a).transpose(), &site.op(b))
}

fn sym_pair(site: Site, a: Axis, b: Axis) -> Mat {
    &pair(site, a, b) + &pair(site, b, a)
}

/// 𝔭-component e^{−iθσ̂_c}Γ e^{iθσ̂_c} of Γ = Σ 2γ_k σ̂_k² on one site, in the
/// Pauli-product basis.
pub fn p_component_on(site: Site, c: Axis, ks: &[(Axis, f64)], theta: f64) -> Result<Mat> {
    if ks.is_empty() || ks.len() > 3 {
        return invalid(format!("1 to 3 Lindblad axes expected, got {}", ks.len()));
    }
    for (i, (a, g)) in ks.iter().enumerate() {
        if !(g.is_finite() && *g >= 0.0) {
            return invalid("rates must be finite and nonnegative");
        }
        if ks[..i].iter().any(|(b, _)| b == a) {
            return invalid(format!("repeated Lindblad axis {a}"));
        }
    }
    let id = Mat::identity(site.dim());
    let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let single = |k: Axis, g: f64| -> Mat {
        if k == c {
            return (&id - &pair(site, k, k)).scale(g);
        }
        let r = Axis::third(c, k);
        let mut m = id.scale(2.0);
        m.axpy(-(1.0 + c2), &pair(site, k, k));
        m.axpy(-(1.0 - c2), &pair(site, r, r));
        m.axpy(-s2 * eps(c, k, r), &sym_pair(site, k, r));
        m.scale(g / 2.0)
    };
    let on_c = ks.iter().position(|(a, _)| *a == c);
    match (ks.len(), on_c) {
        (1, _) => Ok(single(ks[0].0, ks[0].1)),
        (2, Some(i)) => {
            let (kp, gp) = ks[i];
            let (k, g) = ks[1 - i];
            let r = Axis::third(c, k);
            let mut m = pair(site, kp, kp).scale(-2.0 * gp);
            m.axpy(2.0 * (g + gp), &id);
            m.axpy(-g * (1.0 + c2), &pair(site, k, k));
            m.axpy(-g * (1.0 - c2), &pair(site, r, r));
            m.axpy(-g * s2 * eps(c, k, r), &sym_pair(site, r, k));
            Ok(m.scale(0.5))
        }
        (3, Some(i)) => {
            let gpp = ks[i].1;
            let rest: Vec<(Axis, f64)> = ks.iter().copied().filter(|(a, _)| *a != c).collect();
            let ((k, g), (kp, gp)) = (rest[0], rest[1]);
            let mut m = pair(site, c, c).scale(-2.0 * gpp);
            m.axpy(2.0 * (g + gp + gpp), &id);
            m.axpy(-(g + gp + (g - gp) * c2), &pair(site, k, k));
            m.axpy(-(g + gp - (g - gp) * c2), &pair(site, kp, kp));
            m.axpy(-(g - gp) * s2 * eps(c, k, kp), &sym_pair(site, kp, k));
            Ok(m.scale(0.5))
        }
        _ => {
            let mut m = Mat::zeros(site.dim(), site.dim());
            for &(k, g) in ks {
                m += &single(k, g);
            }
            Ok(m)
        }
    }
}

/// Single-qubit 𝔭-component for one to three Lindblad axes.
pub fn p_component(c: Axis, ks: &[(Axis, f64)], theta: f64) -> Result<Mat> {
    p_component_on(Site::Single, c, ks, theta)
}

/// Γ = Σ 2γ_k σ̂_k² on `site`.
pub fn local_dissipator(site: Site, ks: &[(Axis, f64)]) -> Mat {
    let mut m = Mat::zeros(site.dim(), site.dim());
    for &(k, g) in ks {
        let s = site.sigma_hat(k);
        m.axpy(2.0 * g, &(&s * &s));
    }
    m
}

/// Reference value by conjugating with e^{−iθσ̂_c}.
pub fn conjugated_local(site: Site, c: Axis, x: &Mat, theta: f64) -> Mat {
    let g = site.sigma_hat(c).times_i().scale(-theta);
    conjugate(&g, x)
}

/// A set of Kraus operators for the channel at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<Mat>,
    pub time: f64,
}

impl KrausSet {
    /// ‖Σ E†E − I‖_max.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.operators.first().map(Mat::rows).unwrap_or(0);
        let mut s = Mat::zeros(n, n);
        for e in &self.operators {
            s += &(&e.adjoint() * e);
        }
        s.dist_max(&Mat::identity(n))
    }

    pub fn superop(&self) -> Result<Mat> {
        kraus_superop(&self.operators)
    }
}

/// Weights (r₀, r₁, r₂, r₃) of the depolarizing family for Lindblad rates γ_x, γ_y, γ_z.
///
/// With a_k = 2γ_k the Bloch components decay as e^{−λt} with
/// λ₁ = a_x + a_z (y), λ₂ = a_y + a_z (x), λ₃ = a_x + a_y (z).
pub fn depolarizing_weights(rates: [f64; 3], t: f64) -> [f64; 4] {
    let a = rates.map(|g| 2.0 * g);
    let e1 = (-(a[0] + a[2]) * t).exp();
    let e2 = (-(a[1] + a[2]) * t).exp();
    let e3 = (-(a[0] + a[1]) * t).exp();
    [
        0.25 * (1.0 + e1 + e2 + e3),
        0.25 * (1.0 - e1 + e2 - e3),
        0.25 * (1.0 + e1 - e2 - e3),
        0.25 * (1.0 - e1 - e2 + e3),
    ]
}

/// Flip weights (q, r) = ½(1 ± e^{−at}) with a = 2γ.
pub fn flip_weights(gamma: f64, t: f64) -> (f64, f64) {
    let e = (-2.0 * gamma * t).exp();
    (0.5 * (1.0 + e), 0.5 * (1.0 - e))
}

/// Kraus operators of a purely dissipative single-qubit channel; zero-weight
/// operators are dropped.
pub fn kraus_family(spec: &ChannelSpec, t: f64) -> Result<KrausSet> {
    spec.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return invalid(format!("time must be finite and nonnegative, got {t}"));
    }
    if !spec.is_purely_dissipative() {
        return invalid("Kraus families are available for purely dissipative channels only");
    }
    let weighted: Vec<(f64, Mat)> = match (spec.name, spec.name.flip_axis()) {
        (_, Some(k)) => {
            let (q, r) = flip_weights(spec.rates[0], t);
            vec![(q, Mat::identity(2)), (r, pauli(k))]
        }
        (ChannelName::Depolarizing, None) => {
            let w = depolarizing_weights([spec.rates[0], spec.rates[1], spec.rates[2]], t);
            (0..4).map(|i| (w[i], pauli_index(i))).collect()
        }
        _ => return invalid(format!("{} has no Kraus family", spec.name)),
    };
    Ok(KrausSet {
        operators: weighted
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, m)| m.scale(w.sqrt()))
            .collect(),
        time: t,
    })
}

/// Rank of the Choi matrix, eigenvalues above 1e-8 of the largest.
pub fn kraus_rank(t: &Mat) -> Result<usize> {
    let audit = cptp_audit(t)?;
    if !audit.is_cp {
        return Err(Error::NotCp {
            min_eig: audit.choi_min_eig,
        });
    }
    let j = choi(t)?;
    let (vals, _) = eig_sym(&(&j + &j.adjoint()).scale(0.5))?;
    let top = vals.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|&&v| v > 1e-8 * top).count())
}

/// K^c(θ) + K^{c′}(θ′) + K^{cc′}(θ, θ′) for the drift σ̂_z1 + σ̂_1z + σ̂_zz.
pub fn two_qubit_k(c: Axis, cp: Axis, theta: f64, thetap: f64) -> Mat {
    let (z, zi) = (Axis::Z, Axis::Z.index());
    let q = Axis::third(c, z);
    let qp = Axis::third(cp, z);
    let (e, ep) = (eps(c, z, q), eps(cp, z, qp));
    let (ct, st, ctp, stp) = (theta.cos(), theta.sin(), thetap.cos(), thetap.sin());
    let (qi, qpi) = (q.index(), qp.index());
    let terms = [
        (ct, sigma_hat2(zi, 0)),
        (st * e, sigma_hat2(qi, 0)),
        (ctp, sigma_hat2(0, zi)),
        (stp * ep, sigma_hat2(0, qpi)),
        (ct * ctp, sigma_hat2(zi, zi)),
        (ct * stp * ep, sigma_hat2(zi, qpi)),
        (ctp * st * e, sigma_hat2(qi, zi)),
        (st * stp * e * ep, sigma_hat2(qi, qpi)),
    ];
    let mut out = Mat::zeros(16, 16);
    for (w, m) in &terms {
        out.axpy(*w, m);
    }
    out.times_i()
}

/// Closed-form cone generator of `two_qubit_C` at control angles (θ, θ′).
pub fn two_qubit_wedge_generators(spec: &ChannelSpec, theta: f64, thetap: f64) -> Result<Mat> {
    if spec.name != ChannelName::TwoQubitC {
        return invalid("closed-form generators are defined for two_qubit_C");
    }
    spec.validate()?;
    let (c, cp) = spec.local_controls()?;
    let (k, kp) = spec.local_noise()?;
    let pa = p_component_on(Site::A, c, &[(k, spec.rates[0])], theta)?;
    let pb = p_component_on(Site::B, cp, &[(kp, spec.rates[1])], thetap)?;
    Ok(&(&two_qubit_k(c, cp, theta, thetap) + &pa) + &pb)
}

/// Drift of `sys` conjugated by e^{−Σθ_j·g_j} with g_j the control generators.
pub fn conjugated_drift(sys: &ControlSystem, angles: &[f64]) -> Result<Mat> {
    let gens = sys.control_generators();
    if gens.len() != angles.len() {
        return invalid("one angle per control expected");
    }
    let mut g = Mat::zeros(gens[0].rows(), gens[0].cols());
    for (a, x) in angles.iter().zip(&gens) {
        g.axpy(-a, x);
    }
    Ok(conjugate(&g, &sys.drift_generator()))
}

/// Identity channel check helper used by reports.
pub fn is_identity_map(t: &Mat, tol: f64) -> bool {
    t.dist_max(&Mat::identity(t.rows())) <= tol
}
