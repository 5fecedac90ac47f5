//! Dense complex linear algebra for one and two qubits.
//!
//! Everything here is small and fixed-size: kets are 2 or 4 amplitudes,
//! operators are 2×2 or 4×4 arrays. The computational basis is ordered
//! |00⟩, |01⟩, |10⟩, |11⟩ with particle 1 as the left tensor factor, so the
//! amplitude of |jk⟩ lives at index `2j + k`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::{EQ_TOL, IMAG_TOL};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Which member of the pair an operator or variable refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Particle {
    One,
    Two,
}

impl Particle {
    pub fn index(self) -> usize {
        match self {
            Particle::One => 0,
            Particle::Two => 1,
        }
    }

    pub fn other(self) -> Particle {
        match self {
            Particle::One => Particle::Two,
            Particle::Two => Particle::One,
        }
    }
}

impl From<Particle> for u8 {
    fn from(p: Particle) -> u8 {
        p.index() as u8 + 1
    }
}

impl TryFrom<u8> for Particle {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Particle::One),
            2 => Ok(Particle::Two),
            other => Err(Error::Domain(format!(
                "particle must be 1 or 2, got {other}"
            ))),
        }
    }
}

impl fmt::Display for Particle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

fn check_finite(values: &[C64], what: &'static str) -> Result<()> {
    if values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn norm_sqr(values: &[C64]) -> f64 {
    values.iter().map(|c| c.norm_sqr()).sum()
}

/// A unit vector in three dimensions; the measurement axis of a spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > EQ_TOL {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(Direction { x, y, z })
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidDirection { norm });
        }
        Direction::new(x / norm, y / norm, z / norm)
    }

    /// Direction in the xz-plane at polar angle `theta` from +z.
    pub fn from_polar_xz(theta: f64) -> Self {
        Direction {
            x: theta.sin(),
            y: 0.0,
            z: theta.cos(),
        }
    }

    pub fn z() -> Self {
        Direction::from_polar_xz(0.0)
    }

    pub fn x() -> Self {
        Direction {
            x: 1.0,
            y: 0.0,
            z: 0.0,
        }
    }

    /// Uniformly distributed on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Ok(d) = Direction::normalized(v[0], v[1], v[2]) {
                return d;
            }
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// Single-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ket2([C64; 2]);

impl Ket2 {
    pub fn new(a0: C64, a1: C64) -> Result<Self> {
        let amps = [a0, a1];
        check_finite(&amps, "single-qubit ket")?;
        let n = norm_sqr(&amps);
        if (n - 1.0).abs() > EQ_TOL {
            return Err(Error::NotNormalized {
                what: "single-qubit ket",
                norm_sqr: n,
            });
        }
        Ok(Ket2(amps))
    }

    pub fn normalized(a0: C64, a1: C64) -> Result<Self> {
        let n = norm_sqr(&[a0, a1]).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NotNormalized {
                what: "single-qubit ket",
                norm_sqr: n * n,
            });
        }
        Ket2::new(a0 / n, a1 / n)
    }

    pub fn zero() -> Self {
        Ket2([ONE, ZERO])
    }

    pub fn one() -> Self {
        Ket2([ZERO, ONE])
    }

    /// (|0⟩ ± |1⟩)/√2
    pub fn x_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([C64::new(h, 0.0), C64::new(h, 0.0)])
    }

    pub fn x_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([C64::new(h, 0.0), C64::new(-h, 0.0)])
    }

    /// (|0⟩ ± i|1⟩)/√2
    pub fn y_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([C64::new(h, 0.0), C64::new(0.0, h)])
    }

    pub fn y_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([C64::new(h, 0.0), C64::new(0.0, -h)])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut g = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let (a, b) = (g(), g());
            if let Ok(k) = Ket2::normalized(a, b) {
                return k;
            }
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.0
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// The orthogonal complement, fixed up to the phase convention (−b*, a*).
    pub fn orthogonal(&self) -> Ket2 {
        Ket2([-self.0[1].conj(), self.0[0].conj()])
    }
}

/// Pure two-qubit state in the computational basis |00⟩, |01⟩, |10⟩, |11⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitState([C64; 4]);

impl TwoQubitState {
    pub fn new(amplitudes: [C64; 4]) -> Result<Self> {
        check_finite(&amplitudes, "two-qubit state")?;
        let n = norm_sqr(&amplitudes);
        if (n - 1.0).abs() > EQ_TOL {
            return Err(Error::NotNormalized {
                what: "two-qubit state",
                norm_sqr: n,
            });
        }
        Ok(TwoQubitState(amplitudes))
    }

    /// Rescales to unit norm; fails only on zero or non-finite input.
    pub fn normalized(amplitudes: [C64; 4]) -> Result<Self> {
        check_finite(&amplitudes, "two-qubit state")?;
        let n = norm_sqr(&amplitudes).sqrt();
        if n == 0.0 {
            return Err(Error::NotNormalized {
                what: "two-qubit state",
                norm_sqr: 0.0,
            });
        }
        TwoQubitState::new(amplitudes.map(|a| a / n))
    }

    pub fn product(first: &Ket2, second: &Ket2) -> Self {
        let (a, b) = (first.0, second.0);
        TwoQubitState([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub fn basis_state(index: usize) -> Self {
        let mut amps = [ZERO; 4];
        amps[index] = ONE;
        TwoQubitState(amps)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let amps: [C64; 4] = std::array::from_fn(|_| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if let Ok(s) = TwoQubitState::normalized(amps) {
                return s;
            }
        }
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.0
    }

    /// ⟨first ⊗ second|self⟩
    pub fn overlap_product(&self, first: &Ket2, second: &Ket2) -> C64 {
        let bra = TwoQubitState::product(first, second);
        inner4(&bra.0, &self.0)
    }

    pub fn apply(&self, op: &Operator4) -> [C64; 4] {
        op.apply(&self.0)
    }
}

/// ⟨a|b⟩ for raw four-component vectors.
pub fn inner4(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Operator2(pub [[C64; 2]; 2]);

impl Operator2 {
    pub fn identity() -> Self {
        Operator2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn zero() -> Self {
        Operator2([[ZERO; 2]; 2])
    }

    pub fn pauli_x() -> Self {
        Operator2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Operator2([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Operator2([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn entries(&self) -> &[[C64; 2]; 2] {
        &self.0
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator2(self.0.map(|row| row.map(|e| e * s)))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn dagger(&self) -> Self {
        Operator2(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[j][i].conj())
        }))
    }

    pub fn apply(&self, ket: &Ket2) -> [C64; 2] {
        let k = ket.0;
        [
            self.0[0][0] * k[0] + self.0[0][1] * k[1],
            self.0[1][0] * k[0] + self.0[1][1] * k[1],
        ]
    }

    /// ⟨bra|self|ket⟩
    pub fn matrix_element(&self, bra: &Ket2, ket: &Ket2) -> C64 {
        let v = self.apply(ket);
        bra.0[0].conj() * v[0] + bra.0[1].conj() * v[1]
    }

    /// Largest entrywise distance to another operator.
    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= tol
    }

    /// Eigenvalues of a Hermitian 2×2 matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        Operator2(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        Operator2(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        Operator2(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..2).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Operator4(pub [[C64; 4]; 4]);

impl Operator4 {
    pub fn identity() -> Self {
        Operator4(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { ONE } else { ZERO })
        }))
    }

    /// A ⊗ B, with entries[2i+k][2j+l] = A[i][j]·B[k][l].
    pub fn tensor(a: &Operator2, b: &Operator2) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                    }
                }
            }
        }
        Operator4(m)
    }

    pub fn entries(&self) -> &[[C64; 4]; 4] {
        &self.0
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| self.0[i][j] * v[j]).sum())
    }

    pub fn max_abs_diff(&self, other: &Operator4) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    pub fn hermitian_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        m
    }
}

impl Mul for Operator4 {
    type Output = Operator4;
    fn mul(self, rhs: Operator4) -> Operator4 {
        Operator4(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }
}

/// n·σ = n_x σ_x + n_y σ_y + n_z σ_z
pub fn direction_operator(n: &Direction) -> Operator2 {
    let [x, y, z] = n.components();
    Operator2([
        [C64::new(z, 0.0), C64::new(x, -y)],
        [C64::new(x, y), C64::new(-z, 0.0)],
    ])
}

/// σ⊗𝕀 for particle 1, 𝕀⊗σ for particle 2.
pub fn embed(op: &Operator2, particle: Particle) -> Operator4 {
    match particle {
        Particle::One => Operator4::tensor(op, &Operator2::identity()),
        Particle::Two => Operator4::tensor(&Operator2::identity(), op),
    }
}

/// ⟨ψ|O|ψ⟩ for a Hermitian O.
pub fn expectation(state: &TwoQubitState, op: &Operator4) -> Result<f64> {
    let defect = op.hermitian_defect();
    if defect > EQ_TOL {
        return Err(Error::NotHermitian { max_err: defect });
    }
    let value = inner4(&state.0, &state.apply(op));
    if value.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryExpectation {
            residue: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// P± = (𝕀 ± n·σ)/2, returned as (P+, P−).
pub fn eigenprojectors(n: &Direction) -> (Operator2, Operator2) {
    let id = Operator2::identity();
    let s = direction_operator(n);
    let half = C64::new(0.5, 0.0);
    ((id + s).scale(half), (id - s).scale(half))
}

/// Reduced density operator of the kept particle.
pub fn partial_trace(state: &TwoQubitState, keep: Particle) -> Operator2 {
    let a = &state.0;
    let amp = |kept: usize, traced: usize| match keep {
        Particle::One => a[2 * kept + traced],
        Particle::Two => a[2 * traced + kept],
    };
    Operator2(std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..2).map(|t| amp(i, t) * amp(j, t).conj()).sum())
    }))
}

/// (|01⟩ − |10⟩)/√2
pub fn make_singlet() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState([ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO])
}

/// (|00⟩ + |11⟩)/√2
pub fn make_phi_plus() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState([C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)])
}

/// A factorizable orthonormal basis {|η₁⟩⊗|η₂⟩} of the two-qubit space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceBasis {
    kets: [(Ket2, Ket2); 4],
    labels: [String; 4],
}

impl ReferenceBasis {
    /// Validates that the four product vectors resolve the identity.
    pub fn new(kets: [(Ket2, Ket2); 4], labels: [String; 4]) -> Result<Self> {
        let vectors = kets.map(|(a, b)| TwoQubitState::product(&a, &b).0);
        let mut max_err: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { ONE } else { ZERO };
                max_err = max_err.max((inner4(&vectors[i], &vectors[j]) - target).norm());
            }
        }
        if max_err > EQ_TOL {
            return Err(Error::BasisNotOrthonormal { max_err });
        }
        Ok(ReferenceBasis { kets, labels })
    }

    /// Product of two single-particle bases; label index is 2·η₁ + η₂.
    pub fn from_local_bases(first: [(Ket2, &str); 2], second: [(Ket2, &str); 2]) -> Result<Self> {
        let kets = std::array::from_fn(|k| (first[k / 2].0, second[k % 2].0));
        let labels = std::array::from_fn(|k| format!("{},{}", first[k / 2].1, second[k % 2].1));
        ReferenceBasis::new(kets, labels)
    }

    /// {|y+⟩|x+⟩, |y+⟩|x−⟩, |y−⟩|x+⟩, |y−⟩|x−⟩}
    pub fn yx() -> Self {
        ReferenceBasis::from_local_bases(
            [(Ket2::y_plus(), "y+"), (Ket2::y_minus(), "y-")],
            [(Ket2::x_plus(), "x+"), (Ket2::x_minus(), "x-")],
        )
        .expect("yx basis is orthonormal")
    }

    pub fn computational() -> Self {
        ReferenceBasis::from_local_bases(
            [(Ket2::zero(), "0"), (Ket2::one(), "1")],
            [(Ket2::zero(), "0"), (Ket2::one(), "1")],
        )
        .expect("computational basis is orthonormal")
    }

    /// A random factorizable basis built from two random single-qubit bases.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a = Ket2::random(rng);
        let b = Ket2::random(rng);
        ReferenceBasis::from_local_bases(
            [(a, "a0"), (a.orthogonal(), "a1")],
            [(b, "b0"), (b.orthogonal(), "b1")],
        )
        .expect("orthogonal complements form a basis")
    }

    pub fn len(&self) -> usize {
        4
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, eta_index: usize) -> Result<&str> {
        self.labels
            .get(eta_index)
            .map(String::as_str)
            .ok_or(Error::InvalidEtaIndex(eta_index))
    }

    pub fn labels(&self) -> &[String; 4] {
        &self.labels
    }

    pub fn kets(&self, eta_index: usize) -> Result<&(Ket2, Ket2)> {
        self.kets
            .get(eta_index)
            .ok_or(Error::InvalidEtaIndex(eta_index))
    }

    /// ⟨η₁₂|ψ⟩
    pub fn overlap(&self, eta_index: usize, state: &TwoQubitState) -> Result<C64> {
        let (a, b) = self.kets(eta_index)?;
        Ok(state.overlap_product(a, b))
    }

    /// ⟨η₁₂|O|ψ⟩
    pub fn matrix_element(
        &self,
        eta_index: usize,
        op: &Operator4,
        state: &TwoQubitState,
    ) -> Result<C64> {
        let (a, b) = self.kets(eta_index)?;
        let bra = TwoQubitState::product(a, b);
        Ok(inner4(&bra.0, &state.apply(op)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn assert_op2(a: &Operator2, b: &Operator2) {
        assert!(a.max_abs_diff(b) <= 1e-12, "{a:?} != {b:?}");
    }

    #[test]
    fn direction_operator_axes() {
        assert_op2(&direction_operator(&Direction::z()), &Operator2::pauli_z());
        assert_op2(&direction_operator(&Direction::x()), &Operator2::pauli_x());
        let y = Direction::new(0.0, 1.0, 0.0).unwrap();
        assert_op2(&direction_operator(&y), &Operator2::pauli_y());
    }

    #[test]
    fn direction_operator_quarter_turn() {
        let (c, s) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        let expected = Operator2([
            [C64::new(c, 0.0), C64::new(s, 0.0)],
            [C64::new(s, 0.0), C64::new(-c, 0.0)],
        ]);
        assert_op2(
            &direction_operator(&Direction::from_polar_xz(FRAC_PI_4)),
            &expected,
        );
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(
            Direction::new(1.0, 1.0, 0.0),
            Err(Error::InvalidDirection { .. })
        ));
        assert!(Direction::new(f64::NAN, 0.0, 1.0).is_err());
        assert!(Direction::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn embed_sigma_z() {
        let z = Operator2::pauli_z();
        let diag = |d: [f64; 4]| {
            Operator4(std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { C64::new(d[i], 0.0) } else { ZERO })
            }))
        };
        assert!(embed(&z, Particle::One).max_abs_diff(&diag([1.0, 1.0, -1.0, -1.0])) == 0.0);
        assert!(embed(&z, Particle::Two).max_abs_diff(&diag([1.0, -1.0, 1.0, -1.0])) == 0.0);
    }

    #[test]
    fn singlet_local_operators_flip_sign() {
        let s = make_singlet();
        let x = Operator2::pauli_x();
        let left = s.apply(&embed(&x, Particle::One));
        let right = s.apply(&embed(&x, Particle::Two));
        for k in 0..4 {
            assert!((left[k] + right[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn expectation_examples() {
        let zz = Operator4::tensor(&Operator2::pauli_z(), &Operator2::pauli_z());
        assert_abs_diff_eq!(
            expectation(&make_singlet(), &zz).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            expectation(&TwoQubitState::basis_state(0), &zz).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        for &(t1, t2) in &[(0.0, 0.3), (1.2, -0.7), (2.0, 2.0)] {
            let op = Operator4::tensor(
                &direction_operator(&Direction::from_polar_xz(t1)),
                &direction_operator(&Direction::from_polar_xz(t2)),
            );
            assert_abs_diff_eq!(
                expectation(&make_singlet(), &op).unwrap(),
                -(t2 - t1).cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let mut raising = Operator2::zero();
        raising.0[0][1] = ONE;
        let op = embed(&raising, Particle::One);
        assert!(matches!(
            expectation(&make_singlet(), &op),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn projectors() {
        let (p, m) = eigenprojectors(&Direction::z());
        assert_op2(&p, &Operator2([[ONE, ZERO], [ZERO, ZERO]]));
        assert_op2(&m, &Operator2([[ZERO, ZERO], [ZERO, ONE]]));

        let (p, m) = eigenprojectors(&Direction::x());
        let h = C64::new(0.5, 0.0);
        assert_op2(&p, &Operator2([[h, h], [h, h]]));
        assert_op2(&m, &Operator2([[h, -h], [-h, h]]));
    }

    #[test]
    fn partial_trace_examples() {
        let half = Operator2::identity().scale(C64::new(0.5, 0.0));
        assert_op2(&partial_trace(&make_singlet(), Particle::One), &half);
        assert_op2(&partial_trace(&make_singlet(), Particle::Two), &half);
        assert_op2(&partial_trace(&make_phi_plus(), Particle::One), &half);
        assert_op2(
            &partial_trace(&TwoQubitState::basis_state(0), Particle::Two),
            &Operator2([[ONE, ZERO], [ZERO, ZERO]]),
        );
    }

    #[test]
    fn partial_trace_of_product_is_local_projector() {
        let mut rng = rand::thread_rng();
        let (a, b) = (Ket2::random(&mut rng), Ket2::random(&mut rng));
        let state = TwoQubitState::product(&a, &b);
        let rho = partial_trace(&state, Particle::Two);
        let amps = b.amplitudes();
        let expected = Operator2(std::array::from_fn(|i| {
            std::array::from_fn(|j| amps[i] * amps[j].conj())
        }));
        assert_op2(&rho, &expected);
    }

    #[test]
    fn singlet_amplitudes_and_yx_overlaps() {
        let s = make_singlet();
        let a = s.amplitudes();
        assert_eq!(a[0], ZERO);
        assert_abs_diff_eq!(a[1].re, FRAC_1_SQRT_2);
        assert_abs_diff_eq!(a[2].re, -FRAC_1_SQRT_2);
        assert_eq!(a[3], ZERO);

        let basis = ReferenceBasis::yx();
        for eta in 0..4 {
            let p = basis.overlap(eta, &s).unwrap().norm_sqr();
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
        assert_eq!(basis.label(0).unwrap(), "y+,x+");
        assert_eq!(basis.label(3).unwrap(), "y-,x-");
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let r = ReferenceBasis::from_local_bases(
            [(Ket2::zero(), "0"), (Ket2::x_plus(), "+")],
            [(Ket2::zero(), "0"), (Ket2::one(), "1")],
        );
        assert!(matches!(r, Err(Error::BasisNotOrthonormal { .. })));
    }

    #[test]
    fn unnormalized_state_rejected() {
        let r = TwoQubitState::new([ONE, ONE, ZERO, ZERO]);
        assert!(matches!(r, Err(Error::NotNormalized { .. })));
        let r = TwoQubitState::new([C64::new(f64::NAN, 0.0), ZERO, ZERO, ZERO]);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
