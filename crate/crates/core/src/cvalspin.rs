//! C-valued spin variables and their exact ensemble averages.
//!
//! Natural units are used throughout (ħ = 1), so ξ enters as a plain real.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    direction_operator, embed, Direction, Ket2, Particle, ReferenceBasis, TwoQubitState, C64,
};
use crate::tolerance::{Tolerances, EQ_TOL};

/// Finite-support law χ(ξ) with zero mean and unit second moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiDistribution {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl XiDistribution {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidXiDistribution(msg));
        if support.is_empty() {
            return bad("empty support".into());
        }
        if support.len() != weights.len() {
            return bad(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            ));
        }
        if support.iter().chain(&weights).any(|v| !v.is_finite()) {
            return bad("non-finite value".into());
        }
        if weights.iter().any(|&w| w < 0.0) {
            return bad("negative weight".into());
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > EQ_TOL {
            return bad(format!("weights sum to {total}"));
        }
        let dist = XiDistribution { support, weights };
        let (m1, m2) = (dist.mean(), dist.second_moment());
        if m1.abs() > EQ_TOL {
            return bad(format!("mean is {m1}, expected 0"));
        }
        if (m2 - 1.0).abs() > EQ_TOL {
            return bad(format!("second moment is {m2}, expected 1"));
        }
        Ok(dist)
    }

    /// ξ = ±1 with probability ½ each.
    pub fn two_point() -> Self {
        XiDistribution::new(vec![1.0, -1.0], vec![0.5, 0.5]).expect("valid two-point law")
    }

    /// ξ ∈ {−√2, 0, +√2} with weights ¼, ½, ¼.
    pub fn three_point() -> Self {
        let r = std::f64::consts::SQRT_2;
        XiDistribution::new(vec![-r, 0.0, r], vec![0.25, 0.5, 0.25]).expect("valid three-point law")
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * x * x)
            .sum()
    }

    /// Position of `xi` in the support, by exact comparison.
    pub fn index_of(&self, xi: f64) -> Option<usize> {
        self.support.iter().position(|&s| s == xi)
    }
}

/// Real and imaginary parts of ⟨η|σ_n|ψ⟩/⟨η|ψ⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakValueParts {
    pub re_part: f64,
    pub im_part: f64,
}

impl WeakValueParts {
    pub fn from_ratio(w: C64) -> Self {
        WeakValueParts {
            re_part: w.re,
            im_part: w.im,
        }
    }

    /// s̃ = Re + ξ·Im
    pub fn at(&self, xi: f64) -> f64 {
        self.re_part + xi * self.im_part
    }
}

/// One draw of the hidden data (η, ξ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HiddenSample {
    pub eta_index: usize,
    pub xi_index: usize,
    pub xi: f64,
}

/// Single-particle weak value ⟨η|σ_n|ψ⟩/⟨η|ψ⟩ for a one-qubit state.
///
/// For a product state this is what the two-qubit weak value reduces to.
pub fn local_weak_value(
    eta: &Ket2,
    n: &Direction,
    psi: &Ket2,
    support_tol: f64,
) -> Option<WeakValueParts> {
    let denom = eta.inner(psi);
    if denom.norm() <= support_tol {
        return None;
    }
    let num = direction_operator(n).matrix_element(eta, psi);
    Some(WeakValueParts::from_ratio(num / denom))
}

/// A prepared state together with the reference basis and ξ law that
/// define its c-valued spins.
#[derive(Debug, Clone)]
pub struct SpinModel {
    state: TwoQubitState,
    basis: ReferenceBasis,
    xi: XiDistribution,
    tol: Tolerances,
    overlaps: [C64; 4],
    born: [f64; 4],
    eta_sampler: WeightedIndex<f64>,
    xi_sampler: WeightedIndex<f64>,
}

impl SpinModel {
    pub fn new(state: TwoQubitState, basis: ReferenceBasis, xi: XiDistribution) -> Result<Self> {
        SpinModel::with_tolerances(state, basis, xi, Tolerances::default())
    }

    pub fn with_tolerances(
        state: TwoQubitState,
        basis: ReferenceBasis,
        xi: XiDistribution,
        tol: Tolerances,
    ) -> Result<Self> {
        let overlaps: [C64; 4] =
            std::array::from_fn(|k| basis.overlap(k, &state).expect("index within basis"));
        let born = overlaps.map(|a| a.norm_sqr());
        let sampling_weights: Vec<f64> = born
            .iter()
            .map(|&p| if p > tol.support { p } else { 0.0 })
            .collect();
        let eta_sampler = WeightedIndex::new(sampling_weights)
            .map_err(|e| Error::InvalidConfig(format!("Born weights: {e}")))?;
        let xi_sampler = WeightedIndex::new(xi.weights().iter().copied())
            .map_err(|e| Error::InvalidXiDistribution(e.to_string()))?;
        Ok(SpinModel {
            state,
            basis,
            xi,
            tol,
            overlaps,
            born,
            eta_sampler,
            xi_sampler,
        })
    }

    pub fn state(&self) -> &TwoQubitState {
        &self.state
    }

    pub fn basis(&self) -> &ReferenceBasis {
        &self.basis
    }

    pub fn xi(&self) -> &XiDistribution {
        &self.xi
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Pr(η|ψ) = |⟨η|ψ⟩|²
    pub fn born_probability(&self, eta_index: usize) -> Result<f64> {
        self.born
            .get(eta_index)
            .copied()
            .ok_or(Error::InvalidEtaIndex(eta_index))
    }

    pub fn in_support(&self, eta_index: usize) -> bool {
        self.born
            .get(eta_index)
            .is_some_and(|&p| p > self.tol.support)
    }

    /// Labels that carry Born weight; the others are skipped by every sum.
    pub fn support_labels(&self) -> Vec<usize> {
        (0..4).filter(|&k| self.in_support(k)).collect()
    }

    /// First label whose Born weight is at or below the support tolerance.
    ///
    /// The exact averages only reproduce quantum expectations when this is
    /// `None`: a label with ⟨η|ψ⟩ = 0 can still carry ⟨η|σ|ψ⟩ ≠ 0.
    pub fn first_unsupported(&self) -> Option<usize> {
        (0..4).find(|&k| !self.in_support(k))
    }

    pub fn weak_value_parts(
        &self,
        eta_index: usize,
        n: &Direction,
        particle: Particle,
    ) -> Result<WeakValueParts> {
        let overlap = *self
            .overlaps
            .get(eta_index)
            .ok_or(Error::InvalidEtaIndex(eta_index))?;
        if !self.in_support(eta_index) {
            return Err(Error::ZeroSupport {
                eta_index,
                label: self.basis.label(eta_index)?.to_string(),
                overlap: overlap.norm(),
            });
        }
        let op = embed(&direction_operator(n), particle);
        let num = self.basis.matrix_element(eta_index, &op, &self.state)?;
        Ok(WeakValueParts::from_ratio(num / overlap))
    }

    /// s̃_n(η, ξ|ψ) for the given particle.
    pub fn cval_spin(
        &self,
        eta_index: usize,
        xi: f64,
        n: &Direction,
        particle: Particle,
    ) -> Result<f64> {
        Ok(self.weak_value_parts(eta_index, n, particle)?.at(xi))
    }

    /// Draws η from the Born weights and, independently, ξ from χ.
    pub fn sample_hidden<R: Rng + ?Sized>(&self, rng: &mut R) -> HiddenSample {
        let eta_index = self.eta_sampler.sample(rng);
        let xi_index = self.xi_sampler.sample(rng);
        HiddenSample {
            eta_index,
            xi_index,
            xi: self.xi.support()[xi_index],
        }
    }

    /// ⟨s̃_n1 s̃_n2⟩ summed exactly over the finite hidden support.
    ///
    /// The ξ sum is done through the moments:
    /// Σ_ξ χ(ξ)(a + ξb)(c + ξd) = ac + m₁(ad + bc) + m₂·bd,
    /// so only the first two moments of χ can matter.
    pub fn correlation_exact(&self, n1: &Direction, n2: &Direction) -> Result<f64> {
        let (m1, m2) = (self.xi.mean(), self.xi.second_moment());
        let mut total = 0.0;
        for eta in self.support_labels() {
            let a = self.weak_value_parts(eta, n1, Particle::One)?;
            let b = self.weak_value_parts(eta, n2, Particle::Two)?;
            let xi_avg = a.re_part * b.re_part
                + m1 * (a.re_part * b.im_part + a.im_part * b.re_part)
                + m2 * a.im_part * b.im_part;
            total += self.born[eta] * xi_avg;
        }
        Ok(total)
    }

    /// Same quantity as [`correlation_exact`](Self::correlation_exact), by
    /// literal double summation over (η, ξ).
    pub fn correlation_by_summation(&self, n1: &Direction, n2: &Direction) -> Result<f64> {
        let mut total = 0.0;
        for eta in self.support_labels() {
            for (&xi, &w) in self.xi.support().iter().zip(self.xi.weights()) {
                let s1 = self.cval_spin(eta, xi, n1, Particle::One)?;
                let s2 = self.cval_spin(eta, xi, n2, Particle::Two)?;
                total += s1 * s2 * w * self.born[eta];
            }
        }
        Ok(total)
    }

    /// ⟨s̃_n⟩ for one particle.
    pub fn local_average_exact(&self, n: &Direction, particle: Particle) -> Result<f64> {
        let m1 = self.xi.mean();
        let mut total = 0.0;
        for eta in self.support_labels() {
            let w = self.weak_value_parts(eta, n, particle)?;
            total += self.born[eta] * (w.re_part + m1 * w.im_part);
        }
        Ok(total)
    }
}
