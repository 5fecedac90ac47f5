//! C-valued spin variables for two-qubit states.
//!
//! A c-valued spin assigns a definite real number to a spin component
//! before any measurement, built from the prepared state, a label η of a
//! factorizable reference basis and a shared hidden variable ξ:
//!
//! ```text
//! s̃(η, ξ) = Re{⟨η|σ_n|ψ⟩/⟨η|ψ⟩} + ξ · Im{⟨η|σ_n|ψ⟩/⟨η|ψ⟩}
//! ```
//!
//! With η drawn from the Born rule and ξ from any distribution with zero
//! mean and unit second moment, the average of s̃₁·s̃₂ equals the quantum
//! correlation ⟨ψ|σ_n1⊗σ_n2|ψ⟩ exactly ([`cvalspin::SpinModel::correlation_exact`]).
//!
//! The [`game`] module turns this into a two-player game: a referee hands
//! each player its (η, ξ, s̃) and the players must output ±1 values whose
//! correlation reproduces the one of the s̃'s. [`strategies`] contains the
//! classical and quantum players together with exhaustive searches over
//! classical strategies, and [`chsh`] the CHSH bookkeeping.

pub mod chsh;
pub mod cvalspin;
pub mod error;
pub mod game;
pub mod hilbert;
pub mod rng;
pub mod strategies;
pub mod tolerance;

pub use error::{Error, Result};
pub use hilbert::{Direction, Ket2, Operator2, Operator4, Particle, ReferenceBasis, TwoQubitState};
