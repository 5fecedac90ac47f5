//! Numerical tolerances shared across the crate.

use serde::{Deserialize, Serialize};

/// Absolute tolerance for exact identities on 2- and 4-dimensional problems.
pub const EQ_TOL: f64 = 1e-12;

/// Imaginary residue allowed on a Hermitian expectation value.
pub const IMAG_TOL: f64 = 1e-10;

/// Overlaps |⟨η|ψ⟩| and Born weights at or below this are treated as zero.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Matching tolerance when a player identifies its direction from s̃.
pub const INFERENCE_TOL: f64 = 1e-9;

/// Run-time tolerance settings. Defaults match the constants above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub support: f64,
    pub inference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            support: SUPPORT_TOL,
            inference: INFERENCE_TOL,
        }
    }
}
