//! Players for the joint-mapping game and searches over classical play.
//!
//! Every player is constructed from the public pre-game agreement: the
//! prepared state, the reference basis, the ξ law and its own direction
//! menu. During play it only sees its own triple.

mod classical;
mod inference;
mod lhv;
mod quantum;

pub use classical::{
    classical_respond, ConstantStrategy, DeterministicTable, StochasticStrategy, StochasticTable,
    TableEntry, TableStrategy,
};
pub use inference::{check_menu_distinguishable, coplanar_angle_candidates, infer_direction};
pub use lhv::{
    lhv_chsh_max, lhv_exhaustive_conservation, ChshMaxResult, ConservationSearchResult,
    DeterministicOptimum, MixedOptimum, SearchLimits,
};
pub use quantum::{
    quantum_measure_local, quantum_pair, MeasurementEvent, QuantumStrategy, SharedPairSource,
};

use crate::cvalspin::SpinModel;
use crate::hilbert::{Direction, Particle};

/// What a player knows before the game starts.
#[derive(Debug, Clone)]
pub struct PlayerContext {
    pub model: SpinModel,
    pub menu: Vec<Direction>,
    pub particle: Particle,
    pub tol: f64,
}

impl PlayerContext {
    pub fn new(model: SpinModel, menu: Vec<Direction>, particle: Particle) -> Self {
        let tol = model.tolerances().inference;
        PlayerContext {
            model,
            menu,
            particle,
            tol,
        }
    }
}
