//! The quantum strategy: identify the direction, then measure a fresh
//! entangled pair along it.

use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::Serialize;

use super::{check_menu_distinguishable, infer_direction, PlayerContext};
use crate::cvalspin::SpinModel;
use crate::error::{Error, Result};
use crate::game::{PlayerView, Strategy};
use crate::hilbert::{
    direction_operator, eigenprojectors, embed, inner4, Direction, Particle, TwoQubitState, C64,
};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementEvent {
    pub round: u64,
    pub particle: Particle,
    pub direction: Direction,
    pub outcome: i8,
    /// Probability the outcome had at the time it was drawn.
    pub probability: f64,
}

/// An ensemble of identically prepared pairs, one per round.
///
/// Measurements collapse the round's pair; the next round starts from a
/// fresh copy of the prepared state.
#[derive(Debug, Clone)]
pub struct SharedPairSource {
    prepared: TwoQubitState,
    current: [C64; 4],
    round: Option<u64>,
    measured: [Option<i8>; 2],
    log: Vec<MeasurementEvent>,
    keep_log: bool,
}

impl SharedPairSource {
    pub fn new(prepared: TwoQubitState) -> Self {
        SharedPairSource {
            prepared,
            current: *prepared.amplitudes(),
            round: None,
            measured: [None; 2],
            log: Vec::new(),
            keep_log: true,
        }
    }

    pub fn without_log(mut self) -> Self {
        self.keep_log = false;
        self
    }

    /// Hands out a fresh pair for `round`.
    pub fn begin_round(&mut self, round: u64) {
        self.current = *self.prepared.amplitudes();
        self.round = Some(round);
        self.measured = [None; 2];
    }

    pub fn round(&self) -> Option<u64> {
        self.round
    }

    pub fn prepared(&self) -> &TwoQubitState {
        &self.prepared
    }

    /// True once both particles of the current pair have been measured.
    pub fn consumed(&self) -> bool {
        self.measured.iter().all(Option::is_some)
    }

    pub fn outcomes(&self) -> [Option<i8>; 2] {
        self.measured
    }

    pub fn log(&self) -> &[MeasurementEvent] {
        &self.log
    }

    /// Projective measurement of σ_n on one particle of the current pair.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        particle: Particle,
        n: &Direction,
        rng: &mut R,
    ) -> Result<i8> {
        if self.round.is_none() {
            self.begin_round(0);
        }
        if self.measured[particle.index()].is_some() {
            return Err(Error::DoubleMeasurement(particle));
        }
        let (plus, minus) = eigenprojectors(n);
        let projected_plus = embed(&plus, particle).apply(&self.current);
        let p_plus = inner4(&self.current, &projected_plus).re.clamp(0.0, 1.0);
        let (outcome, projected, p) = if rng.gen::<f64>() < p_plus {
            (1i8, projected_plus, p_plus)
        } else {
            (
                -1i8,
                embed(&minus, particle).apply(&self.current),
                1.0 - p_plus,
            )
        };
        let norm = p.sqrt();
        if norm == 0.0 {
            return Err(Error::ProtocolViolation(
                "measurement produced an outcome of zero probability".into(),
            ));
        }
        self.current = projected.map(|a| a / norm);
        self.measured[particle.index()] = Some(outcome);
        if self.keep_log {
            self.log.push(MeasurementEvent {
                round: self.round.unwrap_or(0),
                particle,
                direction: *n,
                outcome,
                probability: p,
            });
        }
        Ok(outcome)
    }

    /// Exact ⟨ψ|P_a⊗P_b|ψ⟩ on the prepared state, outcomes ordered
    /// (+,+), (+,−), (−,+), (−,−).
    pub fn joint_probabilities(&self, n1: &Direction, n2: &Direction) -> [f64; 4] {
        let (p1, m1) = eigenprojectors(n1);
        let (p2, m2) = eigenprojectors(n2);
        let psi = self.prepared.amplitudes();
        let mut out = [0.0; 4];
        for (k, (a, b)) in [(p1, p2), (p1, m2), (m1, p2), (m1, m2)].iter().enumerate() {
            let op = crate::hilbert::Operator4::tensor(a, b);
            out[k] = inner4(psi, &op.apply(psi)).re;
        }
        out
    }

    /// Sanity value: ⟨σ_n1 ⊗ σ_n2⟩ on the prepared state.
    pub fn correlation(&self, n1: &Direction, n2: &Direction) -> f64 {
        let op =
            crate::hilbert::Operator4::tensor(&direction_operator(n1), &direction_operator(n2));
        inner4(
            self.prepared.amplitudes(),
            &op.apply(self.prepared.amplitudes()),
        )
        .re
    }
}

/// Free-function form of [`SharedPairSource::measure`].
pub fn quantum_measure_local<R: Rng + ?Sized>(
    source: &mut SharedPairSource,
    particle: Particle,
    n: &Direction,
    rng: &mut R,
) -> Result<i8> {
    source.measure(particle, n, rng)
}

/// Holds one particle of each round's pair.
#[derive(Debug, Clone)]
pub struct QuantumStrategy {
    ctx: PlayerContext,
    source: Arc<Mutex<SharedPairSource>>,
}

impl QuantumStrategy {
    pub fn new(ctx: PlayerContext, source: Arc<Mutex<SharedPairSource>>) -> Result<Self> {
        check_menu_distinguishable(&ctx.model, &ctx.menu, ctx.particle, ctx.tol)?;
        Ok(QuantumStrategy { ctx, source })
    }

    pub fn source(&self) -> &Arc<Mutex<SharedPairSource>> {
        &self.source
    }
}

impl Strategy for QuantumStrategy {
    fn id(&self) -> String {
        "quantum".into()
    }

    fn respond(&mut self, view: &PlayerView<'_>, rng: &mut Stream) -> Result<i32> {
        let slot = infer_direction(
            &self.ctx.model,
            view.triple,
            view.menu,
            self.ctx.particle,
            self.ctx.tol,
        )?;
        let mut source = self
            .source
            .lock()
            .map_err(|_| Error::ProtocolViolation("pair source poisoned".into()))?;
        if source.round() != Some(view.round) {
            source.begin_round(view.round);
        }
        let outcome = source.measure(self.ctx.particle, &view.menu[slot], rng)?;
        Ok(i32::from(outcome))
    }
}

/// Two quantum players sharing a source of pairs prepared in the model's
/// state. Both menus are checked for inference-distinguishability first.
pub fn quantum_pair(
    model: &SpinModel,
    menu_a: &[Direction],
    menu_b: &[Direction],
) -> Result<(QuantumStrategy, QuantumStrategy)> {
    let source = Arc::new(Mutex::new(
        SharedPairSource::new(*model.state()).without_log(),
    ));
    let a = QuantumStrategy::new(
        PlayerContext::new(model.clone(), menu_a.to_vec(), Particle::One),
        Arc::clone(&source),
    )?;
    let b = QuantumStrategy::new(
        PlayerContext::new(model.clone(), menu_b.to_vec(), Particle::Two),
        source,
    )?;
    Ok((a, b))
}
