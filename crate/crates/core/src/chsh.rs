//! CHSH bookkeeping and the arithmetic CHSH game.
//!
//! Correlations are always ordered (ab, ab′, a′b, a′b′) and combined as
//! C = C_ab + C_ab′ + C_a′b − C_a′b′. Verdicts compare |C| with the bounds.

use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::Serialize;

use crate::cvalspin::SpinModel;
use crate::error::{Error, Result};
use crate::game::ConservationReport;
use crate::hilbert::{
    direction_operator, expectation, Direction, Operator4, Particle, TwoQubitState,
};
use crate::rng::{self, Role, Stream};
use crate::strategies::SharedPairSource;
use crate::tolerance::EQ_TOL;

pub const CLASSICAL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// Polar angles in the xz-plane, stored in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        let all = [a, a_prime, b, b_prime];
        if all.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("CHSH angles must be finite".into()));
        }
        let [a, a_prime, b, b_prime] = all.map(|t| t.rem_euclid(2.0 * PI));
        Ok(ChshAngles {
            a,
            a_prime,
            b,
            b_prime,
        })
    }

    /// A: {0, π/2}, B: {π/4, −π/4}; reaches |C| = 2√2 on the singlet.
    pub fn optimal() -> Self {
        let [a, a2, b, b2] = crate::game::CHSH_ANGLES;
        ChshAngles::new(a, a2, b, b2).expect("finite")
    }

    pub fn menu_a(&self) -> [Direction; 2] {
        [self.a, self.a_prime].map(Direction::from_polar_xz)
    }

    pub fn menu_b(&self) -> [Direction; 2] {
        [self.b, self.b_prime].map(Direction::from_polar_xz)
    }

    /// Direction pairs in correlation order.
    pub fn pairs(&self) -> [(Direction, Direction); 4] {
        let [a, a2] = self.menu_a();
        let [b, b2] = self.menu_b();
        [(a, b), (a, b2), (a2, b), (a2, b2)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshValue {
    pub correlations: [f64; 4],
    pub value: f64,
}

impl ChshValue {
    pub fn abs(&self) -> f64 {
        self.value.abs()
    }

    pub fn max_entry_diff(&self, other: &ChshValue) -> f64 {
        self.correlations
            .iter()
            .zip(&other.correlations)
            .map(|(a, b)| (a - b).abs())
            .fold((self.value - other.value).abs(), f64::max)
    }
}

pub fn chsh_from_correlations(correlations: [f64; 4]) -> Result<ChshValue> {
    if let Some(c) = correlations
        .iter()
        .find(|c| !c.is_finite() || c.abs() > 1.0 + EQ_TOL)
    {
        return Err(Error::Domain(format!("correlation {c} outside [−1, 1]")));
    }
    let [ab, ab2, a2b, a2b2] = correlations;
    Ok(ChshValue {
        correlations,
        value: ab + ab2 + a2b - a2b2,
    })
}

pub fn chsh_quantum(state: &TwoQubitState, angles: &ChshAngles) -> Result<ChshValue> {
    let mut c = [0.0; 4];
    for (k, (n1, n2)) in angles.pairs().iter().enumerate() {
        let op = Operator4::tensor(&direction_operator(n1), &direction_operator(n2));
        c[k] = expectation(state, &op)?;
    }
    chsh_from_correlations(c)
}

/// CHSH of the c-valued spins, each correlation computed exactly.
pub fn chsh_cval(model: &SpinModel, angles: &ChshAngles) -> Result<ChshValue> {
    let mut c = [0.0; 4];
    for (k, (n1, n2)) in angles.pairs().iter().enumerate() {
        c[k] = model.correlation_exact(n1, n2)?;
    }
    chsh_from_correlations(c)
}

/// CHSH value estimated from a 2×2 game, with its standard error
/// √(Σ stderr²) from the per-pair sample standard errors.
pub fn chsh_from_report(report: &ConservationReport) -> Result<(ChshValue, f64)> {
    let mut c = [0.0; 4];
    let mut var = 0.0;
    for (k, ck) in c.iter_mut().enumerate() {
        let p = report
            .pair(k)
            .ok_or(Error::InsufficientData { pair_index: k })?;
        if (p.slot_a, p.slot_b) != (k / 2, k % 2) {
            return Err(Error::Domain("report does not come from 2×2 menus".into()));
        }
        *ck = p.estimate;
        var += p.stderr * p.stderr;
    }
    Ok((chsh_from_correlations(c)?, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub angles: ChshAngles,
    pub correlations: [f64; 4],
    pub value: f64,
    pub classical_bound: f64,
    pub tsirelson_bound: f64,
    pub exceeds_classical: bool,
    pub within_tsirelson: bool,
}

impl ChshReport {
    pub fn new(angles: ChshAngles, value: &ChshValue) -> Self {
        ChshReport {
            angles,
            correlations: value.correlations,
            value: value.value,
            classical_bound: CLASSICAL_BOUND,
            tsirelson_bound: TSIRELSON_BOUND,
            exceeds_classical: value.abs() > CLASSICAL_BOUND + EQ_TOL,
            within_tsirelson: value.abs() <= TSIRELSON_BOUND + 1e-10,
        }
    }
}

/// A player of the arithmetic CHSH game: input bit in, output bit out.
pub trait BitStrategy: Send {
    fn id(&self) -> String;

    fn respond(&mut self, round: u64, input: u8, rng: &mut Stream) -> Result<u8>;
}

/// Answers `f(input)` for a fixed truth table `[f(0), f(1)]`.
#[derive(Debug, Clone, Copy)]
pub struct FixedBits(pub [u8; 2]);

impl BitStrategy for FixedBits {
    fn id(&self) -> String {
        format!("fixed:{}{}", self.0[0], self.0[1])
    }

    fn respond(&mut self, _round: u64, input: u8, _rng: &mut Stream) -> Result<u8> {
        self.0
            .get(usize::from(input))
            .copied()
            .ok_or_else(|| Error::ProtocolViolation(format!("input bit {input}")))
    }
}

/// Measures its half of a shared pair along the angle chosen by the input
/// bit. Particle 1 maps outcome +1 to bit 0; particle 2 maps +1 to bit 1,
/// which undoes the singlet's anti-correlation.
#[derive(Debug, Clone)]
pub struct QuantumBitPlayer {
    particle: Particle,
    directions: [Direction; 2],
    source: Arc<Mutex<SharedPairSource>>,
}

impl BitStrategy for QuantumBitPlayer {
    fn id(&self) -> String {
        format!("quantum:{}", self.particle)
    }

    fn respond(&mut self, round: u64, input: u8, rng: &mut Stream) -> Result<u8> {
        let n = self
            .directions
            .get(usize::from(input))
            .ok_or_else(|| Error::ProtocolViolation(format!("input bit {input}")))?;
        let mut source = self
            .source
            .lock()
            .map_err(|_| Error::ProtocolViolation("pair source poisoned".into()))?;
        if source.round() != Some(round) {
            source.begin_round(round);
        }
        let o = source.measure(self.particle, n, rng)?;
        Ok(match (self.particle, o) {
            (Particle::One, 1) | (Particle::Two, -1) => 0,
            _ => 1,
        })
    }
}

pub fn quantum_bit_pair(
    state: &TwoQubitState,
    angles: &ChshAngles,
) -> (QuantumBitPlayer, QuantumBitPlayer) {
    let source = Arc::new(Mutex::new(SharedPairSource::new(*state).without_log()));
    (
        QuantumBitPlayer {
            particle: Particle::One,
            directions: angles.menu_a(),
            source: Arc::clone(&source),
        },
        QuantumBitPlayer {
            particle: Particle::Two,
            directions: angles.menu_b(),
            source,
        },
    )
}

/// Exact winning probability of [`quantum_bit_pair`] with uniform inputs.
pub fn quantum_win_probability(state: &TwoQubitState, angles: &ChshAngles) -> f64 {
    let src = SharedPairSource::new(*state);
    let (ma, mb) = (angles.menu_a(), angles.menu_b());
    let mut total = 0.0;
    for (x, na) in ma.iter().enumerate() {
        for (y, nb) in mb.iter().enumerate() {
            // outcomes (+,+), (+,−), (−,+), (−,−) → bits (0,1), (0,0), (1,1), (1,0)
            let p = src.joint_probabilities(na, nb);
            let same_bits = p[1] + p[2];
            total += 0.25
                * if x & y == 1 {
                    1.0 - same_bits
                } else {
                    same_bits
                };
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WinEstimate {
    pub rounds: u64,
    pub wins: u64,
    pub frequency: f64,
    pub stderr: f64,
}

impl WinEstimate {
    pub fn from_counts(wins: u64, rounds: u64) -> Self {
        let n = rounds as f64;
        let f = wins as f64 / n;
        WinEstimate {
            rounds,
            wins,
            frequency: f,
            stderr: (f * (1.0 - f) / n).sqrt(),
        }
    }
}

/// Uniform input bits x, y; a round is won iff x·y = a ⊕ b.
pub fn chsh_arithmetic_game(
    player_a: &mut dyn BitStrategy,
    player_b: &mut dyn BitStrategy,
    rounds: u64,
    seed: u64,
) -> Result<WinEstimate> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    let mut wins = 0u64;
    for round in 0..rounds {
        let mut referee = rng::stream(seed, Role::Referee, round);
        let x: u8 = referee.gen_range(0..2);
        let y: u8 = referee.gen_range(0..2);
        let a = player_a.respond(round, x, &mut rng::stream(seed, Role::PlayerA, round))?;
        let b = player_b.respond(round, y, &mut rng::stream(seed, Role::PlayerB, round))?;
        if a > 1 || b > 1 {
            return Err(Error::ProtocolViolation(format!(
                "round {round}: outputs ({a}, {b}) are not bits"
            )));
        }
        if x & y == a ^ b {
            wins += 1;
        }
    }
    Ok(WinEstimate::from_counts(wins, rounds))
}
