//! The game of joint mapping.
//!
//! Each round the referee draws a direction pair from the two menus and a
//! hidden sample (η, ξ) from Born × χ, then hands each player the triple
//! (η, ξ, s̃) for its own particle and direction. The players answer ±1
//! without seeing each other's input or output. They win when, per
//! direction pair, the correlation of their answers matches the exact
//! correlation of the s̃ values.
//!
//! Isolation between the players is structural: [`Strategy::respond`] only
//! receives a [`PlayerView`] of its own triple plus its own random stream.
//! Anything else a strategy uses (for example a shared entangled pair) must
//! have been handed to it when it was constructed.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cvalspin::{HiddenSample, SpinModel, XiDistribution};
use crate::error::{Error, Result};
use crate::hilbert::{make_singlet, Direction, Particle, ReferenceBasis, C64};
use crate::rng::{self, Role, Stream};
use crate::tolerance::EQ_TOL;

pub const DEFAULT_SIGMA_K: f64 = 3.0;

/// Polar angles of the textbook CHSH menus, A: {0, π/2}, B: {π/4, −π/4}.
pub const CHSH_ANGLES: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_2,
    std::f64::consts::FRAC_PI_4,
    -std::f64::consts::FRAC_PI_4,
];

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub model: SpinModel,
    pub menu_a: Vec<Direction>,
    pub menu_b: Vec<Direction>,
    /// Probability of each (slot_a, slot_b) pair, indexed `slot_a * |B| + slot_b`.
    pub pair_weights: Vec<f64>,
    pub rounds: u64,
    pub seed: u64,
    pub sigma_k: f64,
}

impl GameConfig {
    /// Uniform pair weights and the default verdict width.
    pub fn new(
        model: SpinModel,
        menu_a: Vec<Direction>,
        menu_b: Vec<Direction>,
        rounds: u64,
        seed: u64,
    ) -> Result<Self> {
        let pairs = menu_a.len() * menu_b.len();
        let weights = if pairs == 0 {
            Vec::new()
        } else {
            vec![1.0 / pairs as f64; pairs]
        };
        let config = GameConfig {
            model,
            menu_a,
            menu_b,
            pair_weights: weights,
            rounds,
            seed,
            sigma_k: DEFAULT_SIGMA_K,
        };
        config.validate()?;
        Ok(config)
    }

    /// Singlet in the yx basis with the CHSH menus.
    ///
    /// Uses the three-point ξ law: under the two-point law player A's menu
    /// {0, π/2} cannot be told apart from s̃ (both slots give −1 whenever
    /// s̃ = −sinθ − ξcosθ and ξ = +1).
    pub fn singlet_chsh(rounds: u64, seed: u64) -> Self {
        let model = SpinModel::new(
            make_singlet(),
            ReferenceBasis::yx(),
            XiDistribution::three_point(),
        )
        .expect("singlet model");
        let [a, a2, b, b2] = CHSH_ANGLES.map(Direction::from_polar_xz);
        GameConfig::new(model, vec![a, a2], vec![b, b2], rounds, seed).expect("valid config")
    }

    pub fn with_pair_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.pair_weights = weights;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sigma_k(mut self, k: f64) -> Result<Self> {
        self.sigma_k = k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.menu_a.is_empty() || self.menu_b.is_empty() {
            return bad("direction menus must be non-empty".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.pair_weights.len() != self.pair_count() {
            return bad(format!(
                "{} pair weights for {} menu pairs",
                self.pair_weights.len(),
                self.pair_count()
            ));
        }
        if self.pair_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("pair weights must be finite and nonnegative".into());
        }
        let total: f64 = self.pair_weights.iter().sum();
        if (total - 1.0).abs() > EQ_TOL {
            return bad(format!("pair weights sum to {total}"));
        }
        if !(self.sigma_k.is_finite() && self.sigma_k > 0.0) {
            return bad(format!("sigma_k must be positive, got {}", self.sigma_k));
        }
        Ok(())
    }

    pub fn pair_count(&self) -> usize {
        self.menu_a.len() * self.menu_b.len()
    }

    /// (slot in A's menu, slot in B's menu) for a pair index.
    pub fn pair_slots(&self, pair_index: usize) -> Result<(usize, usize)> {
        if pair_index >= self.pair_count() {
            return Err(Error::Domain(format!(
                "pair index {pair_index} out of range"
            )));
        }
        Ok((
            pair_index / self.menu_b.len(),
            pair_index % self.menu_b.len(),
        ))
    }

    pub fn pair_directions(&self, pair_index: usize) -> Result<(Direction, Direction)> {
        let (i, j) = self.pair_slots(pair_index)?;
        Ok((self.menu_a[i], self.menu_b[j]))
    }

    /// Exact c-valued correlation the players have to reproduce for a pair.
    pub fn target(&self, pair_index: usize) -> Result<f64> {
        let (n1, n2) = self.pair_directions(pair_index)?;
        self.model.correlation_exact(&n1, &n2)
    }

    pub fn summary(&self) -> ConfigSummary {
        let amps = |a: &[C64]| a.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
        let basis = self.model.basis();
        ConfigSummary {
            state: amps(self.model.state().amplitudes()),
            basis_labels: basis.labels().to_vec(),
            basis_kets: (0..4)
                .map(|k| {
                    let (a, b) = basis.kets(k).expect("4 labels");
                    [amps(&a.amplitudes()), amps(&b.amplitudes())]
                })
                .collect(),
            xi_support: self.model.xi().support().to_vec(),
            xi_weights: self.model.xi().weights().to_vec(),
            menu_a: self.menu_a.iter().map(Direction::components).collect(),
            menu_b: self.menu_b.iter().map(Direction::components).collect(),
            pair_weights: self.pair_weights.clone(),
            rounds: self.rounds,
            seed: self.seed,
            sigma_k: self.sigma_k,
        }
    }

    /// SHA-256 over the canonical JSON of [`summary`](Self::summary).
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(&self.summary()).expect("summary serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn pair_sampler(&self) -> Result<WeightedIndex<f64>> {
        WeightedIndex::new(self.pair_weights.iter().copied())
            .map_err(|e| Error::InvalidConfig(format!("pair weights: {e}")))
    }
}

/// Fully resolved configuration as written into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub state: Vec<[f64; 2]>,
    pub basis_labels: Vec<String>,
    pub basis_kets: Vec<[Vec<[f64; 2]>; 2]>,
    pub xi_support: Vec<f64>,
    pub xi_weights: Vec<f64>,
    pub menu_a: Vec<[f64; 3]>,
    pub menu_b: Vec<[f64; 3]>,
    pub pair_weights: Vec<f64>,
    pub rounds: u64,
    pub seed: u64,
    pub sigma_k: f64,
}

/// What the referee sends one player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triple {
    pub eta_index: usize,
    /// Position of ξ in the public support of χ.
    pub xi_index: usize,
    pub xi: f64,
    pub s_tilde: f64,
}

/// Everything a strategy is shown in one round.
#[derive(Debug, Clone, Copy)]
pub struct PlayerView<'a> {
    pub round: u64,
    pub triple: &'a Triple,
    pub menu: &'a [Direction],
}

/// A player of the joint-mapping game.
///
/// `respond` must return +1 or −1; anything else is recorded as a protocol
/// violation and the round is excluded from the statistics.
pub trait Strategy: Send {
    fn id(&self) -> String;

    fn respond(&mut self, view: &PlayerView<'_>, rng: &mut Stream) -> Result<i32>;
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn respond(&mut self, view: &PlayerView<'_>, rng: &mut Stream) -> Result<i32> {
        (**self).respond(view, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub pair_index: usize,
    pub hidden: HiddenSample,
    pub triple_a: Triple,
    pub triple_b: Triple,
    pub out_a: Option<i8>,
    pub out_b: Option<i8>,
    pub violation: Option<String>,
}

impl RoundRecord {
    pub fn product(&self) -> Option<i8> {
        match (self.out_a, self.out_b) {
            (Some(a), Some(b)) if self.violation.is_none() => Some(a * b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub config_digest: String,
    pub strategy_a: String,
    pub strategy_b: String,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
}

#[derive(Serialize)]
struct CsvRow {
    round: u64,
    pair_index: usize,
    eta_index: usize,
    xi: f64,
    s_tilde_a: f64,
    s_tilde_b: f64,
    out_a: Option<i8>,
    out_b: Option<i8>,
}

impl Transcript {
    /// CSV with header
    /// `round,pair_index,eta_index,xi,s_tilde_A,s_tilde_B,out_A,out_B`.
    /// Aborted rounds leave both output fields empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        w.write_record([
            "round",
            "pair_index",
            "eta_index",
            "xi",
            "s_tilde_A",
            "s_tilde_B",
            "out_A",
            "out_B",
        ])?;
        for r in &self.records {
            let aborted = r.violation.is_some();
            w.serialize(CsvRow {
                round: r.round,
                pair_index: r.pair_index,
                eta_index: r.hidden.eta_index,
                xi: r.hidden.xi,
                s_tilde_a: r.triple_a.s_tilde,
                s_tilde_b: r.triple_b.s_tilde,
                out_a: if aborted { None } else { r.out_a },
                out_b: if aborted { None } else { r.out_b },
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn violations(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.violation.is_some())
            .count()
    }
}

/// One referee draw for a given direction pair: a shared (η, ξ) and the
/// two triples computed from it.
pub fn referee_round<R: Rng + ?Sized>(
    config: &GameConfig,
    pair_index: usize,
    rng: &mut R,
) -> Result<(HiddenSample, Triple, Triple)> {
    let (n1, n2) = config.pair_directions(pair_index)?;
    let hidden = config.model.sample_hidden(rng);
    let triple = |n: &Direction, particle| -> Result<Triple> {
        Ok(Triple {
            eta_index: hidden.eta_index,
            xi_index: hidden.xi_index,
            xi: hidden.xi,
            s_tilde: config
                .model
                .cval_spin(hidden.eta_index, hidden.xi, n, particle)?,
        })
    };
    Ok((
        hidden,
        triple(&n1, Particle::One)?,
        triple(&n2, Particle::Two)?,
    ))
}

fn checked_output(result: Result<i32>, who: &str) -> std::result::Result<i8, String> {
    match result {
        Ok(v) if v == 1 || v == -1 => Ok(v as i8),
        Ok(v) => Err(format!("player {who} answered {v}, expected ±1")),
        Err(e) => Err(format!("player {who} failed: {e}")),
    }
}

/// Plays `config.rounds` rounds. Player A holds particle 1, player B
/// particle 2; within a round A is asked first.
pub fn run_game(
    config: &GameConfig,
    strategy_a: &mut dyn Strategy,
    strategy_b: &mut dyn Strategy,
) -> Result<Transcript> {
    config.validate()?;
    let sampler = config.pair_sampler()?;
    let mut records = Vec::with_capacity(config.rounds as usize);
    for round in 0..config.rounds {
        let mut referee_rng = rng::stream(config.seed, Role::Referee, round);
        let pair_index = sampler.sample(&mut referee_rng);
        let (hidden, triple_a, triple_b) = referee_round(config, pair_index, &mut referee_rng)?;
        let (slot_a, slot_b) = config.pair_slots(pair_index)?;
        debug_assert!(slot_a < config.menu_a.len() && slot_b < config.menu_b.len());

        let view_a = PlayerView {
            round,
            triple: &triple_a,
            menu: &config.menu_a,
        };
        let a = checked_output(
            strategy_a.respond(&view_a, &mut rng::stream(config.seed, Role::PlayerA, round)),
            "A",
        );
        let view_b = PlayerView {
            round,
            triple: &triple_b,
            menu: &config.menu_b,
        };
        let b = checked_output(
            strategy_b.respond(&view_b, &mut rng::stream(config.seed, Role::PlayerB, round)),
            "B",
        );

        let violation = match (&a, &b) {
            (Err(x), Err(y)) => Some(format!("{x}; {y}")),
            (Err(x), _) | (_, Err(x)) => Some(x.clone()),
            _ => None,
        };
        records.push(RoundRecord {
            round,
            pair_index,
            hidden,
            triple_a,
            triple_b,
            out_a: a.ok(),
            out_b: b.ok(),
            violation,
        });
    }
    Ok(Transcript {
        config_digest: config.digest(),
        strategy_a: strategy_a.id(),
        strategy_b: strategy_b.id(),
        seed: config.seed,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub pair_index: usize,
    pub slot_a: usize,
    pub slot_b: usize,
    pub count: usize,
    pub target: f64,
    pub estimate: f64,
    pub deviation: f64,
    /// Sample standard deviation of o_A·o_B over √count.
    pub stderr: f64,
    /// sigma_k · max(stderr, 1/√count).
    pub band: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub sigma_k: f64,
    pub pairs: Vec<PairReport>,
    pub violations: usize,
    pub pass: bool,
}

impl ConservationReport {
    pub fn pair(&self, pair_index: usize) -> Option<&PairReport> {
        self.pairs.iter().find(|p| p.pair_index == pair_index)
    }

    pub fn max_deviation(&self) -> f64 {
        self.pairs.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Checks, pair by pair, whether the output correlation reproduces the
/// exact correlation within `sigma_k` standard errors.
///
/// The standard error used for the verdict is floored at 1/√count, the
/// largest value a ±1 variable can have, so a pair whose outputs never vary
/// cannot pass on a zero-width band.
pub fn evaluate_conservation(
    transcript: &Transcript,
    config: &GameConfig,
) -> Result<ConservationReport> {
    let n_pairs = config.pair_count();
    let mut sums = vec![0.0f64; n_pairs];
    let mut counts = vec![0usize; n_pairs];
    for record in &transcript.records {
        if record.pair_index >= n_pairs {
            return Err(Error::Domain(format!(
                "round {} has pair index {} but the config has {n_pairs} pairs",
                record.round, record.pair_index
            )));
        }
        if let Some(p) = record.product() {
            sums[record.pair_index] += f64::from(p);
            counts[record.pair_index] += 1;
        }
    }

    let mut pairs = Vec::new();
    for pair_index in 0..n_pairs {
        if config.pair_weights[pair_index] == 0.0 {
            continue;
        }
        let count = counts[pair_index];
        if count == 0 {
            return Err(Error::InsufficientData { pair_index });
        }
        let n = count as f64;
        let estimate = sums[pair_index] / n;
        // o_A·o_B is ±1, so Σx² = n.
        let variance = if count > 1 {
            ((n - n * estimate * estimate) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let stderr = variance.sqrt() / n.sqrt();
        let band = config.sigma_k * stderr.max(1.0 / n.sqrt());
        let target = config.target(pair_index)?;
        let deviation = (estimate - target).abs();
        let (slot_a, slot_b) = config.pair_slots(pair_index)?;
        pairs.push(PairReport {
            pair_index,
            slot_a,
            slot_b,
            count,
            target,
            estimate,
            deviation,
            stderr,
            band,
            pass: deviation <= band,
        });
    }
    let pass = pairs.iter().all(|p| p.pass);
    Ok(ConservationReport {
        sigma_k: config.sigma_k,
        pairs,
        violations: transcript.violations(),
        pass,
    })
}
