//! One function per mode. Each validates its inputs before doing any work.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use cvspin::chsh::{
    chsh_arithmetic_game, chsh_cval, chsh_from_report, chsh_quantum, quantum_bit_pair,
    quantum_win_probability, ChshAngles, ChshReport, FixedBits, CLASSICAL_BOUND,
};
use cvspin::cvalspin::{SpinModel, XiDistribution};
use cvspin::game::{evaluate_conservation, run_game, GameConfig, Strategy};
use cvspin::hilbert::{
    direction_operator, expectation, Direction, Operator4, Particle, ReferenceBasis, TwoQubitState,
};
use cvspin::rng::{self, Role};
use cvspin::strategies::{
    lhv_chsh_max, lhv_exhaustive_conservation, ConstantStrategy, DeterministicTable, PlayerContext,
    QuantumStrategy, SearchLimits, SharedPairSource, StochasticStrategy, StochasticTable,
    TableStrategy,
};

use crate::spec::{Mode, RunSpec};

pub const CONSERVATION_TOL: f64 = 1e-10;

/// What a finished mode hands back to `main`.
pub struct Outcome {
    pub result: Value,
    /// False when a verification the mode performs did not hold.
    pub verified: bool,
}

/// Bad input, as opposed to a failure during the run.
pub struct SpecError(pub anyhow::Error);

pub fn run(spec: &RunSpec) -> Result<Result<Outcome>, SpecError> {
    let job = prepare(spec).map_err(SpecError)?;
    Ok(job(spec))
}

type Job = Box<dyn FnOnce(&RunSpec) -> Result<Outcome>>;

fn prepare(spec: &RunSpec) -> Result<Job> {
    match spec.mode {
        Mode::VerifyTheorem1 => {
            let basis = crate::spec::parse_basis(&spec.basis).context("--basis")?;
            let xi = crate::spec::parse_xi(&spec.xi).context("--xi")?;
            Ok(Box::new(move |spec| verify_theorem1(spec, basis, xi)))
        }
        Mode::RunGame => {
            let config = game_config(spec)?;
            let a = build_strategy(&spec.strategy_a, &config, Particle::One, None)
                .context("--strategy-a")?;
            let shared = a.1.clone();
            let b = build_strategy(&spec.strategy_b, &config, Particle::Two, shared)
                .context("--strategy-b")?;
            Ok(Box::new(move |spec| run_game_mode(spec, config, a.0, b.0)))
        }
        Mode::LhvSearch => {
            let config = game_config(spec)?;
            Ok(Box::new(move |_| lhv_search(config)))
        }
        Mode::ChshGame => {
            let [a, a2, b, b2] = spec.chsh_angles()?;
            let angles = ChshAngles::new(a, a2, b, b2).context("--angles")?;
            let state = crate::spec::parse_state(&spec.state).context("--state")?;
            let model = spec.model()?;
            Ok(Box::new(move |spec| chsh_game(spec, state, model, angles)))
        }
        Mode::CvalTable => {
            let model = spec.model()?;
            let thetas = spec.angle_list()?;
            Ok(Box::new(move |spec| cval_table(spec, model, thetas)))
        }
    }
}

fn game_config(spec: &RunSpec) -> Result<GameConfig> {
    let model = spec.model()?;
    let [a, a2, b, b2] = spec.chsh_angles()?.map(Direction::from_polar_xz);
    let config = GameConfig::new(model, vec![a, a2], vec![b, b2], spec.rounds, spec.seed)
        .and_then(|c| c.with_sigma_k(spec.sigma_k))?;
    Ok(config)
}

type Shared = Option<Arc<Mutex<SharedPairSource>>>;

/// Parses a strategy name. Quantum players share one pair source, passed
/// along in the second element.
fn build_strategy(
    name: &str,
    config: &GameConfig,
    particle: Particle,
    shared: Shared,
) -> Result<(Box<dyn Strategy>, Shared)> {
    let menu = match particle {
        Particle::One => config.menu_a.clone(),
        Particle::Two => config.menu_b.clone(),
    };
    let ctx = PlayerContext::new(config.model.clone(), menu.clone(), particle);
    let xi_len = config.model.xi().len();
    let strategy: Box<dyn Strategy> = match name.trim() {
        "quantum" => {
            let source = shared.clone().unwrap_or_else(|| {
                Arc::new(Mutex::new(
                    SharedPairSource::new(*config.model.state()).without_log(),
                ))
            });
            let s = QuantumStrategy::new(ctx, Arc::clone(&source))?;
            return Ok((Box::new(s), Some(source)));
        }
        "sign" => {
            let table = DeterministicTable::sign_of_s_tilde(&config.model, &menu, particle)?;
            Box::new(TableStrategy::new("sign", ctx, table)?)
        }
        "constant:+1" | "constant:1" => Box::new(ConstantStrategy(1)),
        "constant:-1" => Box::new(ConstantStrategy(-1)),
        "coin" => {
            let table = StochasticTable::uniform(0.5, menu.len(), xi_len)?;
            Box::new(StochasticStrategy::new("coin", ctx, table)?)
        }
        other => {
            if let Some(seed) = other.strip_prefix("random-table:") {
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| anyhow!("strategy {other:?}: seed must be an unsigned integer"))?;
                let mut rng = rng::stream(seed, Role::Setup, particle.index() as u64);
                let table = DeterministicTable::random(menu.len(), xi_len, &mut rng);
                Box::new(TableStrategy::new(other, ctx, table)?)
            } else if let Some(path) = other.strip_prefix("table:") {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("strategy {other:?}: cannot read {path}"))?;
                let table = DeterministicTable::from_json(&text)
                    .with_context(|| format!("strategy {other:?}"))?;
                Box::new(TableStrategy::new(other, ctx, table)?)
            } else {
                bail!(
                    "unknown strategy {other:?}; expected quantum, sign, constant:+1, constant:-1, coin, random-table:<seed> or table:<path>"
                );
            }
        }
    };
    Ok((strategy, shared))
}

#[derive(Serialize)]
struct TrialRecord {
    trial: u64,
    quantum: f64,
    cval: f64,
    deviation: f64,
}

fn verify_theorem1(spec: &RunSpec, basis: ReferenceBasis, xi: XiDistribution) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()?;
    let seed = spec.seed;
    let records: Vec<Result<Option<TrialRecord>>> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng::stream(seed, Role::Trial, trial);
                let state = TwoQubitState::random(&mut rng);
                let (n1, n2) = (Direction::random(&mut rng), Direction::random(&mut rng));
                let model = SpinModel::new(state, basis.clone(), xi.clone())?;
                if model.first_unsupported().is_some() {
                    return Ok(None);
                }
                let op = Operator4::tensor(&direction_operator(&n1), &direction_operator(&n2));
                let quantum = expectation(&state, &op)?;
                let cval = model.correlation_exact(&n1, &n2)?;
                Ok(Some(TrialRecord {
                    trial,
                    quantum,
                    cval,
                    deviation: (quantum - cval).abs(),
                }))
            })
            .collect()
    });
    let mut trials = Vec::new();
    let mut skipped = 0u64;
    for r in records {
        match r? {
            Some(t) => trials.push(t),
            None => skipped += 1,
        }
    }
    let max_deviation = trials.iter().map(|t| t.deviation).fold(0.0, f64::max);
    let pass = !trials.is_empty() && max_deviation <= CONSERVATION_TOL;
    Ok(Outcome {
        result: json!({
            "trials": trials.len(),
            "skipped_zero_support": skipped,
            "max_deviation": max_deviation,
            "tolerance": CONSERVATION_TOL,
            "pass": pass,
            "records": trials,
        }),
        verified: pass,
    })
}

fn run_game_mode(
    spec: &RunSpec,
    config: GameConfig,
    mut a: Box<dyn Strategy>,
    mut b: Box<dyn Strategy>,
) -> Result<Outcome> {
    let transcript = run_game(&config, &mut a, &mut b)?;
    let report = evaluate_conservation(&transcript, &config)?;
    let chsh = chsh_from_report(&report).ok().map(|(value, stderr)| {
        json!({
            "correlations": value.correlations,
            "value": value.value,
            "stderr": stderr,
            "exceeds_classical": value.abs() > CLASSICAL_BOUND,
        })
    });
    std::fs::create_dir_all(&spec.out)
        .with_context(|| format!("cannot create {}", spec.out.display()))?;
    let path = spec.out.join("transcript.csv");
    let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    transcript.write_csv(BufWriter::new(file))?;
    Ok(Outcome {
        result: json!({
            "game_config": config.summary(),
            "game_config_digest": config.digest(),
            "strategy_a": transcript.strategy_a,
            "strategy_b": transcript.strategy_b,
            "conservation": report,
            "chsh_estimate": chsh,
            "transcript": "transcript.csv",
        }),
        verified: true,
    })
}

fn lhv_search(config: GameConfig) -> Result<Outcome> {
    let search = lhv_exhaustive_conservation(&config, SearchLimits::default())?;
    let chsh_max = <[f64; 4]>::try_from(search.targets.as_slice())
        .ok()
        .map(lhv_chsh_max);
    Ok(Outcome {
        result: json!({
            "game_config": config.summary(),
            "game_config_digest": config.digest(),
            "search": search,
            "chsh_max": chsh_max,
        }),
        verified: true,
    })
}

fn chsh_game(
    spec: &RunSpec,
    state: TwoQubitState,
    model: SpinModel,
    angles: ChshAngles,
) -> Result<Outcome> {
    let quantum = chsh_quantum(&state, &angles)?;
    let cval = chsh_cval(&model, &angles)?;
    let (mut qa, mut qb) = quantum_bit_pair(&state, &angles);
    let quantum_game = chsh_arithmetic_game(&mut qa, &mut qb, spec.rounds, spec.seed)?;
    let classical_game = chsh_arithmetic_game(
        &mut FixedBits([0, 0]),
        &mut FixedBits([0, 0]),
        spec.rounds,
        spec.seed,
    )?;
    let entry_diff = quantum.max_entry_diff(&cval);
    let report = ChshReport::new(angles, &quantum);
    let verified = entry_diff <= CONSERVATION_TOL && report.within_tsirelson;
    Ok(Outcome {
        result: json!({
            "quantum": report,
            "cval": ChshReport::new(angles, &cval),
            "max_entry_diff": entry_diff,
            "arithmetic_game": {
                "quantum": quantum_game,
                "quantum_exact": quantum_win_probability(&state, &angles),
                "classical": classical_game,
                "classical_exact": 0.75,
            },
        }),
        verified,
    })
}

#[derive(Serialize)]
struct CvalRow {
    theta: f64,
    eta_index: usize,
    eta_label: String,
    xi: f64,
    s_tilde_1: f64,
    s_tilde_2: f64,
}

fn cval_table(spec: &RunSpec, model: SpinModel, thetas: Vec<f64>) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &theta in &thetas {
        let n = Direction::from_polar_xz(theta);
        for eta in 0..4 {
            for &xi in model.xi().support() {
                rows.push(CvalRow {
                    theta,
                    eta_index: eta,
                    eta_label: model.basis().label(eta)?.to_string(),
                    xi,
                    s_tilde_1: model.cval_spin(eta, xi, &n, Particle::One)?,
                    s_tilde_2: model.cval_spin(eta, xi, &n, Particle::Two)?,
                });
            }
        }
    }
    std::fs::create_dir_all(&spec.out)
        .with_context(|| format!("cannot create {}", spec.out.display()))?;
    write_rows(&spec.out.join("cval_table.csv"), &rows)?;
    Ok(Outcome {
        result: json!({ "rows": rows, "table": "cval_table.csv" }),
        verified: true,
    })
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
