//! Run specifications: JSON file fields overridden by command-line flags,
//! then resolved against the defaults.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cvspin::cvalspin::{SpinModel, XiDistribution};
use cvspin::hilbert::{make_phi_plus, make_singlet, Ket2, ReferenceBasis, TwoQubitState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VerifyTheorem1,
    RunGame,
    LhvSearch,
    ChshGame,
    CvalTable,
}

/// Every field optional; used for both the config file and the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PartialSpec {
    pub mode: Option<Mode>,
    pub state: Option<String>,
    pub basis: Option<String>,
    pub xi: Option<String>,
    pub angles: Option<String>,
    pub rounds: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub strategy_a: Option<String>,
    pub strategy_b: Option<String>,
    pub sigma_k: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl PartialSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| anyhow!("{}:{}:{}: {}", path.display(), e.line(), e.column(), e))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: PartialSpec) -> PartialSpec {
        PartialSpec {
            mode: over.mode.or(self.mode),
            state: over.state.or(self.state),
            basis: over.basis.or(self.basis),
            xi: over.xi.or(self.xi),
            angles: over.angles.or(self.angles),
            rounds: over.rounds.or(self.rounds),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            strategy_a: over.strategy_a.or(self.strategy_a),
            strategy_b: over.strategy_b.or(self.strategy_b),
            sigma_k: over.sigma_k.or(self.sigma_k),
            out: over.out.or(self.out),
            workers: over.workers.or(self.workers),
        }
    }
}

/// A spec with every default filled in. This is what reports embed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunSpec {
    pub mode: Mode,
    pub state: String,
    pub basis: String,
    pub xi: String,
    pub angles: String,
    pub rounds: u64,
    pub trials: u64,
    pub seed: u64,
    pub strategy_a: String,
    pub strategy_b: String,
    pub sigma_k: f64,
    pub out: PathBuf,
    pub workers: usize,
}

pub const DEFAULT_ANGLES: &str = "0,pi/2,pi/4,-pi/4";

impl RunSpec {
    pub fn resolve(partial: PartialSpec) -> Result<Self> {
        let mode = partial
            .mode
            .ok_or_else(|| anyhow!("--mode: missing; expected one of verify-theorem1, run-game, lhv-search, chsh-game, cval-table"))?;
        let default_xi = match mode {
            Mode::RunGame | Mode::LhvSearch => "three-point",
            _ => "two-point",
        };
        let default_angles = match mode {
            Mode::CvalTable => "pi/3",
            _ => DEFAULT_ANGLES,
        };
        let workers = partial.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
        let spec = RunSpec {
            mode,
            state: partial.state.unwrap_or_else(|| "singlet".into()),
            basis: partial.basis.unwrap_or_else(|| "yx".into()),
            xi: partial.xi.unwrap_or_else(|| default_xi.into()),
            angles: partial.angles.unwrap_or_else(|| default_angles.into()),
            rounds: partial.rounds.unwrap_or(100_000),
            trials: partial.trials.unwrap_or(100),
            seed: partial.seed.unwrap_or(1),
            strategy_a: partial.strategy_a.unwrap_or_else(|| "quantum".into()),
            strategy_b: partial.strategy_b.unwrap_or_else(|| "quantum".into()),
            sigma_k: partial.sigma_k.unwrap_or(3.0),
            out: partial.out.unwrap_or_else(|| PathBuf::from("out")),
            workers: workers.max(1),
        };
        if spec.rounds == 0 {
            bail!("--rounds: must be at least 1");
        }
        if spec.trials == 0 {
            bail!("--trials: must be at least 1");
        }
        if !(spec.sigma_k.is_finite() && spec.sigma_k > 0.0) {
            bail!("--sigma-k: must be positive, got {}", spec.sigma_k);
        }
        Ok(spec)
    }

    /// Hash of the fields that influence results (not `out`, not `workers`).
    pub fn digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("spec serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("out");
            obj.remove("workers");
        }
        hex::encode(Sha256::digest(
            serde_json::to_vec(&v).expect("value serializes"),
        ))
    }

    pub fn model(&self) -> Result<SpinModel> {
        let state = parse_state(&self.state).context("--state")?;
        let basis = parse_basis(&self.basis).context("--basis")?;
        let xi = parse_xi(&self.xi).context("--xi")?;
        let model = SpinModel::new(state, basis, xi)?;
        if let Some(eta) = model.first_unsupported() {
            bail!(
                "--basis: label {} has zero overlap with the state; c-valued spins are undefined there",
                model.basis().label(eta)?
            );
        }
        Ok(model)
    }

    pub fn angle_list(&self) -> Result<Vec<f64>> {
        parse_list(&self.angles, parse_angle).context("--angles")
    }

    pub fn chsh_angles(&self) -> Result<[f64; 4]> {
        let v = self.angle_list()?;
        <[f64; 4]>::try_from(v.as_slice())
            .map_err(|_| anyhow!("--angles: expected 4 angles a,a2,b,b2, got {}", v.len()))
    }
}

fn parse_list<T>(text: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .enumerate()
        .map(|(i, tok)| f(tok).with_context(|| format!("item {} ({tok:?})", i + 1)))
        .collect()
}

fn parse_real(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| anyhow!("not a number: {tok:?}"))?;
    if !v.is_finite() {
        bail!("not finite: {tok:?}");
    }
    Ok(v)
}

/// Accepts plain reals and multiples of π such as `pi/3`, `-pi/4`,
/// `2pi/3`, `3*pi/4`.
pub fn parse_angle(tok: &str) -> Result<f64> {
    let t = tok.trim().to_ascii_lowercase();
    let Some(at) = t.find("pi") else {
        return parse_real(&t);
    };
    let (head, tail) = (t[..at].trim(), t[at + 2..].trim());
    let head = head.strip_suffix('*').unwrap_or(head).trim();
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_real(h)?,
    };
    let denom = match tail {
        "" => 1.0,
        d => {
            let d = d
                .strip_prefix('/')
                .ok_or_else(|| anyhow!("bad angle {tok:?}"))?;
            let v = parse_real(d)?;
            if v == 0.0 {
                bail!("division by zero in {tok:?}");
            }
            v
        }
    };
    Ok(coeff * std::f64::consts::PI / denom)
}

/// Normalizes with a warning above 1e-6 norm deviation; refuses above 1e-2.
fn normalize(amps: [C64; 4]) -> Result<TwoQubitState> {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let dev = (norm - 1.0).abs();
    if dev > 1e-2 {
        bail!("amplitudes have norm {norm}, more than 1e-2 away from 1");
    }
    if dev > 1e-6 {
        eprintln!("warning: state norm is {norm}; normalizing");
    }
    Ok(TwoQubitState::normalized(amps)?)
}

fn complex_pairs(values: &[f64]) -> Vec<C64> {
    values.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

pub fn parse_state(text: &str) -> Result<TwoQubitState> {
    let t = text.trim();
    match t {
        "singlet" => return Ok(make_singlet()),
        "phi-plus" => return Ok(make_phi_plus()),
        _ => {}
    }
    if let Some(rest) = t.strip_prefix("product:") {
        let v = parse_list(rest, parse_real)?;
        let kets = match v.len() {
            4 => [
                Ket2::normalized(C64::new(v[0], 0.0), C64::new(v[1], 0.0))?,
                Ket2::normalized(C64::new(v[2], 0.0), C64::new(v[3], 0.0))?,
            ],
            8 => {
                let c = complex_pairs(&v);
                [Ket2::normalized(c[0], c[1])?, Ket2::normalized(c[2], c[3])?]
            }
            n => bail!("product state takes 4 real or 8 (re, im) values, got {n}"),
        };
        return Ok(TwoQubitState::product(&kets[0], &kets[1]));
    }
    let raw = t.strip_prefix("raw:").unwrap_or(t);
    let v = parse_list(raw, parse_real)
        .context("expected singlet, phi-plus, product:<values> or 8 reals")?;
    if v.len() != 8 {
        bail!(
            "a raw state takes 8 reals (4 complex amplitudes as re, im), got {}",
            v.len()
        );
    }
    let c = complex_pairs(&v);
    normalize([c[0], c[1], c[2], c[3]])
}

pub fn parse_basis(text: &str) -> Result<ReferenceBasis> {
    match text.trim() {
        "yx" => Ok(ReferenceBasis::yx()),
        "computational" => Ok(ReferenceBasis::computational()),
        other => {
            let raw = other.strip_prefix("raw:").unwrap_or(other);
            let v =
                parse_list(raw, parse_real).context("expected yx, computational or 16 reals")?;
            if v.len() != 16 {
                bail!(
                    "a raw basis takes 16 reals (two kets for particle 1, then two for particle 2, each as 2 complex amplitudes), got {}",
                    v.len()
                );
            }
            let c = complex_pairs(&v);
            let ket = |k: usize| Ket2::new(c[2 * k], c[2 * k + 1]);
            Ok(ReferenceBasis::from_local_bases(
                [(ket(0)?, "a0"), (ket(1)?, "a1")],
                [(ket(2)?, "b0"), (ket(3)?, "b1")],
            )?)
        }
    }
}

pub fn parse_xi(text: &str) -> Result<XiDistribution> {
    match text.trim() {
        "two-point" => Ok(XiDistribution::two_point()),
        "three-point" => Ok(XiDistribution::three_point()),
        other => {
            let raw = other.strip_prefix("raw:").unwrap_or(other);
            let (support, weights) = raw.split_once(';').ok_or_else(|| {
                anyhow!("expected two-point, three-point or raw:<values>;<weights>")
            })?;
            Ok(XiDistribution::new(
                parse_list(support, parse_real)?,
                parse_list(weights, parse_real)?,
            )?)
        }
    }
}
