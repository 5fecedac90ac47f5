//! Exhaustive searches over local classical strategies.
//!
//! A classical pair of players is, per hidden value λ = (η, ξ), a local
//! assignment of ±1 to each slot of each menu. The output correlation for
//! a direction pair is then Σ_λ Pr(λ)·a_i(λ)·b_j(λ). Local randomness and
//! pre-shared randomness only mix such assignments, so the reachable
//! correlation vectors of stochastic strategies form the convex hull of
//! the per-λ assignment vectors.

use std::collections::HashMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::DeterministicTable;
use crate::error::{Error, Result};
use crate::game::GameConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchLimits {
    /// Largest number of hidden values (η, ξ) the search accepts.
    pub max_hidden_values: usize,
    /// Largest number of distinct partial correlation vectors kept while
    /// enumerating deterministic tables; beyond it that part is skipped.
    pub max_states: usize,
    /// Largest |menu A| + |menu B|.
    pub max_menu_slots: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_hidden_values: 64,
            max_states: 2_000_000,
            max_menu_slots: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshMaxResult {
    /// Largest CHSH value over all local deterministic assignments.
    pub best_chsh: f64,
    /// Smallest, for the two-sided bound.
    pub worst_chsh: f64,
    /// (a, a′, b, b′) reaching `best_chsh`.
    pub argmax: [i8; 4],
    /// Correlations produced by `argmax`, ordered (ab, ab′, a′b, a′b′).
    pub per_pair: [f64; 4],
    /// CHSH combination of the supplied target correlations.
    pub target_chsh: f64,
    /// |target_chsh| − max(|best|, |worst|).
    pub gap: f64,
}

/// Maximizes C(a,b) + C(a,b′) + C(a′,b) − C(a′,b′) over the 16 local
/// deterministic assignments (a, a′, b, b′) ∈ {±1}⁴.
///
/// The objective is linear in the per-λ responses, so this single-λ
/// maximum bounds every classical strategy, including λ-dependent and
/// randomized ones.
pub fn lhv_chsh_max(targets: [f64; 4]) -> ChshMaxResult {
    let mut best = f64::NEG_INFINITY;
    let mut worst = f64::INFINITY;
    let mut argmax = [1i8; 4];
    for bits in 0u8..16 {
        let v: [i8; 4] = std::array::from_fn(|k| if bits >> k & 1 == 1 { 1 } else { -1 });
        let [a, a2, b, b2] = v.map(f64::from);
        let value = a * b + a * b2 + a2 * b - a2 * b2;
        if value > best {
            best = value;
            argmax = v;
        }
        worst = worst.min(value);
    }
    let [a, a2, b, b2] = argmax.map(f64::from);
    let target_chsh = targets[0] + targets[1] + targets[2] - targets[3];
    ChshMaxResult {
        best_chsh: best,
        worst_chsh: worst,
        argmax,
        per_pair: [a * b, a * b2, a2 * b, a2 * b2],
        target_chsh,
        gap: target_chsh.abs() - best.abs().max(worst.abs()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedOptimum {
    pub min_worst_deviation: f64,
    pub correlations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicOptimum {
    pub min_worst_deviation: f64,
    pub correlations: Vec<f64>,
    pub table_a: DeterministicTable,
    pub table_b: DeterministicTable,
    /// Distinct correlation vectors reachable by deterministic tables.
    pub reachable_vectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationSearchResult {
    /// Exact c-valued correlation per direction pair.
    pub targets: Vec<f64>,
    /// Pairs that enter the worst-case deviation (nonzero weight).
    pub active_pairs: Vec<usize>,
    pub hidden_values: usize,
    /// Best over randomized local strategies: the headline number.
    pub min_worst_pair_deviation: f64,
    pub mixed: MixedOptimum,
    pub deterministic: Option<DeterministicOptimum>,
    pub deterministic_skipped: Option<String>,
}

struct Pattern {
    products: Vec<f64>,
    bits: u32,
}

/// Distinct product vectors a_i·b_j over all local assignments.
fn local_patterns(na: usize, nb: usize) -> Vec<Pattern> {
    let mut seen: HashMap<Vec<i8>, ()> = HashMap::new();
    let mut out = Vec::new();
    for bits in 0u32..(1 << (na + nb)) {
        let sign = |k: usize| if bits >> k & 1 == 1 { 1i8 } else { -1 };
        let key: Vec<i8> = (0..na)
            .flat_map(|i| (0..nb).map(move |j| (i, j)))
            .map(|(i, j)| sign(i) * sign(na + j))
            .collect();
        if seen.insert(key.clone(), ()).is_none() {
            out.push(Pattern {
                products: key.into_iter().map(f64::from).collect(),
                bits,
            });
        }
    }
    out
}

fn worst_deviation(values: &[f64], targets: &[f64], active: &[usize]) -> f64 {
    active
        .iter()
        .map(|&p| (values[p] - targets[p]).abs())
        .fold(0.0, f64::max)
}

/// Smallest achievable worst-pair deviation over randomized local
/// strategies, as a linear program over mixtures of local assignments.
fn mixed_optimum(patterns: &[Pattern], targets: &[f64], active: &[usize]) -> Result<MixedOptimum> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mu: Vec<_> = patterns
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    lp.add_constraint(mu.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for &p in active {
        let row = |sign: f64| {
            mu.iter()
                .zip(patterns)
                .map(|(&v, pat)| (v, pat.products[p]))
                .chain(std::iter::once((t, sign)))
                .collect::<Vec<_>>()
        };
        lp.add_constraint(row(-1.0), ComparisonOp::Le, targets[p]);
        lp.add_constraint(row(1.0), ComparisonOp::Ge, targets[p]);
    }
    let solution = lp.solve().map_err(|e| Error::Optimization(e.to_string()))?;
    let weights: Vec<f64> = mu.iter().map(|&v| *solution.var_value(v)).collect();
    let correlations: Vec<f64> = (0..targets.len())
        .map(|p| {
            weights
                .iter()
                .zip(patterns)
                .map(|(w, pat)| w * pat.products[p])
                .sum()
        })
        .collect();
    Ok(MixedOptimum {
        // recomputed rather than read off the LP so the number is exact for
        // the returned mixture
        min_worst_deviation: worst_deviation(&correlations, targets, active),
        correlations,
    })
}

#[derive(Clone, Copy)]
struct Node {
    parent: u32,
    pattern: u16,
}

fn quantize(v: &[f64]) -> Vec<i64> {
    v.iter()
        .map(|x| (x * 4_294_967_296.0).round() as i64)
        .collect()
}

/// Enumerates every pair of deterministic tables, collapsing tables that
/// give the same correlation vector. `None` when `max_states` is exceeded.
fn deterministic_optimum(
    config: &GameConfig,
    lambdas: &[(usize, usize, f64)],
    patterns: &[Pattern],
    targets: &[f64],
    active: &[usize],
    max_states: usize,
) -> Result<Option<DeterministicOptimum>> {
    let dim = targets.len();
    let mut sums: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(lambdas.len());
    for &(_, _, w) in lambdas {
        let mut index: HashMap<Vec<i64>, u32> = HashMap::new();
        let mut next_sums = Vec::new();
        let mut nodes = Vec::new();
        for (si, s) in sums.iter().enumerate() {
            for (pi, pat) in patterns.iter().enumerate() {
                let e: Vec<f64> = s
                    .iter()
                    .zip(&pat.products)
                    .map(|(a, b)| a + w * b)
                    .collect();
                let key = quantize(&e);
                if index.contains_key(&key) {
                    continue;
                }
                index.insert(key, next_sums.len() as u32);
                next_sums.push(e);
                nodes.push(Node {
                    parent: si as u32,
                    pattern: pi as u16,
                });
                if next_sums.len() > max_states {
                    return Ok(None);
                }
            }
        }
        sums = next_sums;
        layers.push(nodes);
    }

    let (best_index, best_dev) = sums
        .iter()
        .enumerate()
        .map(|(i, e)| (i, worst_deviation(e, targets, active)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one state");

    let na = config.menu_a.len();
    let nb = config.menu_b.len();
    let xi_len = config.model.xi().len();
    let mut table_a = DeterministicTable::constant(1, na, xi_len)?;
    let mut table_b = DeterministicTable::constant(1, nb, xi_len)?;
    let mut cursor = best_index;
    for (layer, &(eta, xi_index, _)) in layers.iter().zip(lambdas).rev() {
        let node = layer[cursor];
        let bits = patterns[node.pattern as usize].bits;
        let sign = |k: usize| if bits >> k & 1 == 1 { 1i8 } else { -1 };
        for i in 0..na {
            table_a.set(i, eta, xi_index, sign(i))?;
        }
        for j in 0..nb {
            table_b.set(j, eta, xi_index, sign(na + j))?;
        }
        cursor = node.parent as usize;
    }

    Ok(Some(DeterministicOptimum {
        min_worst_deviation: best_dev,
        correlations: sums[best_index].clone(),
        table_a,
        table_b,
        reachable_vectors: sums.len(),
    }))
}

/// Smallest worst-pair deviation |Ê − C| any classical pair of players can
/// reach on `config`, with C the exact c-valued correlation per pair.
pub fn lhv_exhaustive_conservation(
    config: &GameConfig,
    limits: SearchLimits,
) -> Result<ConservationSearchResult> {
    config.validate()?;
    let (na, nb) = (config.menu_a.len(), config.menu_b.len());
    if na + nb > limits.max_menu_slots {
        return Err(Error::HiddenSupportTooLarge {
            size: na + nb,
            cap: limits.max_menu_slots,
        });
    }
    let model = &config.model;
    let lambdas: Vec<(usize, usize, f64)> = model
        .support_labels()
        .into_iter()
        .flat_map(|eta| {
            let p = model.born_probability(eta).expect("label in range");
            model
                .xi()
                .weights()
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(move |(k, &w)| (eta, k, p * w))
        })
        .collect();
    if lambdas.len() > limits.max_hidden_values {
        return Err(Error::HiddenSupportTooLarge {
            size: lambdas.len(),
            cap: limits.max_hidden_values,
        });
    }

    let targets = (0..config.pair_count())
        .map(|p| config.target(p))
        .collect::<Result<Vec<_>>>()?;
    let active: Vec<usize> = (0..config.pair_count())
        .filter(|&p| config.pair_weights[p] > 0.0)
        .collect();
    let patterns = local_patterns(na, nb);

    let mixed = mixed_optimum(&patterns, &targets, &active)?;
    let deterministic = deterministic_optimum(
        config,
        &lambdas,
        &patterns,
        &targets,
        &active,
        limits.max_states,
    )?;
    let deterministic_skipped = deterministic.is_none().then(|| {
        format!(
            "more than {} distinct correlation vectors over {} hidden values",
            limits.max_states,
            lambdas.len()
        )
    });

    Ok(ConservationSearchResult {
        targets,
        active_pairs: active,
        hidden_values: lambdas.len(),
        min_worst_pair_deviation: mixed.min_worst_deviation,
        mixed,
        deterministic,
        deterministic_skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_max_is_two() {
        let r = lhv_chsh_max([0.0; 4]);
        assert_eq!(r.best_chsh, 2.0);
        assert_eq!(r.worst_chsh, -2.0);
        let [a, a2, b, b2] = r.per_pair;
        assert_eq!(a + a2 + b - b2, 2.0);
    }

    #[test]
    fn chsh_gap_for_singlet_targets() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = lhv_chsh_max([-h, -h, -h, h]);
        assert!((r.target_chsh + 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((r.gap - (2.0 * std::f64::consts::SQRT_2 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_has_eight_product_patterns() {
        let p = local_patterns(2, 2);
        assert_eq!(p.len(), 8);
        assert_eq!(local_patterns(1, 1).len(), 2);
        assert_eq!(local_patterns(1, 3).len(), 8);
    }

    #[test]
    fn mixed_optimum_reaches_interior_targets() {
        let patterns = local_patterns(2, 2);
        let targets = [0.3, -0.2, 0.1, 0.4];
        let r = mixed_optimum(&patterns, &targets, &[0, 1, 2, 3]).unwrap();
        assert!(r.min_worst_deviation < 1e-9);
    }
}
