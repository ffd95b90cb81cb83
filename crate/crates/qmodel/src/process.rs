//! Stationary discrete stochastic processes and their empirical statistics.
//!
//! The running source is the perturbed coin: a two-state chain that keeps
//! its hidden state with probability `p` and flips it otherwise, emitting
//! the new state as the output symbol. `p = 0` degenerates to the period-2
//! process `...010101...`, `p = 1` to a constant stream, and `p = 0.5` to
//! unbiased coin flips.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A finite time series over the alphabet `0..alphabet_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    pub symbols: Vec<u8>,
    pub alphabet_size: u8,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<u8>, alphabet_size: u8) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyInput("sequence must contain at least one symbol".into()));
        }
        if alphabet_size == 0 || symbols.iter().any(|&s| s >= alphabet_size) {
            return Err(Error::InvalidDistribution(format!(
                "symbols must lie below the alphabet size {alphabet_size}"
            )));
        }
        Ok(SymbolSequence { symbols, alphabet_size })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Write as a newline-free ASCII digit stream.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        assert!(self.alphabet_size <= 10, "digit-stream format needs alphabet <= 10");
        let bytes: Vec<u8> = self.symbols.iter().map(|s| b'0' + s).collect();
        std::fs::write(path, bytes)?;
        Ok(())
    }

    /// Read a digit-stream file written by [`SymbolSequence::write_file`].
    /// Trailing whitespace is tolerated, embedded whitespace is not.
    pub fn read_file(path: &Path, alphabet_size: u8) -> Result<Self> {
        let raw = std::fs::read(path)?;
        let mut symbols = Vec::with_capacity(raw.len());
        for (i, b) in raw.iter().enumerate() {
            match b {
                b'0'..=b'9' => symbols.push(b - b'0'),
                b'\n' | b'\r' | b' ' if i + 2 >= raw.len() => {}
                other => {
                    return Err(Error::InvalidDistribution(format!(
                        "unexpected byte {other:#x} at offset {i} in sequence file"
                    )))
                }
            }
        }
        SymbolSequence::new(symbols, alphabet_size)
    }
}

/// Parameters of the perturbed coin generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbedCoinParams {
    /// Probability that the hidden state persists at each step.
    pub p: f64,
    pub seed: u64,
    /// Hidden state before the first emission.
    pub initial_state: u8,
}

impl PerturbedCoinParams {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("coin parameter p = {p} outside [0, 1]")));
        }
        Ok(PerturbedCoinParams { p, seed, initial_state: 0 })
    }

    pub fn with_initial_state(mut self, state: u8) -> Self {
        self.initial_state = state;
        self
    }
}

/// Draw `n` symbols from the perturbed coin. The chain keeps its state with
/// probability `p` and flips otherwise; the emitted symbol is the new state.
pub fn generate_perturbed_coin(params: PerturbedCoinParams, n: usize) -> Result<SymbolSequence> {
    if n == 0 {
        return Err(Error::EmptyInput("requested sequence length is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = params.initial_state & 1;
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen::<f64>() >= params.p {
            state ^= 1;
        }
        symbols.push(state);
    }
    SymbolSequence::new(symbols, 2)
}

/// Sliding-window maximum-likelihood estimate of the next-symbol
/// distribution given the last `L` symbols. Histories that never occur are
/// absent from the table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDistribution {
    /// History length the table is conditioned on.
    pub history_len: usize,
    pub alphabet_size: u8,
    /// history word -> probability vector over the next symbol.
    pub table: BTreeMap<Vec<u8>, Vec<f64>>,
    /// history word -> number of windows it was seen in.
    pub counts: BTreeMap<Vec<u8>, u64>,
}

impl ConditionalDistribution {
    pub fn probability(&self, history: &[u8], next: u8) -> Option<f64> {
        self.table.get(history).map(|v| v[next as usize])
    }

    pub fn total_windows(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Empirical weight of a history word among all windows.
    pub fn weight(&self, history: &[u8]) -> f64 {
        let total = self.total_windows();
        if total == 0 {
            return 0.0;
        }
        *self.counts.get(history).unwrap_or(&0) as f64 / total as f64
    }
}

/// Estimate `P(x_0 | x_{-L..0})` from all `N - L` sliding windows.
pub fn conditional_distribution(seq: &SymbolSequence, l: usize) -> Result<ConditionalDistribution> {
    if l >= seq.len() {
        return Err(Error::InsufficientData(format!(
            "history length {l} needs a sequence longer than {}",
            seq.len()
        )));
    }
    let a = seq.alphabet_size as usize;
    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut next_counts: BTreeMap<Vec<u8>, Vec<u64>> = BTreeMap::new();
    for i in l..seq.len() {
        let history = seq.symbols[i - l..i].to_vec();
        let next = seq.symbols[i] as usize;
        *counts.entry(history.clone()).or_insert(0) += 1;
        next_counts.entry(history).or_insert_with(|| vec![0; a])[next] += 1;
    }
    let table = next_counts
        .into_iter()
        .map(|(h, ns)| {
            let total: u64 = ns.iter().sum();
            let probs = ns.iter().map(|&c| c as f64 / total as f64).collect();
            (h, probs)
        })
        .collect();
    Ok(ConditionalDistribution { history_len: l, alphabet_size: seq.alphabet_size, table, counts })
}

/// Result of the effective-Markov-order search.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovOrderEstimate {
    pub r_eff: usize,
    /// `false` when no order up to the bound satisfied the tolerance.
    pub converged: bool,
    /// The max-average total-variation distance at each tested order.
    pub distances: Vec<f64>,
}

/// Smallest history length `r` such that prepending one more symbol moves
/// the conditional next-symbol distribution by less than `xi`, where the
/// displacement is the count-weighted average total-variation distance over
/// observed `r`-contexts, maximized over the prepended symbol pair.
pub fn effective_markov_order(
    seq: &SymbolSequence,
    xi: f64,
    l_max: usize,
) -> Result<MarkovOrderEstimate> {
    assert!(xi > 0.0, "tolerance must be positive");
    assert!(l_max >= 1, "order bound must be at least 1");
    let mut tables = Vec::with_capacity(l_max + 2);
    for l in 0..=(l_max + 1).min(seq.len() - 1) {
        tables.push(conditional_distribution(seq, l)?);
    }
    effective_markov_order_from_tables(&tables, xi, l_max)
}

/// Same search over externally supplied conditional tables; `tables[l]`
/// must be conditioned on history length `l`. Exact (analytic) tables give
/// the noise-free distances.
pub fn effective_markov_order_from_tables(
    tables: &[ConditionalDistribution],
    xi: f64,
    l_max: usize,
) -> Result<MarkovOrderEstimate> {
    let mut distances = Vec::new();
    for r in 0..=l_max {
        if r + 1 >= tables.len() {
            return Err(Error::InsufficientData(format!(
                "no statistics available at history length {}",
                r + 1
            )));
        }
        let d = max_average_context_distance(&tables[r], &tables[r + 1])?;
        distances.push(d);
        if d < xi {
            return Ok(MarkovOrderEstimate { r_eff: r, converged: true, distances });
        }
    }
    Ok(MarkovOrderEstimate { r_eff: l_max, converged: false, distances })
}

/// `max_{x,x'}` of the count-weighted average over contexts `w` of
/// `TV(P(.|x w), P(.|x' w))`. Pairs with no jointly observed context
/// contribute nothing.
fn max_average_context_distance(
    contexts: &ConditionalDistribution,
    extended: &ConditionalDistribution,
) -> Result<f64> {
    let a = extended.alphabet_size;
    if contexts.history_len + 1 != extended.history_len {
        return Err(Error::DimensionMismatch(
            "context tables must differ by one symbol of history".into(),
        ));
    }
    if extended.table.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no contexts observed at history length {}",
            extended.history_len
        )));
    }
    let mut worst = 0.0f64;
    for x in 0..a {
        for xp in (x + 1)..a {
            let mut weighted = 0.0;
            let mut total_weight = 0.0;
            for (w, &count) in &contexts.counts {
                let mut h1 = Vec::with_capacity(w.len() + 1);
                h1.push(x);
                h1.extend_from_slice(w);
                let mut h2 = h1.clone();
                h2[0] = xp;
                let (Some(p), Some(q)) = (extended.table.get(&h1), extended.table.get(&h2))
                else {
                    continue;
                };
                weighted += count as f64 * total_variation(p, q);
                total_weight += count as f64;
            }
            if total_weight > 0.0 {
                worst = worst.max(weighted / total_weight);
            }
        }
    }
    Ok(worst)
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Exact conditional tables for the perturbed coin, usable wherever the
/// empirical tables are. Counts are scaled stationary weights.
pub fn perturbed_coin_exact_tables(p: f64, max_len: usize) -> Vec<ConditionalDistribution> {
    const SCALE: f64 = 1e12;
    let mut tables = Vec::with_capacity(max_len + 1);
    for l in 0..=max_len {
        let mut table = BTreeMap::new();
        let mut counts = BTreeMap::new();
        for word_id in 0u64..(1 << l) {
            let word: Vec<u8> = (0..l).map(|k| ((word_id >> (l - 1 - k)) & 1) as u8).collect();
            // Stationary probability of the word: the emitted symbol equals
            // the hidden state, so the word fixes the state path.
            let mut prob = 0.5;
            for pair in word.windows(2) {
                prob *= if pair[0] == pair[1] { p } else { 1.0 - p };
            }
            if l == 0 {
                prob = 1.0;
            }
            if prob <= 0.0 {
                continue;
            }
            let last = word.last().copied();
            let dist = match last {
                Some(s) => {
                    let stay = p;
                    if s == 0 {
                        vec![stay, 1.0 - stay]
                    } else {
                        vec![1.0 - stay, stay]
                    }
                }
                // Empty history: next symbol follows the stationary law.
                None => vec![0.5, 0.5],
            };
            counts.insert(word.clone(), (prob * SCALE).round() as u64);
            table.insert(word, dist);
        }
        tables.push(ConditionalDistribution {
            history_len: l,
            alphabet_size: 2,
            table,
            counts,
        });
    }
    tables
}
