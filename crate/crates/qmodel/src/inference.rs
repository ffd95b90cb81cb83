//! Causal-state and quantum-memory-state inference.
//!
//! From a conditional table the inference step builds one real, non-negative
//! amplitude vector per observed history word, living in the basis of
//! length-`L` future words: the amplitude on future `f` is the square root
//! of the chained conditional probability of `f` given the history.
//! Statistically indistinguishable states are merged greedily, and the two
//! memory measures are Shannon entropy of the causal-state stationary
//! distribution (`C_mu`) and von Neumann entropy of the weighted state
//! mixture (`C_q`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::process::ConditionalDistribution;

/// A set of phase-less quantum memory states in the future-word basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryStateSet {
    /// Dimension of the future-word basis, `alphabet_size^history_len`.
    pub dim: usize,
    pub alphabet_size: u8,
    pub history_len: usize,
    /// Unit amplitude vectors, one per state.
    pub states: Vec<Vec<f64>>,
    /// Empirical weight of each state's history word(s).
    pub weights: Vec<f64>,
    /// History word each state was built from (representative after merge).
    pub labels: Vec<Vec<u8>>,
    /// `successor[i][x]` is the state reached from state `i` on symbol `x`.
    pub successor: Vec<Vec<Option<usize>>>,
}

impl MemoryStateSet {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Pairwise Gram matrix of the state vectors.
    pub fn gram(&self) -> RMatrix {
        let n = self.n_states();
        RMatrix::from_fn(n, n, |i, j| dot(&self.states[i], &self.states[j]))
    }

    /// One-step emission probability `P(x | state)`: the marginal of the
    /// squared amplitudes over futures starting with `x`.
    pub fn emission_probability(&self, state: usize, symbol: u8) -> f64 {
        let a = self.alphabet_size as usize;
        let block = self.dim / a;
        let start = symbol as usize * block;
        self.states[state][start..start + block].iter().map(|x| x * x).sum()
    }

    /// The exact two-state set for the perturbed coin, in the one-step
    /// future basis: state for history `s` has amplitudes
    /// `sqrt(P(x | s))` and successor `x` on symbol `x`.
    pub fn exact_perturbed_coin(p: f64) -> Self {
        let s0 = vec![p.sqrt(), (1.0 - p).sqrt()];
        let s1 = vec![(1.0 - p).sqrt(), p.sqrt()];
        MemoryStateSet {
            dim: 2,
            alphabet_size: 2,
            history_len: 1,
            states: vec![s0, s1],
            weights: vec![0.5, 0.5],
            labels: vec![vec![0], vec![1]],
            successor: vec![vec![Some(0), Some(1)], vec![Some(0), Some(1)]],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Build one memory state per observed history word. Futures whose
/// conditional chain passes through an unobserved context get amplitude
/// zero; the vector is renormalized over the reachable futures.
pub fn infer_memory_states(cond: &ConditionalDistribution, l: usize) -> Result<MemoryStateSet> {
    if cond.history_len != l {
        return Err(Error::DimensionMismatch(format!(
            "conditional table built for history length {}, requested {l}",
            cond.history_len
        )));
    }
    if cond.table.is_empty() {
        return Err(Error::EmptyInput("conditional table has no histories".into()));
    }
    let a = cond.alphabet_size as usize;
    let dim = a.pow(l as u32);
    let labels: Vec<Vec<u8>> = cond.table.keys().cloned().collect();
    let index: BTreeMap<&[u8], usize> =
        labels.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let total_windows = cond.total_windows() as f64;

    let mut states = Vec::with_capacity(labels.len());
    let mut weights = Vec::with_capacity(labels.len());
    let mut successor = Vec::with_capacity(labels.len());
    for word in &labels {
        let mut amps = vec![0.0; dim];
        chain_futures(cond, word, l, 1.0, 0, &mut amps);
        let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InsufficientData(format!(
                "no future reachable from history {word:?}"
            )));
        }
        for x in amps.iter_mut() {
            *x /= norm;
        }
        states.push(amps);
        weights.push(*cond.counts.get(word).unwrap() as f64 / total_windows);
        let succ = (0..a as u8)
            .map(|x| {
                let mut next = word[1.min(word.len())..].to_vec();
                next.push(x);
                if next.len() > l {
                    next.remove(0);
                }
                index.get(next.as_slice()).copied()
            })
            .collect();
        successor.push(succ);
    }
    Ok(MemoryStateSet {
        dim,
        alphabet_size: cond.alphabet_size,
        history_len: l,
        states,
        weights,
        labels,
        successor,
    })
}

/// Accumulate `sqrt(P(future | window))` amplitudes by sliding the history
/// window over each future prefix. `depth` symbols are already fixed by the
/// recursion path encoded in `base`.
fn chain_futures(
    cond: &ConditionalDistribution,
    window: &[u8],
    remaining: usize,
    prob: f64,
    base: usize,
    amps: &mut [f64],
) {
    if remaining == 0 {
        amps[base] = prob.sqrt();
        return;
    }
    let a = cond.alphabet_size as usize;
    let stride = a.pow((remaining - 1) as u32);
    let Some(dist) = cond.table.get(window) else {
        return; // unreachable context: leave the subtree at zero
    };
    for x in 0..a {
        let px = dist[x];
        if px <= 0.0 {
            continue;
        }
        let mut next = window[1.min(window.len())..].to_vec();
        next.push(x as u8);
        if next.len() > cond.history_len {
            next.remove(0);
        }
        chain_futures(cond, &next, remaining - 1, prob * px, base + x * stride, amps);
    }
}

/// Outcome of merging statistically similar memory states.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MergeReport {
    /// Overlap tolerance used: states join a cluster when their overlap
    /// with its representative is at least `1 - delta`.
    pub delta: f64,
    /// Partition of history words (digit strings) into clusters; the first
    /// entry of each cluster is its representative.
    pub clusters: Vec<Vec<String>>,
    /// Pairwise absolute overlaps of the merged representatives.
    pub gram: Vec<Vec<f64>>,
    /// Non-unifilar merges and other irregularities observed.
    pub warnings: Vec<String>,
}

/// Merge with the default tolerance `delta = 1 / (2 sqrt(n_process))`.
pub fn merge_states(set: &MemoryStateSet, n_process: usize) -> Result<(MemoryStateSet, MergeReport)> {
    merge_states_with_delta(set, 0.5 / (n_process as f64).sqrt())
}

/// Greedy weight-ordered clustering: walk states in descending weight and
/// attach each to the first cluster whose representative overlaps by at
/// least `1 - delta`, else found a new cluster. Successor relabelling
/// conflicts are resolved by majority weight and recorded as warnings.
pub fn merge_states_with_delta(
    set: &MemoryStateSet,
    delta: f64,
) -> Result<(MemoryStateSet, MergeReport)> {
    if set.n_states() == 0 {
        return Err(Error::EmptyInput("cannot merge an empty state set".into()));
    }
    let mut order: Vec<usize> = (0..set.n_states()).collect();
    order.sort_by(|&i, &j| {
        set.weights[j]
            .partial_cmp(&set.weights[i])
            .unwrap()
            .then_with(|| set.labels[i].cmp(&set.labels[j]))
    });

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let mut joined = false;
        for cluster in clusters.iter_mut() {
            let rep = cluster[0];
            let overlap = dot(&set.states[i], &set.states[rep]).abs();
            if overlap >= 1.0 - delta {
                cluster.push(i);
                joined = true;
                break;
            }
        }
        if !joined {
            clusters.push(vec![i]);
        }
    }

    let assignment: BTreeMap<usize, usize> = clusters
        .iter()
        .enumerate()
        .flat_map(|(c, members)| members.iter().map(move |&m| (m, c)))
        .collect();

    let a = set.alphabet_size as usize;
    let mut warnings = Vec::new();
    let mut new_successor = Vec::with_capacity(clusters.len());
    for (c, members) in clusters.iter().enumerate() {
        let mut row = Vec::with_capacity(a);
        for x in 0..a {
            // Vote over members' successors, weighted by member weight.
            let mut votes: BTreeMap<usize, f64> = BTreeMap::new();
            for &m in members {
                if let Some(next) = set.successor[m][x] {
                    *votes.entry(assignment[&next]).or_insert(0.0) += set.weights[m];
                }
            }
            if votes.len() > 1 {
                warnings.push(format!(
                    "non-unifilar merge: cluster {c} symbol {x} maps to {} clusters; kept majority",
                    votes.len()
                ));
            }
            let winner = votes
                .into_iter()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(next, _)| next);
            row.push(winner);
        }
        new_successor.push(row);
    }

    let merged = MemoryStateSet {
        dim: set.dim,
        alphabet_size: set.alphabet_size,
        history_len: set.history_len,
        states: clusters.iter().map(|m| set.states[m[0]].clone()).collect(),
        weights: clusters.iter().map(|m| m.iter().map(|&i| set.weights[i]).sum()).collect(),
        labels: clusters.iter().map(|m| set.labels[m[0]].clone()).collect(),
        successor: new_successor,
    };
    let gram = merged.gram();
    let report = MergeReport {
        delta,
        clusters: clusters
            .iter()
            .map(|m| m.iter().map(|&i| label_string(&set.labels[i])).collect())
            .collect(),
        gram: (0..merged.n_states())
            .map(|i| (0..merged.n_states()).map(|j| gram[(i, j)].abs()).collect())
            .collect(),
        warnings,
    };
    Ok((merged, report))
}

fn label_string(label: &[u8]) -> String {
    label.iter().map(|s| char::from(b'0' + s)).collect()
}

/// A unifilar edge-emitting hidden Markov model over causal states.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonMachine {
    /// `transitions[state][symbol]` is the target state and probability.
    pub transitions: Vec<Vec<Option<(usize, f64)>>>,
    pub stationary: Vec<f64>,
}

impl EpsilonMachine {
    pub fn n_states(&self) -> usize {
        self.transitions.len()
    }

    /// The exact machine of the perturbed coin: two causal states with
    /// stay probability `p`, collapsing to a single state at `p = 0.5`.
    pub fn perturbed_coin(p: f64) -> Self {
        if (p - 0.5).abs() < 1e-12 {
            return EpsilonMachine {
                transitions: vec![vec![Some((0, 0.5)), Some((0, 0.5))]],
                stationary: vec![1.0],
            };
        }
        EpsilonMachine {
            transitions: vec![
                vec![Some((0, p)), Some((1, 1.0 - p))],
                vec![Some((0, 1.0 - p)), Some((1, p))],
            ],
            stationary: vec![0.5, 0.5],
        }
    }

    /// Build a machine from merged clusters: one causal state per cluster,
    /// transition probabilities weight-averaged over cluster members'
    /// conditionals, targets taken from the merged successor map.
    pub fn from_merged(
        merged: &MemoryStateSet,
        cond: &ConditionalDistribution,
        report: &MergeReport,
    ) -> Result<Self> {
        let a = merged.alphabet_size as usize;
        let mut transitions = Vec::with_capacity(merged.n_states());
        for (c, members) in report.clusters.iter().enumerate() {
            let mut probs = vec![0.0; a];
            let mut total = 0.0;
            for label in members {
                let word: Vec<u8> = label.bytes().map(|b| b - b'0').collect();
                let weight = *cond.counts.get(&word).unwrap_or(&0) as f64;
                if let Some(dist) = cond.table.get(&word) {
                    for x in 0..a {
                        probs[x] += weight * dist[x];
                    }
                    total += weight;
                }
            }
            if total == 0.0 {
                return Err(Error::InsufficientData(format!("cluster {c} has no observations")));
            }
            let mut row = Vec::with_capacity(a);
            for x in 0..a {
                let p = probs[x] / total;
                if p <= 0.0 {
                    row.push(None);
                    continue;
                }
                match merged.successor[c][x] {
                    Some(next) => row.push(Some((next, p))),
                    None => {
                        return Err(Error::InsufficientData(format!(
                            "cluster {c} emits {x} with probability {p:.3e} but has no successor"
                        )))
                    }
                }
            }
            transitions.push(row);
        }
        let stationary = stationary_distribution(&transitions)?;
        Ok(EpsilonMachine { transitions, stationary })
    }

    /// Probability of emitting `word` starting from `state`.
    pub fn word_probability(&self, mut state: usize, word: &[u8]) -> f64 {
        let mut prob = 1.0;
        for &x in word {
            match self.transitions[state][x as usize] {
                Some((next, p)) => {
                    prob *= p;
                    state = next;
                }
                None => return 0.0,
            }
        }
        prob
    }
}

fn stationary_distribution(transitions: &[Vec<Option<(usize, f64)>>]) -> Result<Vec<f64>> {
    let n = transitions.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for (s, row) in transitions.iter().enumerate() {
            for entry in row.iter().flatten() {
                next[entry.0] += pi[s] * entry.1;
            }
        }
        let total: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= total;
        }
        let diff = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    // Fixed-point check.
    let mut image = vec![0.0; n];
    for (s, row) in transitions.iter().enumerate() {
        for entry in row.iter().flatten() {
            image[entry.0] += pi[s] * entry.1;
        }
    }
    let err = pi.iter().zip(&image).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if err > 1e-10 {
        return Err(Error::SingularMatrix(format!(
            "stationary distribution did not converge (residual {err:.3e})"
        )));
    }
    Ok(pi)
}

/// Shannon entropy (base 2) of the stationary causal-state distribution.
pub fn classical_statistical_complexity(machine: &EpsilonMachine) -> f64 {
    shannon_entropy(&machine.stationary)
}

pub fn shannon_entropy(probs: &[f64]) -> f64 {
    // Adding 0.0 folds the -0.0 of degenerate distributions into +0.0.
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>() + 0.0
}

/// Von Neumann entropy (base 2) of the weighted mixture of memory states,
/// computed from the spectrum of the weighted Gram matrix
/// `sqrt(w_i w_j) <s_i|s_j>`, which matches the density-matrix spectrum on
/// its support. Eigenvalues below 1e-12 are clamped to zero.
pub fn quantum_statistical_memory(set: &MemoryStateSet) -> f64 {
    let n = set.n_states();
    let m = RMatrix::from_fn(n, n, |i, j| {
        (set.weights[i] * set.weights[j]).sqrt() * dot(&set.states[i], &set.states[j])
    });
    let (eigs, _) = m.sym_eigen();
    entropy_of_spectrum(&eigs)
}

pub(crate) fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    -eigs
        .iter()
        .map(|&l| if l < 1e-12 { 0.0 } else { l })
        .filter(|&l| l > 0.0)
        .map(|l| l * l.log2())
        .sum::<f64>()
        + 0.0
}

/// Closed-form quantum statistical memory of the perturbed coin: binary
/// entropy of `1/2 + sqrt(p (1 - p))`.
pub fn perturbed_coin_cq(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    let d = (p * (1.0 - p)).sqrt();
    shannon_entropy(&[0.5 + d, 0.5 - d])
}

/// The p-range where mitigated quantum models stay cheaper in cumulative
/// memory than the classical machine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageRegion {
    /// `n_classical * c_mu / n_mc`: the `C_q` budget per sample.
    pub cq_threshold: f64,
    /// The closed p-interval where `perturbed_coin_cq(p) <= threshold`,
    /// excluding `p = 0.5` itself.
    pub p_interval: (f64, f64),
    /// Set when the threshold admits every `p` in `[0, 1]`.
    pub full_interval: bool,
}

/// Solve `n_mc * C_q <= n_classical * C_mu` for the perturbed coin by
/// bisection on each side of `p = 0.5`, to 1e-6.
pub fn memory_advantage_region(n_mc: f64, n_classical: f64, c_mu: f64) -> AdvantageRegion {
    assert!(n_mc > 0.0 && n_classical > 0.0 && c_mu > 0.0, "inputs must be positive");
    let threshold = n_classical * c_mu / n_mc;
    if threshold >= 1.0 {
        return AdvantageRegion {
            cq_threshold: threshold,
            p_interval: (0.0, 1.0),
            full_interval: true,
        };
    }
    // C_q decreases from 1 to 0 on [0, 0.5]; find the crossing.
    let mut lo = 0.0;
    let mut hi = 0.5;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if perturbed_coin_cq(mid) > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let left = 0.5 * (lo + hi);
    // Mirror crossing on (0.5, 1] by its own bisection.
    let mut lo2 = 0.5;
    let mut hi2 = 1.0;
    while hi2 - lo2 > 1e-6 {
        let mid = 0.5 * (lo2 + hi2);
        if perturbed_coin_cq(mid) <= threshold {
            lo2 = mid;
        } else {
            hi2 = mid;
        }
    }
    let right = 0.5 * (lo2 + hi2);
    AdvantageRegion { cq_threshold: threshold, p_interval: (left, right), full_interval: false }
}
