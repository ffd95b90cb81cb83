//! States, channels, and measurements in Pauli transfer matrix form.
//!
//! A state is the real column vector of its Pauli components
//! `rho_sigma = tr(sigma rho)`; a measurement is the real row vector
//! `M_sigma = tr(sigma M) / 2^n`; a channel is the real matrix
//! `O[sigma, tau] = tr(sigma O(tau)) / 2^n`. Expectation values are plain
//! dot products, and channel composition is matrix multiplication.
//!
//! Pauli indices run over `{I, X, Y, Z}^n` in lexicographic tensor order
//! with qubit 0 as the most significant factor, matching the basis-state
//! convention used by the synthesis module.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix, C64};
use crate::synthesis::{Gate, UnitaryMatrix};

/// One of the four single-qubit Pauli operators.
pub fn pauli_matrix(index: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    match index {
        0 => {
            m[(0, 0)] = C64::new(1.0, 0.0);
            m[(1, 1)] = C64::new(1.0, 0.0);
        }
        1 => {
            m[(0, 1)] = C64::new(1.0, 0.0);
            m[(1, 0)] = C64::new(1.0, 0.0);
        }
        2 => {
            m[(0, 1)] = C64::new(0.0, -1.0);
            m[(1, 0)] = C64::new(0.0, 1.0);
        }
        3 => {
            m[(0, 0)] = C64::new(1.0, 0.0);
            m[(1, 1)] = C64::new(-1.0, 0.0);
        }
        _ => panic!("Pauli index must be 0..4"),
    }
    m
}

/// Tensor-product Pauli for a multi-qubit index in base-4 (qubit 0 most
/// significant).
pub fn pauli_string_matrix(index: usize, n_qubits: usize) -> CMatrix {
    let mut m = CMatrix::identity(1);
    for q in 0..n_qubits {
        let digit = (index >> (2 * (n_qubits - 1 - q))) & 3;
        m = m.kron(&pauli_matrix(digit));
    }
    m
}

/// Number of non-identity factors in a Pauli index.
pub fn pauli_weight(index: usize, n_qubits: usize) -> usize {
    (0..n_qubits)
        .filter(|q| (index >> (2 * (n_qubits - 1 - q))) & 3 != 0)
        .count()
}

/// A channel in Pauli transfer form: a real `4^n x 4^n` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTransferMatrix {
    pub n_qubits: usize,
    pub matrix: RMatrix,
}

impl PauliTransferMatrix {
    pub fn identity(n_qubits: usize) -> Self {
        PauliTransferMatrix { n_qubits, matrix: RMatrix::identity(4usize.pow(n_qubits as u32)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn compose(&self, inner: &PauliTransferMatrix) -> PauliTransferMatrix {
        assert_eq!(self.n_qubits, inner.n_qubits);
        PauliTransferMatrix { n_qubits: self.n_qubits, matrix: self.matrix.mul(&inner.matrix) }
    }

    pub fn kron(&self, other: &PauliTransferMatrix) -> PauliTransferMatrix {
        PauliTransferMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    pub fn apply(&self, state: &PtmStateVector) -> PtmStateVector {
        assert_eq!(self.n_qubits, state.n_qubits);
        PtmStateVector { n_qubits: state.n_qubits, components: self.matrix.matvec(&state.components) }
    }

    pub fn inverse(&self) -> Result<PauliTransferMatrix> {
        Ok(PauliTransferMatrix { n_qubits: self.n_qubits, matrix: self.matrix.inverse()? })
    }

    /// Trace preservation holds when the first row is `(1, 0, ..., 0)`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut err: f64 = (self.matrix[(0, 0)] - 1.0).abs();
        for j in 1..self.dim() {
            err = err.max(self.matrix[(0, j)].abs());
        }
        err
    }

    /// Embed a single-qubit PTM acting on `qubit` into `n` qubits.
    pub fn embed_single(&self, qubit: usize, n_qubits: usize) -> PauliTransferMatrix {
        assert_eq!(self.n_qubits, 1);
        let mut out = PauliTransferMatrix::identity(0);
        for q in 0..n_qubits {
            if q == qubit {
                out = out.kron(self);
            } else {
                out = out.kron(&PauliTransferMatrix::identity(1));
            }
        }
        out
    }
}

/// A state as its Pauli component column vector; `components[0]` is the
/// trace and stays 1 under trace-preserving evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtmStateVector {
    pub n_qubits: usize,
    pub components: Vec<f64>,
}

impl PtmStateVector {
    pub fn trace(&self) -> f64 {
        self.components[0]
    }
}

/// A measurement effect as a Pauli component row vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtmMeasurement {
    pub n_qubits: usize,
    pub components: Vec<f64>,
}

impl PtmMeasurement {
    /// The Pauli observable `index` as a measurement row.
    pub fn pauli_observable(index: usize, n_qubits: usize) -> Self {
        let mut components = vec![0.0; 4usize.pow(n_qubits as u32)];
        components[index] = 1.0;
        PtmMeasurement { n_qubits, components }
    }

    pub fn expectation(&self, state: &PtmStateVector) -> f64 {
        assert_eq!(self.n_qubits, state.n_qubits);
        self.components.iter().zip(&state.components).map(|(m, r)| m * r).sum()
    }
}

/// PTM of a unitary conjugation `rho -> U rho U^dagger`.
pub fn ptm_of_unitary(u: &UnitaryMatrix) -> PauliTransferMatrix {
    ptm_of_unitary_matrix(u.matrix())
}

pub fn ptm_of_unitary_matrix(u: &CMatrix) -> PauliTransferMatrix {
    let dim = u.rows;
    assert!(dim.is_power_of_two());
    let n_qubits = dim.trailing_zeros() as usize;
    let size = 4usize.pow(n_qubits as u32);
    let udag = u.dagger();
    let mut matrix = RMatrix::zeros(size, size);
    for tau in 0..size {
        let conj = u.mul(&pauli_string_matrix(tau, n_qubits)).mul(&udag);
        fill_ptm_column(&mut matrix, tau, &conj, n_qubits);
    }
    PauliTransferMatrix { n_qubits, matrix }
}

/// PTM of the completely positive map `rho -> sum_k E_k rho E_k^dagger`.
/// Fails unless the Kraus family is trace preserving.
pub fn ptm_of_kraus(kraus: &[CMatrix]) -> Result<PauliTransferMatrix> {
    if kraus.is_empty() {
        return Err(Error::EmptyInput("empty Kraus family".into()));
    }
    let dim = kraus[0].rows;
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch("Kraus operators must act on qubits".into()));
    }
    let n_qubits = dim.trailing_zeros() as usize;
    let mut completeness = CMatrix::zeros(dim, dim);
    for e in kraus {
        completeness = completeness.add(&e.dagger().mul(e));
    }
    let deviation = completeness.max_abs_diff(&CMatrix::identity(dim));
    if deviation > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "Kraus completeness violated by {deviation:.3e}"
        )));
    }
    let size = 4usize.pow(n_qubits as u32);
    let mut matrix = RMatrix::zeros(size, size);
    for tau in 0..size {
        let p = pauli_string_matrix(tau, n_qubits);
        let mut image = CMatrix::zeros(dim, dim);
        for e in kraus {
            image = image.add(&e.mul(&p).mul(&e.dagger()));
        }
        fill_ptm_column(&mut matrix, tau, &image, n_qubits);
    }
    Ok(PauliTransferMatrix { n_qubits, matrix })
}

fn fill_ptm_column(matrix: &mut RMatrix, tau: usize, image: &CMatrix, n_qubits: usize) {
    let size = 4usize.pow(n_qubits as u32);
    let dim = 1usize << n_qubits;
    for sigma in 0..size {
        let p = pauli_string_matrix(sigma, n_qubits);
        let value = p.mul(image).trace() / dim as f64;
        debug_assert!(value.im.abs() < 1e-9, "PTM entries must be real");
        matrix[(sigma, tau)] = value.re;
    }
}

/// Labels of the four linearly independent preparation states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepLabel {
    Zero,
    One,
    Plus,
    YPlus,
}

impl PrepLabel {
    pub const ALL: [PrepLabel; 4] = [PrepLabel::Zero, PrepLabel::One, PrepLabel::Plus, PrepLabel::YPlus];

    /// Single-qubit PTM vector; these are exactly the columns of the
    /// tomography frame matrix `T`.
    pub fn single_qubit_vector(self) -> [f64; 4] {
        match self {
            PrepLabel::Zero => [1.0, 0.0, 0.0, 1.0],
            PrepLabel::One => [1.0, 0.0, 0.0, -1.0],
            PrepLabel::Plus => [1.0, 1.0, 0.0, 0.0],
            PrepLabel::YPlus => [1.0, 0.0, 1.0, 0.0],
        }
    }
}

/// Tensor-product preparation state for a list of per-qubit labels.
pub fn prep_state_ptm(labels: &[PrepLabel]) -> PtmStateVector {
    let mut components = vec![1.0];
    for label in labels {
        let single = label.single_qubit_vector();
        let mut next = Vec::with_capacity(components.len() * 4);
        for c in &components {
            for s in &single {
                next.push(c * s);
            }
        }
        components = next;
    }
    PtmStateVector { n_qubits: labels.len(), components }
}

/// The invertible frame matrix `T` whose columns are the four preparation
/// states in Pauli components.
pub fn frame_matrix() -> RMatrix {
    let mut t = RMatrix::zeros(4, 4);
    for (k, label) in PrepLabel::ALL.iter().enumerate() {
        let v = label.single_qubit_vector();
        for i in 0..4 {
            t[(i, k)] = v[i];
        }
    }
    t
}

/// `T^{(x) n}` for an `n`-qubit register.
pub fn frame_matrix_n(n_qubits: usize) -> RMatrix {
    let t = frame_matrix();
    let mut out = RMatrix::identity(1);
    for _ in 0..n_qubits {
        out = out.kron(&t);
    }
    out
}

// ---------------------------------------------------------------------------
// Noise model
// ---------------------------------------------------------------------------

/// Parametric noise attached after each ideal operation, by gate class.
///
/// Single-qubit gates suffer depolarizing (`q_dep`), amplitude damping
/// (`gamma_ad`), and dephasing (`q_z`) on their qubit; multi-qubit gates
/// suffer the damping and dephasing per qubit plus joint depolarizing
/// (`q_dep2`). State preparations flip with probability `eps_prep` and
/// measured bits flip with probability `eps_meas`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub q_dep: f64,
    pub q_dep2: f64,
    pub gamma_ad: f64,
    pub q_z: f64,
    pub eps_meas: f64,
    pub eps_prep: f64,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel { q_dep: 0.0, q_dep2: 0.0, gamma_ad: 0.0, q_z: 0.0, eps_meas: 0.0, eps_prep: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("noise.q_dep", self.q_dep),
            ("noise.q_dep2", self.q_dep2),
            ("noise.gamma_ad", self.gamma_ad),
            ("noise.q_z", self.q_z),
            ("noise.eps_meas", self.eps_meas),
            ("noise.eps_prep", self.eps_prep),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.q_dep == 0.0
            && self.q_dep2 == 0.0
            && self.gamma_ad == 0.0
            && self.q_z == 0.0
            && self.eps_meas == 0.0
            && self.eps_prep == 0.0
    }

    /// Noise PTM applied after a single-qubit gate on `qubit`.
    pub fn single_qubit_channel(&self, qubit: usize, n_qubits: usize) -> PauliTransferMatrix {
        let local = dephasing_ptm(self.q_z)
            .compose(&amplitude_damping_ptm(self.gamma_ad))
            .compose(&depolarizing_ptm(self.q_dep, 1));
        local.embed_single(qubit, n_qubits)
    }

    /// Noise PTM applied after a gate touching `qubits` (two or more):
    /// per-qubit damping and dephasing, then joint depolarizing.
    pub fn multi_qubit_channel(&self, qubits: &[usize], n_qubits: usize) -> PauliTransferMatrix {
        let mut out = PauliTransferMatrix::identity(n_qubits);
        for &q in qubits {
            let local = dephasing_ptm(self.q_z).compose(&amplitude_damping_ptm(self.gamma_ad));
            out = local.embed_single(q, n_qubits).compose(&out);
        }
        depolarizing_on_subset(self.q_dep2, qubits, n_qubits).compose(&out)
    }

    /// Noise PTM for a whole-register operation (the model unitary or a
    /// basis operation spanning every qubit).
    pub fn register_channel(&self, n_qubits: usize) -> PauliTransferMatrix {
        if n_qubits == 1 {
            self.single_qubit_channel(0, 1)
        } else {
            let all: Vec<usize> = (0..n_qubits).collect();
            self.multi_qubit_channel(&all, n_qubits)
        }
    }

    /// Preparation bit-flip channel applied to ideal prep states.
    pub fn prep_channel(&self, n_qubits: usize) -> PauliTransferMatrix {
        let mut out = PauliTransferMatrix::identity(0);
        for _ in 0..n_qubits {
            out = out.kron(&bitflip_ptm(self.eps_prep));
        }
        out
    }
}

/// Depolarizing channel on `n` qubits: every non-identity component scales
/// by `1 - q`.
pub fn depolarizing_ptm(q: f64, n_qubits: usize) -> PauliTransferMatrix {
    let size = 4usize.pow(n_qubits as u32);
    let mut m = RMatrix::identity(size);
    for i in 1..size {
        m[(i, i)] = 1.0 - q;
    }
    PauliTransferMatrix { n_qubits, matrix: m }
}

/// Depolarizing acting jointly on a subset of qubits.
pub fn depolarizing_on_subset(q: f64, qubits: &[usize], n_qubits: usize) -> PauliTransferMatrix {
    let size = 4usize.pow(n_qubits as u32);
    let mut m = RMatrix::identity(size);
    for idx in 0..size {
        let touches = qubits
            .iter()
            .any(|&qb| (idx >> (2 * (n_qubits - 1 - qb))) & 3 != 0);
        if touches {
            m[(idx, idx)] = 1.0 - q;
        }
    }
    PauliTransferMatrix { n_qubits, matrix: m }
}

/// Amplitude damping toward |0>: Kraus pair `[[1,0],[0,sqrt(1-g)]]`,
/// `[[0,sqrt(g)],[0,0]]`.
pub fn amplitude_damping_ptm(gamma: f64) -> PauliTransferMatrix {
    let mut m = RMatrix::identity(4);
    let root = (1.0 - gamma).sqrt();
    m[(1, 1)] = root;
    m[(2, 2)] = root;
    m[(3, 3)] = 1.0 - gamma;
    m[(3, 0)] = gamma;
    PauliTransferMatrix { n_qubits: 1, matrix: m }
}

/// Phase flip with probability `q`: X and Y components scale by `1 - 2q`.
pub fn dephasing_ptm(q: f64) -> PauliTransferMatrix {
    let mut m = RMatrix::identity(4);
    m[(1, 1)] = 1.0 - 2.0 * q;
    m[(2, 2)] = 1.0 - 2.0 * q;
    PauliTransferMatrix { n_qubits: 1, matrix: m }
}

/// Bit flip with probability `q`: Y and Z components scale by `1 - 2q`.
pub fn bitflip_ptm(q: f64) -> PauliTransferMatrix {
    let mut m = RMatrix::identity(4);
    m[(2, 2)] = 1.0 - 2.0 * q;
    m[(3, 3)] = 1.0 - 2.0 * q;
    PauliTransferMatrix { n_qubits: 1, matrix: m }
}

// ---------------------------------------------------------------------------
// Noisy circuit simulation
// ---------------------------------------------------------------------------

/// Apply one circuit gate followed by its class noise.
pub fn apply_noisy_gate(
    state: &PtmStateVector,
    gate: &Gate,
    n_qubits: usize,
    noise: &NoiseModel,
) -> Result<PtmStateVector> {
    if state.n_qubits != n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "state has {} qubits, circuit {n_qubits}",
            state.n_qubits
        )));
    }
    let exact = ptm_of_unitary_matrix(&gate.matrix(n_qubits));
    let touched = gate.qubits();
    let noisy = if noise.is_ideal() {
        exact
    } else if touched.len() == 1 {
        noise.single_qubit_channel(touched[0], n_qubits).compose(&exact)
    } else {
        noise.multi_qubit_channel(&touched, n_qubits).compose(&exact)
    };
    Ok(noisy.apply(state))
}

/// Z-basis outcome distribution over `measured` qubits (most significant
/// first in the outcome index), with readout flips applied, clamped and
/// renormalized when the violation is within tolerance.
pub fn measure_distribution(
    state: &PtmStateVector,
    measured: &[usize],
    noise: &NoiseModel,
) -> Result<Vec<f64>> {
    let k = measured.len();
    let mut probs = Vec::with_capacity(1 << k);
    for outcome in 0..(1usize << k) {
        let row = projector_row(outcome, measured, state.n_qubits);
        let p: f64 = row.iter().zip(&state.components).map(|(m, r)| m * r).sum();
        probs.push(p);
    }
    // Readout flips convolve the distribution per measured qubit.
    if noise.eps_meas > 0.0 {
        probs = convolve_bitflips(&probs, k, noise.eps_meas);
    }
    validate_distribution(&mut probs)?;
    Ok(probs)
}

/// Measurement row of the projector onto `outcome` over the measured
/// qubits: the Kronecker product of `(I +/- Z)/2` factors and identity
/// rows elsewhere.
fn projector_row(outcome: usize, measured: &[usize], n_qubits: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for q in 0..n_qubits {
        let factor: [f64; 4] = match measured.iter().position(|&m| m == q) {
            Some(pos) => {
                let bit = (outcome >> (measured.len() - 1 - pos)) & 1;
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                [0.5, 0.0, 0.0, 0.5 * sign]
            }
            None => [1.0, 0.0, 0.0, 0.0],
        };
        let mut next = Vec::with_capacity(row.len() * 4);
        for r in &row {
            for f in &factor {
                next.push(r * f);
            }
        }
        row = next;
    }
    row
}

fn convolve_bitflips(probs: &[f64], k: usize, eps: f64) -> Vec<f64> {
    let mut out = vec![0.0; probs.len()];
    for (b, &p) in probs.iter().enumerate() {
        for rec in 0..probs.len() {
            let flips = (b ^ rec).count_ones() as i32;
            let keep = (k as i32) - flips;
            out[rec] += p * eps.powi(flips) * (1.0 - eps).powi(keep);
        }
    }
    out
}

fn validate_distribution(probs: &mut [f64]) -> Result<()> {
    let mut violation = 0.0f64;
    for p in probs.iter() {
        if *p < 0.0 {
            violation = violation.max(-p);
        }
        if *p > 1.0 {
            violation = violation.max(p - 1.0);
        }
    }
    let sum: f64 = probs.iter().sum();
    violation = violation.max((sum - 1.0).abs());
    if violation > 1e-9 {
        return Err(Error::UnphysicalState { violation });
    }
    for p in probs.iter_mut() {
        *p = p.clamp(0.0, 1.0);
    }
    let sum: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= sum;
    }
    Ok(())
}

/// Inverse-CDF draw from a distribution; deterministic given the stream.
pub fn sample_outcome(probs: &[f64], rng: &mut impl Rng) -> Result<usize> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidDistribution(format!("outcome weights sum to {sum}")));
    }
    let draw: f64 = rng.gen::<f64>() * sum;
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return Ok(i);
        }
    }
    Ok(probs.len() - 1)
}

/// Project `qubit` onto Z-outcome `bit` and renormalize; returns the
/// outcome probability. The projection acts on the PTM components as
/// `rho -> P rho P`.
pub fn project_qubit(state: &mut PtmStateVector, qubit: usize, bit: u8) -> f64 {
    let n = state.n_qubits;
    let size = state.components.len();
    let shift = 2 * (n - 1 - qubit);
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    let mut next = vec![0.0; size];
    for idx in 0..size {
        let digit = (idx >> shift) & 3;
        if digit == 1 || digit == 2 {
            continue; // X and Y components vanish under Z projection
        }
        let partner = if digit == 0 { idx | (3 << shift) } else { idx & !(3usize << shift) };
        next[idx] = 0.5 * (state.components[idx] + sign * state.components[partner]);
    }
    let prob = next[0];
    if prob > 1e-300 {
        for x in next.iter_mut() {
            *x /= prob;
        }
    }
    state.components = next;
    prob
}

/// Trace out `qubit` and re-prepare it in the given single-qubit state.
pub fn reset_qubit(state: &mut PtmStateVector, qubit: usize, fresh: &[f64; 4]) {
    let n = state.n_qubits;
    let size = state.components.len();
    let shift = 2 * (n - 1 - qubit);
    let mut next = vec![0.0; size];
    for idx in 0..size {
        let digit = (idx >> shift) & 3;
        let base = idx & !(3usize << shift);
        // tr_q selects the identity component of the traced qubit; the
        // fresh qubit contributes its own components multiplicatively.
        next[idx] = state.components[base] * fresh[digit];
    }
    state.components = next;
}

/// Measure `qubit` in the Pauli `observable` basis (1 = X, 2 = Y, 3 = Z):
/// rotate the basis onto Z, project, rotate back. Returns the +1-eigenvalue
/// probability without readout noise. `state` collapses accordingly.
pub fn measure_pauli_qubit(
    state: &mut PtmStateVector,
    qubit: usize,
    observable: usize,
    rng: &mut impl Rng,
) -> Result<u8> {
    assert!((1..=3).contains(&observable));
    let n = state.n_qubits;
    let rot = basis_rotation_to_z(observable);
    if let Some(ref r) = rot {
        *state = r.embed_single(qubit, n).apply(state);
    }
    let mut probe = state.clone();
    let p0 = project_qubit(&mut probe, qubit, 0).clamp(0.0, 1.0);
    let outcome = if rng.gen::<f64>() < p0 { 0u8 } else { 1u8 };
    project_qubit(state, qubit, outcome);
    if let Some(ref r) = rot {
        let back = PauliTransferMatrix { n_qubits: 1, matrix: r.matrix.transpose() };
        *state = back.embed_single(qubit, n).apply(state);
    }
    Ok(outcome)
}

/// Single-qubit PTM rotating the given Pauli axis onto Z (orthogonal, so
/// the transpose rotates back).
fn basis_rotation_to_z(observable: usize) -> Option<PauliTransferMatrix> {
    match observable {
        3 => None,
        // Hadamard swaps X and Z, negates Y.
        1 => {
            let mut m = RMatrix::zeros(4, 4);
            m[(0, 0)] = 1.0;
            m[(1, 3)] = 1.0;
            m[(2, 2)] = -1.0;
            m[(3, 1)] = 1.0;
            Some(PauliTransferMatrix { n_qubits: 1, matrix: m })
        }
        // H S^dagger conjugation cycles X -> Y -> Z -> X.
        2 => {
            let mut m = RMatrix::zeros(4, 4);
            m[(0, 0)] = 1.0;
            m[(2, 1)] = 1.0;
            m[(3, 2)] = 1.0;
            m[(1, 3)] = 1.0;
            Some(PauliTransferMatrix { n_qubits: 1, matrix: m })
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unitary_ptm_of(m: &CMatrix) -> PauliTransferMatrix {
        ptm_of_unitary(&UnitaryMatrix::new(m.clone()).unwrap())
    }

    #[test]
    fn ptm_of_identity_and_x() {
        let id = unitary_ptm_of(&CMatrix::identity(2));
        assert!(id.matrix.max_abs_diff(&RMatrix::identity(4)) < 1e-14);

        let x = unitary_ptm_of(&pauli_matrix(1));
        let expect = RMatrix::from_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
        ]);
        assert!(x.matrix.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn ptm_of_hadamard_swaps_x_and_z() {
        let h = CMatrix::from_real_rows(&[
            &[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
            &[std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
        ]);
        let ptm = unitary_ptm_of(&h);
        let expect = RMatrix::from_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(ptm.matrix.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn ptm_multiplicativity_on_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let u = random_unitary(4, &mut rng);
            let v = random_unitary(4, &mut rng);
            let uv = unitary_ptm_of(&u.mul(&v));
            let product = unitary_ptm_of(&u).compose(&unitary_ptm_of(&v));
            assert!(uv.matrix.max_abs_diff(&product.matrix) < 1e-9);
        }
    }

    #[test]
    fn kraus_depolarizing_matches_closed_form() {
        let q: f64 = 0.1;
        let kraus = vec![
            CMatrix::identity(2).scaled(C64::new((1.0 - 3.0 * q / 4.0).sqrt(), 0.0)),
            pauli_matrix(1).scaled(C64::new((q / 4.0).sqrt(), 0.0)),
            pauli_matrix(2).scaled(C64::new((q / 4.0).sqrt(), 0.0)),
            pauli_matrix(3).scaled(C64::new((q / 4.0).sqrt(), 0.0)),
        ];
        let ptm = ptm_of_kraus(&kraus).unwrap();
        assert!(ptm.matrix.max_abs_diff(&depolarizing_ptm(q, 1).matrix) < 1e-12);
    }

    #[test]
    fn kraus_amplitude_damping_matches_closed_form() {
        let g: f64 = 0.05;
        let mut e0 = CMatrix::identity(2);
        e0[(1, 1)] = C64::new((1.0 - g).sqrt(), 0.0);
        let mut e1 = CMatrix::zeros(2, 2);
        e1[(0, 1)] = C64::new(g.sqrt(), 0.0);
        let ptm = ptm_of_kraus(&[e0, e1]).unwrap();
        let closed = amplitude_damping_ptm(g);
        assert!(ptm.matrix.max_abs_diff(&closed.matrix) < 1e-12);
        assert!((ptm.matrix[(3, 0)] - g).abs() < 1e-12);
    }

    #[test]
    fn kraus_zero_noise_is_identity() {
        let ptm = ptm_of_kraus(&[CMatrix::identity(2)]).unwrap();
        assert!(ptm.matrix.max_abs_diff(&RMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn kraus_completeness_checked() {
        let bad = vec![CMatrix::identity(2).scaled(C64::new(0.9, 0.0))];
        assert!(ptm_of_kraus(&bad).is_err());
    }

    #[test]
    fn prep_states_are_frame_columns() {
        let t = frame_matrix();
        for (k, label) in PrepLabel::ALL.iter().enumerate() {
            let v = prep_state_ptm(&[*label]);
            for i in 0..4 {
                assert_eq!(v.components[i], t[(i, k)]);
            }
        }
        // Two-qubit |0>|+> is the Kronecker product of the columns.
        let v = prep_state_ptm(&[PrepLabel::Zero, PrepLabel::Plus]);
        let a = prep_state_ptm(&[PrepLabel::Zero]);
        let b = prep_state_ptm(&[PrepLabel::Plus]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(v.components[4 * i + j], a.components[i] * b.components[j]);
            }
        }
    }

    #[test]
    fn measure_basic_states() {
        let zero = prep_state_ptm(&[PrepLabel::Zero]);
        let probs = measure_distribution(&zero, &[0], &NoiseModel::ideal()).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-12);

        let plus = prep_state_ptm(&[PrepLabel::Plus]);
        let probs = measure_distribution(&plus, &[0], &NoiseModel::ideal()).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_flip_noise() {
        let zero = prep_state_ptm(&[PrepLabel::Zero]);
        let mut noise = NoiseModel::ideal();
        noise.eps_meas = 0.03;
        let probs = measure_distribution(&zero, &[0], &noise).unwrap();
        assert!((probs[1] - 0.03).abs() < 1e-12);
    }

    #[test]
    fn noisy_gate_depolarizes_bloch_vector() {
        let plus = prep_state_ptm(&[PrepLabel::Plus]);
        let mut noise = NoiseModel::ideal();
        noise.q_dep = 0.1;
        // Identity gate, depolarizing noise: X component scales by 0.9.
        let gate = Gate::SingleZyz { qubit: 0, gamma: 0.0, phi: 0.0, theta: 0.0, lambda: 0.0 };
        let out = apply_noisy_gate(&plus, &gate, 1, &noise).unwrap();
        assert!((out.components[1] - 0.9).abs() < 1e-12);
        assert!((out.components[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_gate_with_depolarizing_flips_and_shrinks() {
        let zero = prep_state_ptm(&[PrepLabel::Zero]);
        let mut noise = NoiseModel::ideal();
        noise.q_dep = 0.02;
        let out = apply_noisy_gate(&zero, &Gate::Not { qubit: 0 }, 1, &noise).unwrap();
        let probs = measure_distribution(&out, &[0], &NoiseModel::ideal()).unwrap();
        // <Z> = -0.98 -> P(1) = 0.99.
        assert!((out.components[3] + 0.98).abs() < 1e-12);
        assert!((probs[1] - 0.99).abs() < 1e-12);
    }

    #[test]
    fn trace_preserved_under_noisy_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = NoiseModel {
            q_dep: 0.05,
            q_dep2: 0.1,
            gamma_ad: 0.07,
            q_z: 0.03,
            eps_meas: 0.0,
            eps_prep: 0.0,
        };
        let mut state = prep_state_ptm(&[PrepLabel::Plus, PrepLabel::Zero]);
        for k in 0..6 {
            let gate = if k % 2 == 0 {
                Gate::SingleZyz {
                    qubit: k % 2,
                    gamma: 0.0,
                    phi: rng.gen::<f64>(),
                    theta: rng.gen::<f64>(),
                    lambda: rng.gen::<f64>(),
                }
            } else {
                Gate::MultiplexedRy {
                    target: 0,
                    controls: vec![1],
                    angles: vec![rng.gen::<f64>(), rng.gen::<f64>()],
                }
            };
            state = apply_noisy_gate(&state, &gate, 2, &noise).unwrap();
            assert!((state.trace() - 1.0).abs() < 1e-10);
        }
        let probs = measure_distribution(&state, &[0, 1], &NoiseModel::ideal()).unwrap();
        assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn noise_channels_are_trace_preserving() {
        let noise = NoiseModel {
            q_dep: 0.3,
            q_dep2: 0.4,
            gamma_ad: 0.2,
            q_z: 0.1,
            eps_meas: 0.1,
            eps_prep: 0.2,
        };
        for ptm in [
            noise.single_qubit_channel(0, 2),
            noise.multi_qubit_channel(&[0, 1], 2),
            noise.register_channel(2),
            noise.prep_channel(2),
        ] {
            assert!(ptm.trace_preservation_error() < 1e-12);
            assert!(ptm.matrix.max_abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sample_outcome_deterministic_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(sample_outcome(&[1.0, 0.0], &mut rng).unwrap(), 0);
        let mut rng1 = ChaCha8Rng::seed_from_u64(77);
        let mut rng2 = ChaCha8Rng::seed_from_u64(77);
        let a: Vec<usize> =
            (0..100).map(|_| sample_outcome(&[0.3, 0.7], &mut rng1).unwrap()).collect();
        let b: Vec<usize> =
            (0..100).map(|_| sample_outcome(&[0.3, 0.7], &mut rng2).unwrap()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_outcome_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 100_000;
        let mut ones = 0usize;
        for _ in 0..n {
            ones += sample_outcome(&[0.5, 0.5], &mut rng).unwrap();
        }
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.005, "freq {freq}");
    }

    #[test]
    fn sample_outcome_rejects_bad_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(sample_outcome(&[0.7, 0.7], &mut rng).is_err());
    }

    #[test]
    fn projection_and_reset() {
        // Measure the ancilla of a correlated two-qubit state.
        let mut state = prep_state_ptm(&[PrepLabel::Plus, PrepLabel::Zero]);
        let p0 = project_qubit(&mut state, 1, 0);
        assert!((p0 - 1.0).abs() < 1e-12);
        assert!((state.trace() - 1.0).abs() < 1e-12);

        // Reset replaces the qubit state regardless of history.
        let mut state = prep_state_ptm(&[PrepLabel::Zero, PrepLabel::One]);
        reset_qubit(&mut state, 1, &PrepLabel::Zero.single_qubit_vector());
        let probs = measure_distribution(&state, &[1], &NoiseModel::ideal()).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_basis_measurement_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // |+> measured in X always gives +1.
        for _ in 0..20 {
            let mut state = prep_state_ptm(&[PrepLabel::Plus]);
            let outcome = measure_pauli_qubit(&mut state, 0, 1, &mut rng).unwrap();
            assert_eq!(outcome, 0);
            assert!((state.components[1] - 1.0).abs() < 1e-12);
        }
        // |y+> measured in Y always gives +1, and the collapse restores
        // the Y component.
        for _ in 0..20 {
            let mut state = prep_state_ptm(&[PrepLabel::YPlus]);
            let outcome = measure_pauli_qubit(&mut state, 0, 2, &mut rng).unwrap();
            assert_eq!(outcome, 0);
            assert!((state.components[2] - 1.0).abs() < 1e-12);
        }
        // |0> measured in X or Y is uniform.
        for obs in [1usize, 2] {
            let mut zeros = 0;
            for _ in 0..2000 {
                let mut state = prep_state_ptm(&[PrepLabel::Zero]);
                if measure_pauli_qubit(&mut state, 0, obs, &mut rng).unwrap() == 0 {
                    zeros += 1;
                }
            }
            assert!((zeros as f64 / 2000.0 - 0.5).abs() < 0.05, "observable {obs}");
        }
        // Rotations are orthogonal: rotating back is the transpose.
        for obs in [1usize, 2] {
            let r = basis_rotation_to_z(obs).unwrap();
            let back = PauliTransferMatrix { n_qubits: 1, matrix: r.matrix.transpose() };
            assert!(back
                .compose(&r)
                .matrix
                .max_abs_diff(&RMatrix::identity(4))
                < 1e-14);
        }
    }

    #[test]
    fn frame_matrix_matches_reference() {
        let t = frame_matrix();
        let expect = RMatrix::from_rows(&[
            &[1.0, 1.0, 1.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[1.0, -1.0, 0.0, 0.0],
        ]);
        assert!(t.max_abs_diff(&expect) == 0.0);
    }
}
