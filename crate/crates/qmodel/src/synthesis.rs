//! Model-unitary construction and gate synthesis.
//!
//! `build_unitary` turns a merged memory-state set into the unitary that
//! steps the model: acting on a memory register and a blank ancilla, it
//! writes `sqrt(P(x|state))` amplitude on each emitted symbol while moving
//! the memory to the successor state. The state overlaps pin the unique
//! columns through an inverse Gram-Schmidt basis; the free columns are
//! completed with seeded random vectors and orthonormalized.
//!
//! `csd_decompose` lowers any 2^n x 2^n unitary to multiplexed Y/Z
//! rotations, NOTs, controlled phases, and single-qubit ZYZ rotations by
//! recursive cosine-sine decomposition. `reconstruct` multiplies a circuit
//! back into a matrix and is the verification inverse.
//!
//! Qubit 0 is the most significant bit of a basis index throughout; the
//! ancilla is the least significant subsystem.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::MemoryStateSet;
use crate::linalg::{CMatrix, RMatrix, C64};

const UNITARITY_TOL: f64 = 1e-9;

/// A dense unitary, checked to `1e-9` at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        let deviation = matrix.unitarity_error();
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Number of qubits; fails when the dimension is not a power of two.
    pub fn num_qubits(&self) -> Result<usize> {
        let dim = self.dim();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        Ok(dim.trailing_zeros() as usize)
    }
}

/// Lower-triangular coefficients expressing the orthonormal basis vectors
/// `e_i` as combinations of the memory states.
#[derive(Clone, Debug)]
pub struct GramSchmidtBasis {
    /// `coefficients[(i, k)]` multiplies state `k` in the expansion of `e_i`.
    pub coefficients: RMatrix,
}

/// The constructed model step operator together with the basis data needed
/// to express memory states on the circuit register.
#[derive(Clone, Debug)]
pub struct ModelUnitary {
    pub unitary: UnitaryMatrix,
    pub basis: GramSchmidtBasis,
    /// Row `k` holds memory state `k` in the `e`-basis (lower triangular).
    pub state_coords: RMatrix,
    /// Padded memory register dimension (power of two).
    pub memory_dim: usize,
    pub alphabet_size: u8,
}

impl ModelUnitary {
    /// Memory state `k` as a circuit-register vector of length `memory_dim`.
    pub fn memory_state(&self, k: usize) -> Vec<C64> {
        let m = self.state_coords.rows;
        let mut v = vec![C64::new(0.0, 0.0); self.memory_dim];
        for i in 0..m {
            v[i] = C64::new(self.state_coords[(k, i)], 0.0);
        }
        v
    }

    /// Exact joint distribution of the next `t` emitted symbols starting
    /// from the given memory vector, enumerated over outcome branches.
    pub fn joint_distribution(&self, memory: &[C64], t: usize) -> Result<Vec<f64>> {
        let a = self.alphabet_size as usize;
        let mut probs = vec![0.0; a.pow(t as u32)];
        self.branch_probabilities(memory, t, 1.0, 0, &mut probs)?;
        Ok(probs)
    }

    fn branch_probabilities(
        &self,
        memory: &[C64],
        remaining: usize,
        prob: f64,
        base: usize,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        if remaining == 0 {
            out[base] += prob;
            return Ok(());
        }
        if prob == 0.0 {
            return Ok(());
        }
        let a = self.alphabet_size as usize;
        let joint = apply_model_step(&self.unitary, memory)?;
        let stride = a.pow((remaining - 1) as u32);
        for x in 0..a {
            // Unnormalized memory branch for outcome x.
            let mut next: Vec<C64> = (0..self.memory_dim).map(|i| joint[i * a + x]).collect();
            let px: f64 = next.iter().map(|c| c.norm_sqr()).sum();
            if px <= 1e-300 {
                continue;
            }
            let scale = px.sqrt();
            for c in next.iter_mut() {
                *c /= scale;
            }
            self.branch_probabilities(&next, remaining - 1, prob * px, base + x * stride, out)?;
        }
        Ok(())
    }
}

/// Construct the model unitary for a merged state set. Fixed columns (blank
/// ancilla) come from the overlap structure; the rest are seeded random
/// vectors orthonormalized against them.
pub fn build_unitary(set: &MemoryStateSet, seed: u64) -> Result<ModelUnitary> {
    let m = set.n_states();
    if m == 0 {
        return Err(Error::EmptyInput("state set is empty".into()));
    }
    let a = set.alphabet_size as usize;
    let gram = set.gram();
    // Memory states in the orthonormal e-basis: rows of the Cholesky factor.
    let coords = gram.cholesky(1e-10)?;
    let gamma = lower_triangular_inverse(&coords)?;

    let m_pad = m.next_power_of_two();
    let dim = m_pad * a;
    // Image of each memory state under one model step, in the e-basis.
    let mut images = Vec::with_capacity(m);
    for state in 0..m {
        let mut img = vec![0.0; dim];
        for x in 0..a {
            let px = set.emission_probability(state, x as u8);
            if px <= 0.0 {
                continue;
            }
            let next = set.successor[state][x].ok_or_else(|| {
                Error::InsufficientData(format!(
                    "state {state} emits {x} with probability {px:.3e} but has no successor"
                ))
            })?;
            let amp = px.sqrt();
            for i in 0..m {
                // <e_i | successor state> is the successor's i-th coordinate.
                img[i * a + x] += amp * coords[(next, i)];
            }
        }
        images.push(img);
    }
    // Fixed column for basis vector e_{i'}: expand e_{i'} over the states
    // with the inverse Gram-Schmidt coefficients and combine their images.
    let mut fixed = Vec::with_capacity(m);
    for basis_idx in 0..m {
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for state in 0..=basis_idx {
            let coeff = gamma[(basis_idx, state)];
            if coeff == 0.0 {
                continue;
            }
            for (slot, &value) in images[state].iter().enumerate() {
                col[slot] += C64::new(coeff * value, 0.0);
            }
        }
        fixed.push(col);
    }

    // Columns ordered fixed-first for Gram-Schmidt, then scattered back to
    // their circuit positions: state i' sits at column i' * a (ancilla 0).
    let mut work = CMatrix::zeros(dim, dim);
    for (j, col) in fixed.iter().enumerate() {
        work.set_column(j, col);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in m..dim {
        let col: Vec<C64> = (0..dim)
            .map(|_| C64::new(crate::linalg::standard_normal(&mut rng), 0.0))
            .collect();
        work.set_column(j, &col);
    }
    work.orthonormalize_columns_from(0).map_err(|_| {
        Error::RankDeficientGram("random completion failed to span the free columns".into())
    })?;

    let mut u = CMatrix::zeros(dim, dim);
    let mut free_slot = m;
    let mut taken = vec![false; dim];
    for state in 0..m {
        u.set_column(state * a, &work.column(state));
        taken[state * a] = true;
    }
    for j in 0..dim {
        if !taken[j] {
            u.set_column(j, &work.column(free_slot));
            free_slot += 1;
        }
    }

    Ok(ModelUnitary {
        unitary: UnitaryMatrix::new(u)?,
        basis: GramSchmidtBasis { coefficients: gamma },
        state_coords: coords,
        memory_dim: m_pad,
        alphabet_size: set.alphabet_size,
    })
}

fn lower_triangular_inverse(l: &RMatrix) -> Result<RMatrix> {
    let n = l.rows;
    let mut inv = RMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut acc = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                acc -= l[(i, k)] * inv[(k, col)];
            }
            if l[(i, i)].abs() < 1e-300 {
                return Err(Error::SingularMatrix("triangular inverse pivot vanished".into()));
            }
            inv[(i, col)] = acc / l[(i, i)];
        }
    }
    Ok(inv)
}

/// One model step: `U (memory (x) |0>)`. The ancilla is the least
/// significant subsystem, so the marginal over position `i*a + x` gives the
/// emission distribution.
pub fn apply_model_step(u: &UnitaryMatrix, memory: &[C64]) -> Result<Vec<C64>> {
    let dim = u.dim();
    if !dim.is_multiple_of(memory.len()) || dim / memory.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "memory dimension {} incompatible with unitary dimension {dim}",
            memory.len()
        )));
    }
    let a = dim / memory.len();
    let mut joint = vec![C64::new(0.0, 0.0); dim];
    for (i, amp) in memory.iter().enumerate() {
        joint[i * a] = *amp;
    }
    Ok(u.matrix().matvec(&joint))
}

/// Marginal distribution of the ancilla subsystem of a joint vector.
pub fn ancilla_distribution(joint: &[C64], alphabet_size: usize) -> Vec<f64> {
    let mut probs = vec![0.0; alphabet_size];
    for (i, amp) in joint.iter().enumerate() {
        probs[i % alphabet_size] += amp.norm_sqr();
    }
    probs
}

// ---------------------------------------------------------------------------
// Gate circuit
// ---------------------------------------------------------------------------

/// Elementary gates produced by the cosine-sine decomposition.
///
/// Multiplexed rotations apply `R(angles[c])` to the target, where `c` is
/// the basis state of the control qubits read with `controls[0]` as the
/// most significant bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GateRecord", try_from = "GateRecord")]
pub enum Gate {
    MultiplexedRy { target: usize, controls: Vec<usize>, angles: Vec<f64> },
    MultiplexedRz { target: usize, controls: Vec<usize>, angles: Vec<f64> },
    /// `e^{i gamma} Rz(phi) Ry(theta) Rz(lambda)` on one qubit.
    SingleZyz { qubit: usize, gamma: f64, phi: f64, theta: f64, lambda: f64 },
    Not { qubit: usize },
    /// `diag(1, 1, 1, e^{i angle})` on (control, target).
    ControlledU1 { control: usize, target: usize, angle: f64 },
}

/// Flat serialization form: `{kind, qubits, angles}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    pub angles: Vec<f64>,
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> GateRecord {
        match g {
            Gate::MultiplexedRy { target, controls, angles } => GateRecord {
                kind: "multiplexed_ry".into(),
                qubits: std::iter::once(target).chain(controls).collect(),
                angles,
            },
            Gate::MultiplexedRz { target, controls, angles } => GateRecord {
                kind: "multiplexed_rz".into(),
                qubits: std::iter::once(target).chain(controls).collect(),
                angles,
            },
            Gate::SingleZyz { qubit, gamma, phi, theta, lambda } => GateRecord {
                kind: "single_zyz".into(),
                qubits: vec![qubit],
                angles: vec![gamma, phi, theta, lambda],
            },
            Gate::Not { qubit } => {
                GateRecord { kind: "not".into(), qubits: vec![qubit], angles: vec![] }
            }
            Gate::ControlledU1 { control, target, angle } => GateRecord {
                kind: "controlled_u1".into(),
                qubits: vec![control, target],
                angles: vec![angle],
            },
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = String;
    fn try_from(r: GateRecord) -> std::result::Result<Gate, String> {
        match r.kind.as_str() {
            "multiplexed_ry" | "multiplexed_rz" => {
                if r.qubits.is_empty() {
                    return Err("multiplexed rotation needs a target".into());
                }
                let target = r.qubits[0];
                let controls = r.qubits[1..].to_vec();
                if r.angles.len() != 1 << controls.len() {
                    return Err("angle list must have 2^controls entries".into());
                }
                Ok(if r.kind == "multiplexed_ry" {
                    Gate::MultiplexedRy { target, controls, angles: r.angles }
                } else {
                    Gate::MultiplexedRz { target, controls, angles: r.angles }
                })
            }
            "single_zyz" => {
                if r.qubits.len() != 1 || r.angles.len() != 4 {
                    return Err("single_zyz takes one qubit and four angles".into());
                }
                Ok(Gate::SingleZyz {
                    qubit: r.qubits[0],
                    gamma: r.angles[0],
                    phi: r.angles[1],
                    theta: r.angles[2],
                    lambda: r.angles[3],
                })
            }
            "not" => {
                if r.qubits.len() != 1 {
                    return Err("not takes exactly one qubit".into());
                }
                Ok(Gate::Not { qubit: r.qubits[0] })
            }
            "controlled_u1" => {
                if r.qubits.len() != 2 || r.angles.len() != 1 {
                    return Err("controlled_u1 takes two qubits and one angle".into());
                }
                Ok(Gate::ControlledU1 {
                    control: r.qubits[0],
                    target: r.qubits[1],
                    angle: r.angles[0],
                })
            }
            other => Err(format!("unknown gate kind `{other}`")),
        }
    }
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::MultiplexedRy { target, controls, .. }
            | Gate::MultiplexedRz { target, controls, .. } => {
                std::iter::once(*target).chain(controls.iter().copied()).collect()
            }
            Gate::SingleZyz { qubit, .. } | Gate::Not { qubit } => vec![*qubit],
            Gate::ControlledU1 { control, target, .. } => vec![*control, *target],
        }
    }

    /// Full matrix of the gate on an `n`-qubit register.
    pub fn matrix(&self, n: usize) -> CMatrix {
        let dim = 1usize << n;
        match self {
            Gate::Not { qubit } => {
                let bit = 1usize << (n - 1 - qubit);
                CMatrix::from_fn(dim, dim, |i, j| {
                    if i == j ^ bit { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
                })
            }
            Gate::ControlledU1 { control, target, angle } => {
                let cb = 1usize << (n - 1 - control);
                let tb = 1usize << (n - 1 - target);
                CMatrix::from_fn(dim, dim, |i, j| {
                    if i != j {
                        C64::new(0.0, 0.0)
                    } else if i & cb != 0 && i & tb != 0 {
                        C64::from_polar(1.0, *angle)
                    } else {
                        C64::new(1.0, 0.0)
                    }
                })
            }
            Gate::SingleZyz { qubit, gamma, phi, theta, lambda } => {
                let u = zyz_matrix(*gamma, *phi, *theta, *lambda);
                embed_single(&u, *qubit, n)
            }
            Gate::MultiplexedRy { target, controls, angles } => {
                multiplexed_matrix(target, controls, angles, n, ry_matrix)
            }
            Gate::MultiplexedRz { target, controls, angles } => {
                multiplexed_matrix(target, controls, angles, n, rz_matrix)
            }
        }
    }
}

pub fn ry_matrix(theta: f64) -> CMatrix {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    CMatrix::from_real_rows(&[&[c, -s], &[s, c]])
}

pub fn rz_matrix(theta: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from_polar(1.0, -theta / 2.0);
    m[(1, 1)] = C64::from_polar(1.0, theta / 2.0);
    m
}

pub fn zyz_matrix(gamma: f64, phi: f64, theta: f64, lambda: f64) -> CMatrix {
    rz_matrix(phi)
        .mul(&ry_matrix(theta))
        .mul(&rz_matrix(lambda))
        .scaled(C64::from_polar(1.0, gamma))
}

fn embed_single(u: &CMatrix, qubit: usize, n: usize) -> CMatrix {
    let dim = 1usize << n;
    let bit = 1usize << (n - 1 - qubit);
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let ib = usize::from(i & bit != 0);
        for jb in 0..2 {
            let j = if jb == 1 { i | bit } else { i & !bit };
            out[(i, j)] = u[(ib, jb)];
        }
    }
    out
}

fn multiplexed_matrix(
    target: &usize,
    controls: &[usize],
    angles: &[f64],
    n: usize,
    rot: fn(f64) -> CMatrix,
) -> CMatrix {
    let dim = 1usize << n;
    let tb = 1usize << (n - 1 - target);
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let mut ctrl = 0usize;
        for &c in controls {
            ctrl = (ctrl << 1) | usize::from(i & (1usize << (n - 1 - c)) != 0);
        }
        let u = rot(angles[ctrl]);
        let ib = usize::from(i & tb != 0);
        for jb in 0..2 {
            let j = if jb == 1 { i | tb } else { i & !tb };
            out[(i, j)] += u[(ib, jb)];
        }
    }
    // Each row was visited once per target-bit value; halve the overlap.
    // (Rows are written exactly once above, so nothing to fix.)
    out
}

/// An ordered list of elementary gates; `gates[0]` is applied first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    /// Depth claimed by the closed-form count for one application of the
    /// source unitary; the emitted gate count may differ.
    pub depth_reported: usize,
}

impl GateCircuit {
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            if g.qubits().iter().any(|&q| q >= self.num_qubits) {
                return Err(Error::DimensionMismatch(format!(
                    "gate {g:?} addresses a qubit outside 0..{}",
                    self.num_qubits
                )));
            }
            if let Gate::MultiplexedRy { controls, angles, .. }
            | Gate::MultiplexedRz { controls, angles, .. } = g
            {
                if angles.len() != 1 << controls.len() {
                    return Err(Error::DimensionMismatch(
                        "multiplexed angle list must have 2^controls entries".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Closed-form circuit depth for a `2^n` unitary applied `t` times:
/// `t (7 * 4^{n-1} + 5 * sum_{i=0}^{n-2} 4^i)`.
pub fn circuit_depth_formula(n: u32, t: u32) -> u64 {
    assert!(n >= 1 && t >= 1);
    let lead = 7 * 4u64.pow(n - 1);
    let tail: u64 = (0..n.saturating_sub(1)).map(|i| 4u64.pow(i)).sum();
    t as u64 * (lead + 5 * tail)
}

// ---------------------------------------------------------------------------
// Cosine-sine decomposition
// ---------------------------------------------------------------------------

/// Decompose a `2^n x 2^n` unitary into the multiplexed-rotation gate
/// family by recursive cosine-sine splitting.
pub fn csd_decompose(u: &UnitaryMatrix) -> Result<GateCircuit> {
    let n = u.num_qubits()?;
    let qubits: Vec<usize> = (0..n).collect();
    let mut gates = Vec::new();
    decompose_rec(u.matrix(), &qubits, &[], &mut gates)?;
    let circuit = GateCircuit {
        num_qubits: n,
        gates,
        depth_reported: circuit_depth_formula(n as u32, 1) as usize,
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Multiply a circuit back into its matrix; `gates[0]` acts first.
pub fn reconstruct(circuit: &GateCircuit) -> CMatrix {
    let dim = 1usize << circuit.num_qubits;
    let mut total = CMatrix::identity(dim);
    for gate in &circuit.gates {
        total = gate.matrix(circuit.num_qubits).mul(&total);
    }
    total
}

fn decompose_rec(
    u: &CMatrix,
    qubits: &[usize],
    controls: &[usize],
    gates: &mut Vec<Gate>,
) -> Result<()> {
    if qubits.len() == 1 {
        emit_controlled_single(u, qubits[0], controls, gates);
        return Ok(());
    }
    let (u1, u2, thetas, v1, v2) = csd_split(u)?;
    // Application order: right factor, multiplexor, left factor.
    emit_block_diagonal(&v1, &v2, qubits, controls, gates)?;
    let mut mux_controls: Vec<usize> = controls.to_vec();
    mux_controls.extend_from_slice(&qubits[1..]);
    let mut angles = vec![0.0; 1 << mux_controls.len()];
    let offset = angles.len() - thetas.len();
    angles[offset..].copy_from_slice(&thetas);
    gates.push(Gate::MultiplexedRy { target: qubits[0], controls: mux_controls, angles });
    emit_block_diagonal(&u1, &u2, qubits, controls, gates)?;
    Ok(())
}

/// `diag(a, b)` on `qubits` = X(q0) . (|1><1| (x) a) . X(q0) . (|1><1| (x) b)
/// with plain one-controls after the NOT conjugation.
fn emit_block_diagonal(
    a: &CMatrix,
    b: &CMatrix,
    qubits: &[usize],
    controls: &[usize],
    gates: &mut Vec<Gate>,
) -> Result<()> {
    let mut inner = controls.to_vec();
    inner.push(qubits[0]);
    decompose_rec(b, &qubits[1..], &inner, gates)?;
    gates.push(Gate::Not { qubit: qubits[0] });
    decompose_rec(a, &qubits[1..], &inner, gates)?;
    gates.push(Gate::Not { qubit: qubits[0] });
    Ok(())
}

/// Emit a single-qubit unitary (possibly controlled) as ZYZ rotations plus
/// a controlled phase.
fn emit_controlled_single(u: &CMatrix, qubit: usize, controls: &[usize], gates: &mut Vec<Gate>) {
    let (gamma, phi, theta, lambda) = zyz_angles(u);
    if controls.is_empty() {
        gates.push(Gate::SingleZyz { qubit, gamma, phi, theta, lambda });
        return;
    }
    let hot = (1usize << controls.len()) - 1;
    let mut push_rot = |is_z: bool, angle: f64| {
        if angle == 0.0 {
            return;
        }
        let mut angles = vec![0.0; 1 << controls.len()];
        angles[hot] = angle;
        gates.push(if is_z {
            Gate::MultiplexedRz { target: qubit, controls: controls.to_vec(), angles }
        } else {
            Gate::MultiplexedRy { target: qubit, controls: controls.to_vec(), angles }
        });
    };
    push_rot(true, lambda);
    push_rot(false, theta);
    push_rot(true, phi);
    emit_controlled_phase(controls, gamma, gates);
}

/// Phase `e^{i gamma}` applied when every listed control is |1>.
fn emit_controlled_phase(controls: &[usize], gamma: f64, gates: &mut Vec<Gate>) {
    if gamma == 0.0 {
        return;
    }
    match controls {
        [] => gates.push(Gate::SingleZyz { qubit: 0, gamma, phi: 0.0, theta: 0.0, lambda: 0.0 }),
        [c] => gates.push(Gate::SingleZyz {
            qubit: *c,
            gamma: gamma / 2.0,
            phi: gamma,
            theta: 0.0,
            lambda: 0.0,
        }),
        [c, t] => gates.push(Gate::ControlledU1 { control: *c, target: *t, angle: gamma }),
        more => {
            // Rz on the last control handles the |1> branch; the residual
            // half phase recurses on one fewer control.
            let (last, rest) = more.split_last().unwrap();
            let mut angles = vec![0.0; 1 << rest.len()];
            *angles.last_mut().unwrap() = gamma;
            gates.push(Gate::MultiplexedRz { target: *last, controls: rest.to_vec(), angles });
            emit_controlled_phase(rest, gamma / 2.0, gates);
        }
    }
}

/// One cosine-sine split `U = (u1 (+) u2) . M(c, s) . (v1 (+) v2)` with the
/// multiplexor angles returned as Ry angles `2 atan2(s_i, c_i)`.
#[allow(clippy::type_complexity)]
fn csd_split(u: &CMatrix) -> Result<(CMatrix, CMatrix, Vec<f64>, CMatrix, CMatrix)> {
    let m = u.rows / 2;
    let g11 = u.block(0, 0, m, m);
    let g12 = u.block(0, m, m, m);
    let g21 = u.block(m, 0, m, m);
    let g22 = u.block(m, m, m, m);

    let svd = g11.svd();
    let u1 = svd.u;
    let c: Vec<f64> = svd.sigma.iter().map(|&s| s.min(1.0)).collect();
    let v1 = svd.v.dagger();

    // g21 v = u2 S exactly, because the X columns inherit orthogonality
    // from unitarity: X†X = I - C².
    let x = g21.mul(&svd.v);
    let mut u2 = CMatrix::zeros(m, m);
    let mut s = vec![0.0; m];
    let mut pending = Vec::new();
    for j in 0..m {
        let col = x.column(j);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        s[j] = norm;
        if norm > 1e-9 {
            let unit: Vec<C64> = col.iter().map(|z| z / norm).collect();
            u2.set_column(j, &unit);
        } else {
            s[j] = 0.0;
            pending.push(j);
        }
    }
    for j in pending {
        complete_orthonormal_column(&mut u2, j)?;
    }

    // v2 rows from whichever block is better conditioned per row.
    let a2 = u2.dagger().mul(&g22); //  C v2
    let b2 = u1.dagger().mul(&g12); // -S v2
    let mut v2 = CMatrix::zeros(m, m);
    for i in 0..m {
        if c[i] >= s[i] {
            for j in 0..m {
                v2[(i, j)] = a2[(i, j)] / c[i];
            }
        } else {
            for j in 0..m {
                v2[(i, j)] = -b2[(i, j)] / s[i];
            }
        }
    }

    let thetas: Vec<f64> = c.iter().zip(&s).map(|(&ci, &si)| 2.0 * si.atan2(ci)).collect();
    Ok((u1, u2, thetas, v1, v2))
}

fn complete_orthonormal_column(m: &mut CMatrix, j: usize) -> Result<()> {
    let dim = m.rows;
    for cand in 0..dim {
        let mut col = vec![C64::new(0.0, 0.0); dim];
        col[cand] = C64::new(1.0, 0.0);
        for _pass in 0..2 {
            for k in 0..m.cols {
                if k == j {
                    continue;
                }
                let other = m.column(k);
                let proj: C64 = other.iter().zip(&col).map(|(p, c)| p.conj() * c).sum();
                for i in 0..dim {
                    col[i] -= proj * other[i];
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in col.iter_mut() {
                *z /= norm;
            }
            m.set_column(j, &col);
            return Ok(());
        }
    }
    Err(Error::SingularMatrix("could not complete orthonormal basis".into()))
}

/// ZYZ angles `(gamma, phi, theta, lambda)` with
/// `u = e^{i gamma} Rz(phi) Ry(theta) Rz(lambda)`, exact including the
/// global phase. Both gimbal branches use only well-conditioned entries.
pub fn zyz_angles(u: &CMatrix) -> (f64, f64, f64, f64) {
    assert_eq!((u.rows, u.cols), (2, 2));
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let mut gamma = det.arg() / 2.0;
    let phase = C64::from_polar(1.0, -gamma);
    let v00 = u[(0, 0)] * phase;
    let v01 = u[(0, 1)] * phase;
    let v10 = u[(1, 0)] * phase;
    let v11 = u[(1, 1)] * phase;
    let cos_half = v00.norm();
    let sin_half = v10.norm();
    let theta = 2.0 * sin_half.atan2(cos_half);
    let sum = if cos_half > 1e-12 { v11.arg() - v00.arg() } else { 0.0 };
    let diff = if sin_half > 1e-12 { v10.arg() - (-v01).arg() } else { 0.0 };
    let phi = 0.5 * (sum + diff);
    let lambda = 0.5 * (sum - diff);
    // The half-angle extraction can land on the -U branch; fold the sign
    // into the global phase.
    let rebuilt = zyz_matrix(gamma, phi, theta, lambda);
    if rebuilt.max_abs_diff(u) > rebuilt.scaled(C64::new(-1.0, 0.0)).max_abs_diff(u) {
        gamma += std::f64::consts::PI;
    }
    (gamma, phi, theta, lambda)
}
