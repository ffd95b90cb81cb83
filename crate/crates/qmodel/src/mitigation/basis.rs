//! Implementable basis operations for quasiprobability decompositions.
//!
//! Single-qubit corrections use 13 deterministic CPTP maps (identity, the
//! Paulis, six Clifford conjugation products, and three projective state
//! preparations). Two-qubit corrections use the 169 tensor pairs plus 72
//! entangling maps built from CNOT/CS/CH/SWAP/iSWAP variants conjugated by
//! the Clifford `K = S o H` that cycles the Pauli axes, for 241 in total.
//! Trace-preserving maps form an affine space of dimension `16^n - 4^n`,
//! and each set is an affine basis for it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::ptm::{NoiseModel, PauliTransferMatrix};

/// How a basis operation acts, for building exact and noisy channels.
#[derive(Clone, Debug)]
pub enum BasisKind {
    /// Unitary conjugation touching the listed qubits.
    Unitary(CMatrix),
    /// Discard the register and prepare the given single-qubit state
    /// (PTM components); only used in the single-qubit set.
    StatePrep([f64; 4]),
    /// Tensor product of two single-qubit operations.
    TensorPair(Box<BasisKind>, Box<BasisKind>),
}

/// One implementable correction operation.
#[derive(Clone, Debug)]
pub struct BasisOperation {
    pub label: String,
    pub kind: BasisKind,
    /// Ideal channel in PTM form.
    pub exact: PauliTransferMatrix,
}

impl BasisOperation {
    /// Physical noisy implementation: class noise composed after the ideal
    /// action (per-qubit noise for tensor pairs, register noise for
    /// entangling maps).
    pub fn noisy(&self, noise: &NoiseModel) -> PauliTransferMatrix {
        if noise.is_ideal() {
            return self.exact.clone();
        }
        match &self.kind {
            BasisKind::TensorPair(_, _) => {
                let n1 = noise.single_qubit_channel(0, 1);
                n1.kron(&n1).compose(&self.exact)
            }
            _ => noise.register_channel(self.exact.n_qubits).compose(&self.exact),
        }
    }
}

/// The full per-size basis set.
#[derive(Clone, Debug)]
pub struct BasisOperationSet {
    pub n_qubits: usize,
    pub operations: Vec<BasisOperation>,
}

impl BasisOperationSet {
    pub fn len(&self) -> usize {
        self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operations.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.operations.iter().map(|op| op.label.clone()).collect()
    }
}

/// Build the 13-element (one qubit) or 241-element (two qubit) set.
pub fn build_basis_set(n_qubits: usize) -> Result<BasisOperationSet> {
    match n_qubits {
        1 => Ok(BasisOperationSet { n_qubits: 1, operations: single_qubit_ops() }),
        2 => Ok(BasisOperationSet { n_qubits: 2, operations: two_qubit_ops() }),
        other => Err(Error::Config(format!(
            "basis operations are defined for 1 or 2 qubits, not {other}"
        ))),
    }
}

fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

fn gate_i() -> CMatrix {
    CMatrix::identity(2)
}

fn gate_x() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

fn gate_y() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => c(0.0, -1.0),
        (1, 0) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    })
}

fn gate_z() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (1, 1) => c(-1.0, 0.0),
        _ => c(0.0, 0.0),
    })
}

fn gate_h() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real_rows(&[&[s, s], &[s, -s]])
}

fn gate_s() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (1, 1) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    })
}

fn gate_sdg() -> CMatrix {
    gate_s().dagger()
}

/// `K = S o H` as a unitary; conjugation by it cycles X -> Z -> Y -> X.
fn gate_k() -> CMatrix {
    gate_s().mul(&gate_h())
}

fn kpow(a: usize) -> CMatrix {
    match a % 3 {
        0 => gate_i(),
        1 => gate_k(),
        // K^2 acts as K^dagger up to phase.
        _ => gate_k().mul(&gate_k()),
    }
}

fn unitary_op(label: &str, u: CMatrix) -> BasisOperation {
    let exact = crate::ptm::ptm_of_unitary_matrix(&u);
    BasisOperation { label: label.to_string(), kind: BasisKind::Unitary(u), exact }
}

fn prep_op(label: &str, components: [f64; 4]) -> BasisOperation {
    let mut m = crate::linalg::RMatrix::zeros(4, 4);
    for (i, v) in components.iter().enumerate() {
        m[(i, 0)] = *v;
    }
    BasisOperation {
        label: label.to_string(),
        kind: BasisKind::StatePrep(components),
        exact: PauliTransferMatrix { n_qubits: 1, matrix: m },
    }
}

fn single_qubit_ops() -> Vec<BasisOperation> {
    let h = gate_h();
    let s = gate_s();
    let sdg = gate_sdg();
    vec![
        unitary_op("id", gate_i()),
        unitary_op("x", gate_x()),
        unitary_op("y", gate_y()),
        unitary_op("z", gate_z()),
        unitary_op("h.sdg.h", h.mul(&sdg).mul(&h)),
        unitary_op("s.h.sdg.h.sdg", s.mul(&h).mul(&sdg).mul(&h).mul(&sdg)),
        unitary_op("sdg", sdg.clone()),
        unitary_op("s.h.sdg", s.mul(&h).mul(&sdg)),
        unitary_op("h", h.clone()),
        unitary_op("h.sdg.h.s.h", h.mul(&sdg).mul(&h).mul(&s).mul(&h)),
        prep_op("prep+", [1.0, 1.0, 0.0, 0.0]),
        prep_op("prep_y+", [1.0, 0.0, 1.0, 0.0]),
        prep_op("prep0", [1.0, 0.0, 0.0, 1.0]),
    ]
}

fn controlled(u: &CMatrix) -> CMatrix {
    let mut m = CMatrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = u[(i, j)];
        }
    }
    m
}

fn gate_cx() -> CMatrix {
    controlled(&gate_x())
}

fn gate_swap() -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| {
        let swapped = ((i & 1) << 1) | (i >> 1);
        if j == swapped {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn gate_iswap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(3, 3)] = c(1.0, 0.0);
    m[(1, 2)] = c(0.0, 1.0);
    m[(2, 1)] = c(0.0, 1.0);
    m
}

/// Control rotated into the Hadamard eigenbasis: `(V (x) I) CX (V† (x) I)`
/// with `V = Ry(pi/4)` sending |0>, |1> to the H eigenstates.
fn gate_chx() -> CMatrix {
    let v = crate::synthesis::ry_matrix(std::f64::consts::FRAC_PI_4);
    let vi = v.kron(&gate_i());
    vi.mul(&gate_cx()).mul(&vi.dagger())
}

fn two_qubit_ops() -> Vec<BasisOperation> {
    let singles = single_qubit_ops();
    let mut ops = Vec::with_capacity(241);
    for a in &singles {
        for b in &singles {
            ops.push(BasisOperation {
                label: format!("{}(x){}", a.label, b.label),
                kind: BasisKind::TensorPair(Box::new(a.kind.clone()), Box::new(b.kind.clone())),
                exact: a.exact.kron(&b.exact),
            });
        }
    }

    let x1 = gate_x().kron(&gate_i());
    let h1 = gate_h().kron(&gate_i());
    type Family<'a> = (&'a str, CMatrix, &'a [(usize, usize)]);
    let entangling: Vec<Family> = vec![
        ("cx", gate_cx(), ALL_NINE),
        ("x1.cx.x1", x1.mul(&gate_cx()).mul(&x1), ALL_NINE),
        ("cs", controlled(&gate_s()), ALL_NINE),
        ("ch", controlled(&gate_h()), ALL_NINE),
        ("chx", gate_chx(), ALL_NINE),
        ("cx.h1", gate_cx().mul(&h1), ALL_NINE),
        // SWAP commutes with K (x) K, leaving three distinct conjugates.
        ("swap", gate_swap(), &[(0, 0), (0, 1), (0, 2)]),
        // iSWAP is exchange symmetric; K on the first qubit combined
        // with the full K family on the second spans six directions.
        ("iswap", gate_iswap(), &[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]),
        ("swap.h1", gate_swap().mul(&h1), ALL_NINE),
    ];
    for (name, base, conjugations) in entangling {
        for &(a, b) in conjugations {
            let outer = kpow(a).kron(&kpow(b));
            let u = outer.mul(&base).mul(&outer.dagger());
            ops.push(unitary_op(&format!("{name}.k{a}{b}"), u));
        }
    }
    ops
}

const ALL_NINE: &[(usize, usize)] = &[
    (1, 1),
    (1, 2),
    (1, 0),
    (2, 1),
    (2, 2),
    (2, 0),
    (0, 1),
    (0, 2),
    (0, 0),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMatrix;

    #[test]
    fn single_qubit_set_has_thirteen_cptp_maps() {
        let set = build_basis_set(1).unwrap();
        assert_eq!(set.len(), 13);
        for op in &set.operations {
            assert!(op.exact.trace_preservation_error() < 1e-12, "{}", op.label);
            assert!(op.exact.matrix.max_abs() <= 1.0 + 1e-12, "{}", op.label);
        }
    }

    #[test]
    fn two_qubit_set_has_241_cptp_maps() {
        let set = build_basis_set(2).unwrap();
        assert_eq!(set.len(), 241);
        for op in &set.operations {
            assert!(op.exact.trace_preservation_error() < 1e-12, "{}", op.label);
            assert!(op.exact.matrix.max_abs() <= 1.0 + 1e-12, "{}", op.label);
        }
    }

    #[test]
    fn three_qubits_unsupported() {
        assert!(build_basis_set(3).is_err());
    }

    #[test]
    fn operations_are_pairwise_distinct() {
        for n in [1usize, 2] {
            let set = build_basis_set(n).unwrap();
            for i in 0..set.len() {
                for j in (i + 1)..set.len() {
                    let diff = set.operations[i]
                        .exact
                        .matrix
                        .max_abs_diff(&set.operations[j].exact.matrix);
                    assert!(
                        diff > 1e-9,
                        "{} and {} coincide",
                        set.operations[i].label,
                        set.operations[j].label
                    );
                }
            }
        }
    }

    #[test]
    fn k_conjugation_cycles_pauli_axes() {
        let k = crate::ptm::ptm_of_unitary_matrix(&gate_k());
        // X -> Z -> Y -> X as Bloch permutation.
        let mut expect = RMatrix::zeros(4, 4);
        expect[(0, 0)] = 1.0;
        expect[(3, 1)] = 1.0;
        expect[(1, 2)] = 1.0;
        expect[(2, 3)] = 1.0;
        assert!(k.matrix.max_abs_diff(&expect) < 1e-12);
        // K^3 is the identity channel.
        let k3 = k.compose(&k).compose(&k);
        assert!(k3.matrix.max_abs_diff(&RMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn sets_span_the_trace_preserving_affine_space() {
        // Stack [vec(B_i); 1] columns and check full column rank: the
        // operations are affinely independent, hence an affine basis for
        // the (16^n - 4^n)-dimensional trace-preserving space.
        for (n, expect) in [(1usize, 13usize), (2, 241)] {
            let set = build_basis_set(n).unwrap();
            let d = set.operations[0].exact.dim();
            let rows = d * d + 1;
            let mut a = RMatrix::zeros(rows, set.len());
            for (col, op) in set.operations.iter().enumerate() {
                for (r, v) in op.exact.matrix.data.iter().enumerate() {
                    a[(r, col)] = *v;
                }
                a[(rows - 1, col)] = 1.0;
            }
            let b = vec![0.0; rows];
            // least_squares errors out on rank deficiency.
            assert!(a.least_squares(&b).is_ok(), "rank below {expect} for n = {n}");
        }
    }

    #[test]
    fn noisy_versions_stay_trace_preserving() {
        let noise = NoiseModel {
            q_dep: 0.05,
            q_dep2: 0.08,
            gamma_ad: 0.04,
            q_z: 0.02,
            eps_meas: 0.03,
            eps_prep: 0.02,
        };
        for n in [1usize, 2] {
            let set = build_basis_set(n).unwrap();
            for op in &set.operations {
                let noisy = op.noisy(&noise);
                assert!(noisy.trace_preservation_error() < 1e-12, "{}", op.label);
            }
        }
    }

    #[test]
    fn identity_is_the_first_operation() {
        assert_eq!(build_basis_set(1).unwrap().operations[0].label, "id");
        let two = build_basis_set(2).unwrap();
        assert_eq!(two.operations[0].label, "id(x)id");
        assert!(two.operations[0]
            .exact
            .matrix
            .max_abs_diff(&RMatrix::identity(16))
            < 1e-12);
    }
}
