//! Linear-inversion gate set tomography and quasiprobability solves.
//!
//! Tomography runs prepare one of the `4^n` tensor-product states, insert
//! an operator (or nothing, for the Gram matrix), and measure one of the
//! `4^n` Pauli observables. Exact mode contracts the PTMs analytically;
//! shot mode draws `N` one-shot +/-1 outcomes per circuit. Reconstruction
//! is `O_hat = T g^{-1} O_tilde T^{-1}` in the frame where preparations are
//! ideal; inverse noise and its expansion over basis-operation hats follow.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use crate::mitigation::basis::BasisOperationSet;
use crate::mitigation::QuasiprobDecomposition;
use crate::ptm::{
    pauli_weight, prep_state_ptm, frame_matrix_n, NoiseModel, PauliTransferMatrix,
    PtmStateVector, PrepLabel,
};

/// Shot budget for each tomography circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GstShots {
    /// Analytic expectation values (infinite shots).
    Exact,
    Shots(u64),
}

/// Raw tomography data: the Gram matrix plus one response matrix per
/// operator and per basis operation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GstDataset {
    pub n_qubits: usize,
    pub shots: GstShots,
    pub gram: RMatrix,
    pub gram_condition: f64,
    pub op_matrices: Vec<RMatrix>,
    pub basis_matrices: Vec<RMatrix>,
}

/// Evaluates noisy prepare-(operate)-measure circuits.
pub struct GstExecutor {
    pub n_qubits: usize,
    pub noise: NoiseModel,
    preps: Vec<PtmStateVector>,
}

impl GstExecutor {
    pub fn new(n_qubits: usize, noise: NoiseModel) -> Self {
        let size = 4usize.pow(n_qubits as u32);
        let prep_noise = noise.prep_channel(n_qubits);
        let mut preps = Vec::with_capacity(size);
        for k in 0..size {
            let labels = prep_labels(k, n_qubits);
            preps.push(prep_noise.apply(&prep_state_ptm(&labels)));
        }
        GstExecutor { n_qubits, noise, preps }
    }

    /// Analytic expectation of observable `j` after preparing state `k`
    /// and applying `op` (noisy channel), with readout attenuation.
    pub fn expectation(&self, k: usize, op: Option<&PauliTransferMatrix>, j: usize) -> f64 {
        let state = match op {
            Some(channel) => channel.apply(&self.preps[k]),
            None => self.preps[k].clone(),
        };
        let weight = pauli_weight(j, self.n_qubits) as i32;
        (1.0 - 2.0 * self.noise.eps_meas).powi(weight) * state.components[j]
    }

    /// One-shot sampling estimate of the same expectation: `shots` draws of
    /// a +/-1 observable, averaged.
    pub fn sampled_expectation(
        &self,
        k: usize,
        op: Option<&PauliTransferMatrix>,
        j: usize,
        shots: u64,
        rng: &mut impl Rng,
    ) -> f64 {
        let mu = self.expectation(k, op, j).clamp(-1.0, 1.0);
        let p_plus = 0.5 * (1.0 + mu);
        let wins = Binomial::new(shots, p_plus).expect("probability in range").sample(rng);
        (2.0 * wins as f64 - shots as f64) / shots as f64
    }

    fn response_matrix(
        &self,
        op: Option<&PauliTransferMatrix>,
        shots: GstShots,
        rng: &mut impl Rng,
    ) -> RMatrix {
        let size = 4usize.pow(self.n_qubits as u32);
        RMatrix::from_fn(size, size, |j, k| match shots {
            GstShots::Exact => self.expectation(k, op, j),
            GstShots::Shots(n) => self.sampled_expectation(k, op, j, n, rng),
        })
    }
}

/// Decompose a flat prep index into per-qubit labels (qubit 0 varies
/// slowest, matching the Kronecker order of the frame matrix).
pub fn prep_labels(k: usize, n_qubits: usize) -> Vec<PrepLabel> {
    (0..n_qubits)
        .map(|q| PrepLabel::ALL[(k >> (2 * (n_qubits - 1 - q))) & 3])
        .collect()
}

/// Run tomography for the listed operators (noisy channels) and every
/// basis operation. The Gram matrix comes from circuits with no operator.
pub fn run_gst(
    executor: &GstExecutor,
    operators: &[PauliTransferMatrix],
    basis: Option<&BasisOperationSet>,
    shots: GstShots,
    seed: u64,
) -> Result<GstDataset> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let gram = executor.response_matrix(None, shots, &mut rng);
    let gram_condition = gram.condition_number();
    if gram_condition > 1e8 {
        return Err(Error::DegenerateTomography { cond: gram_condition });
    }
    let op_matrices = operators
        .iter()
        .map(|op| executor.response_matrix(Some(op), shots, &mut rng))
        .collect();
    let basis_matrices = match basis {
        Some(set) => set
            .operations
            .iter()
            .map(|op| executor.response_matrix(Some(&op.noisy(&executor.noise)), shots, &mut rng))
            .collect(),
        None => Vec::new(),
    };
    Ok(GstDataset {
        n_qubits: executor.n_qubits,
        shots,
        gram,
        gram_condition,
        op_matrices,
        basis_matrices,
    })
}

/// Which response matrix of a dataset to reconstruct.
#[derive(Clone, Copy, Debug)]
pub enum GstTarget {
    Operator(usize),
    Basis(usize),
}

/// Reconstruct `O_hat = T g^{-1} O_tilde T^{-1}`.
pub fn compute_hat(gst: &GstDataset, which: GstTarget) -> Result<PauliTransferMatrix> {
    let tilde = match which {
        GstTarget::Operator(i) => &gst.op_matrices[i],
        GstTarget::Basis(i) => &gst.basis_matrices[i],
    };
    hat_from_parts(&gst.gram, tilde, gst.n_qubits)
}

pub fn hat_from_parts(gram: &RMatrix, tilde: &RMatrix, n_qubits: usize) -> Result<PauliTransferMatrix> {
    let t = frame_matrix_n(n_qubits);
    let g_inv_tilde = gram
        .solve_many(tilde)
        .map_err(|_| Error::DegenerateTomography { cond: f64::INFINITY })?;
    let t_inv = t.inverse()?;
    Ok(PauliTransferMatrix { n_qubits, matrix: t.mul(&g_inv_tilde).mul(&t_inv) })
}

/// `N^{-1} = O_exact O_hat^{-1}`; the returned flag warns when the inverse
/// strays far from the identity (heavy noise or poor tomography).
pub fn inverse_noise(
    exact: &PauliTransferMatrix,
    hat: &PauliTransferMatrix,
) -> Result<(PauliTransferMatrix, bool)> {
    let inv = hat.inverse().map_err(|_| Error::SingularMatrix("O_hat is singular".into()))?;
    let n_inv = exact.compose(&inv);
    let deviation = n_inv.matrix.max_abs_diff(&RMatrix::identity(n_inv.dim()));
    Ok((n_inv, deviation > 1.0))
}

/// Expand `target` over the basis-operation hats with minimal L1 weight.
///
/// The affine trace-preservation constraints make the full basis sets pin
/// the coefficients uniquely, in which case a QR solve is the minimizer;
/// genuinely underdetermined systems fall back to a linear program over
/// split positive/negative parts.
pub fn decompose_quasiprob(
    target: &PauliTransferMatrix,
    basis_hats: &[PauliTransferMatrix],
    labels: Vec<String>,
) -> Result<QuasiprobDecomposition> {
    assert_eq!(basis_hats.len(), labels.len());
    if basis_hats.is_empty() {
        return Err(Error::EmptyInput("no basis operations provided".into()));
    }
    let d2 = target.dim() * target.dim();
    let m = basis_hats.len();
    let mut a = RMatrix::zeros(d2, m);
    for (col, b) in basis_hats.iter().enumerate() {
        for (row, v) in b.matrix.data.iter().enumerate() {
            a[(row, col)] = *v;
        }
    }
    let b: Vec<f64> = target.matrix.data.clone();

    let q = match a.least_squares(&b) {
        Ok((q, _, _)) => q,
        Err(_) => solve_l1_lp(&a, &b)?,
    };
    check_residual(&a, &q, &b, target.dim())?;
    Ok(QuasiprobDecomposition::new(q, labels))
}

fn check_residual(a: &RMatrix, q: &[f64], b: &[f64], dim: usize) -> Result<()> {
    let image = a.matvec(q);
    let mut worst = 0.0f64;
    let mut at = (0usize, 0usize);
    for (idx, (got, want)) in image.iter().zip(b).enumerate() {
        let err = (got - want).abs();
        if err > worst {
            worst = err;
            at = (idx / dim, idx % dim);
        }
    }
    if worst > 1e-8 {
        return Err(Error::SpanDeficiency { residual: worst, row: at.0, col: at.1 });
    }
    Ok(())
}

/// Minimize `sum |q|` subject to `A q = b` by splitting `q = u - v` with
/// `u, v >= 0`.
fn solve_l1_lp(a: &RMatrix, b: &[f64], ) -> Result<Vec<f64>> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let m = a.cols;
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let pos: Vec<_> = (0..m).map(|_| problem.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let neg: Vec<_> = (0..m).map(|_| problem.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for row in 0..a.rows {
        let mut terms = Vec::new();
        for col in 0..m {
            let coeff = a[(row, col)];
            if coeff != 0.0 {
                terms.push((pos[col], coeff));
                terms.push((neg[col], -coeff));
            }
        }
        if terms.is_empty() && b[row].abs() > 1e-8 {
            return Err(Error::SpanDeficiency { residual: b[row].abs(), row, col: 0 });
        }
        problem.add_constraint(&terms[..], ComparisonOp::Eq, b[row]);
    }
    let solution = problem
        .solve()
        .map_err(|e| Error::SingularMatrix(format!("L1 program failed: {e}")))?;
    Ok((0..m).map(|i| solution[pos[i]] - solution[neg[i]]).collect())
}

/// Quasiprobabilities for the initial state and the computational-basis
/// measurement in the tomography frame: preparations are the frame
/// columns, measurement rows are `(g T^{-1})_j`.
///
/// The measurement expansion reproduces the ideal Z observable; an extra
/// leading `coin` entry carrying weight `1 - sum(q)` records a uniformly
/// random bit so that binned outcome counts stay unbiased, and vanishes in
/// the noiseless case.
pub fn decompose_state_measurement(
    gst: &GstDataset,
) -> Result<(QuasiprobDecomposition, QuasiprobDecomposition)> {
    let n = gst.n_qubits;
    let size = 4usize.pow(n as u32);
    let t = frame_matrix_n(n);

    // rho_exact = |0..0><0..0| in Pauli components.
    let rho_exact = prep_state_ptm(&vec![PrepLabel::Zero; n]).components;
    let q_rho = t.solve(&rho_exact)?;
    let prep_labels: Vec<String> = (0..size)
        .map(|k| {
            prep_labels(k, n)
                .iter()
                .map(|l| format!("{l:?}"))
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();

    // Measurement rows M_hat_j = (g T^{-1})_{j, .}; solve q^T M_hat = Z row.
    let t_inv = t.inverse()?;
    let m_hat = gst.gram.mul(&t_inv);
    let mut z_row = vec![0.0; size];
    z_row[size - 1] = 1.0; // the all-Z Pauli index
    let q_meas = m_hat.transpose().solve(&z_row)?;
    let coin = 1.0 - q_meas.iter().sum::<f64>();
    let mut coeffs = Vec::with_capacity(size + 1);
    coeffs.push(coin);
    coeffs.extend_from_slice(&q_meas);
    let mut meas_labels = Vec::with_capacity(size + 1);
    meas_labels.push("coin".to_string());
    for j in 0..size {
        meas_labels.push(format!("obs{j}"));
    }

    Ok((
        QuasiprobDecomposition::new(q_rho, prep_labels),
        QuasiprobDecomposition::new(coeffs, meas_labels),
    ))
}

/// Mean reconstruction error against exact tomography across a shot grid,
/// with the fitted log-log slope (expected near -0.5).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShotScalingReport {
    pub shot_grid: Vec<u64>,
    pub mean_errors: Vec<f64>,
    pub slope: f64,
}

/// Repeat shot-limited tomography of a single-qubit X gate under the given
/// noise and regress the reconstruction error against the shot count.
pub fn gst_error_scaling(
    noise: &NoiseModel,
    shot_grid: &[u64],
    repetitions: usize,
    seed: u64,
) -> Result<ShotScalingReport> {
    assert!(shot_grid.len() >= 2, "need at least two grid points");
    let executor = GstExecutor::new(1, *noise);
    let x_exact = crate::ptm::ptm_of_unitary_matrix(&{
        let mut x = crate::linalg::CMatrix::zeros(2, 2);
        x[(0, 1)] = num_complex::Complex64::new(1.0, 0.0);
        x[(1, 0)] = num_complex::Complex64::new(1.0, 0.0);
        x
    });
    let x_noisy = noise.single_qubit_channel(0, 1).compose(&x_exact);

    let exact_gst = run_gst(&executor, std::slice::from_ref(&x_noisy), None, GstShots::Exact, seed)?;
    let hat_exact = compute_hat(&exact_gst, GstTarget::Operator(0))?;

    let mut mean_errors = Vec::with_capacity(shot_grid.len());
    for (gi, &shots) in shot_grid.iter().enumerate() {
        let mut total = 0.0;
        for rep in 0..repetitions {
            let run_seed = seed
                .wrapping_add(1 + gi as u64)
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(rep as u64);
            let gst = run_gst(&executor, std::slice::from_ref(&x_noisy), None, GstShots::Shots(shots), run_seed)?;
            let hat = compute_hat(&gst, GstTarget::Operator(0))?;
            total += hat.matrix.max_abs_diff(&hat_exact.matrix);
        }
        mean_errors.push(total / repetitions as f64);
    }
    let slope = log_log_slope(shot_grid, &mean_errors);
    Ok(ShotScalingReport { shot_grid: shot_grid.to_vec(), mean_errors, slope })
}

fn log_log_slope(xs: &[u64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|&x| (x as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
